#include "mfgcn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfgcn::svg {

namespace {

constexpr int kWidth = 560;
constexpr int kHeight = 480;
constexpr int kMargin = 60;

const char* kColors[6] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

void open_svg(std::ostringstream& os, const std::string& title) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
        "font-family=\"sans-serif\">"
     << escape(title) << "</text>\n";
}

}  // namespace

std::string render_roc(const std::string& title, const std::vector<train::RocCurve>& curves) {
  const double plot_w = kWidth - 2.0 * kMargin;
  const double plot_h = kHeight - 2.0 * kMargin;
  auto px = [&](double fpr) { return kMargin + fpr * plot_w; };
  auto py = [&](double tpr) { return kHeight - kMargin - tpr * plot_h; };

  std::ostringstream os;
  open_svg(os, title);
  // axes
  os << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(0)
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(0) << "\" y2=\"" << py(1)
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
     << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"6,4\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16
     << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">false positive "
        "rate</text>\n"
     << "<text x=\"18\" y=\"" << kHeight / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" transform=\"rotate(-90 "
        "18 "
     << kHeight / 2 << ")\">true positive rate</text>\n";

  int legend_y = kMargin + 10;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& curve = curves[c];
    const char* color = kColors[c % 6];
    if (curve.defined && !curve.fpr.empty()) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < curve.fpr.size(); ++i) {
        os << num(px(curve.fpr[i])) << "," << num(py(curve.tpr[i])) << " ";
      }
      os << "\"/>\n";
    }
    os << "<text x=\"" << kWidth - kMargin - 150 << "\" y=\"" << legend_y
       << "\" font-size=\"12\" font-family=\"sans-serif\" fill=\"" << color << "\">class "
       << curve.class_index
       << (curve.defined ? " AUC=" + num(curve.auc) : std::string(" AUC undefined")) << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_box_plot(const std::string& title, const std::vector<BoxSeries>& series) {
  std::ostringstream os;
  open_svg(os, title);
  const double plot_w = kWidth - 2.0 * kMargin;
  const double plot_h = kHeight - 2.0 * kMargin;
  const double slot = series.empty() ? plot_w : plot_w / series.size();
  auto py = [&](double v) { return kHeight - kMargin - std::clamp(v, 0.0, 1.0) * plot_h; };

  os << "<line x1=\"" << kMargin << "\" y1=\"" << py(0) << "\" x2=\"" << kWidth - kMargin
     << "\" y2=\"" << py(0) << "\" stroke=\"black\"/>\n";
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    os << "<line x1=\"" << kMargin - 4 << "\" y1=\"" << py(tick) << "\" x2=\"" << kMargin
       << "\" y2=\"" << py(tick) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << kMargin - 8 << "\" y=\"" << py(tick) + 4
       << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << num(tick)
       << "</text>\n";
  }

  for (std::size_t i = 0; i < series.size(); ++i) {
    auto values = series[i].values;
    if (values.empty()) continue;
    std::sort(values.begin(), values.end());
    auto quantile = [&values](double q) {
      const double pos = q * (values.size() - 1);
      const std::size_t lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, values.size() - 1);
      return values[lo] + (pos - lo) * (values[hi] - values[lo]);
    };
    const double q1 = quantile(0.25), q2 = quantile(0.5), q3 = quantile(0.75);
    const double lo = values.front(), hi = values.back();
    const double cx = kMargin + slot * (i + 0.5);
    const double half = std::min(28.0, slot * 0.3);
    const char* color = kColors[i % 6];

    os << "<line x1=\"" << cx << "\" y1=\"" << py(lo) << "\" x2=\"" << cx << "\" y2=\"" << py(hi)
       << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << cx - half << "\" y1=\"" << py(lo) << "\" x2=\"" << cx + half
       << "\" y2=\"" << py(lo) << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << cx - half << "\" y1=\"" << py(hi) << "\" x2=\"" << cx + half
       << "\" y2=\"" << py(hi) << "\" stroke=\"black\"/>\n"
       << "<rect x=\"" << cx - half << "\" y=\"" << py(q3) << "\" width=\"" << 2 * half
       << "\" height=\"" << std::max(1.0, py(q1) - py(q3)) << "\" fill=\"" << color
       << "\" fill-opacity=\"0.45\" stroke=\"black\"/>\n"
       << "<line x1=\"" << cx - half << "\" y1=\"" << py(q2) << "\" x2=\"" << cx + half
       << "\" y2=\"" << py(q2) << "\" stroke=\"black\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << cx << "\" y=\"" << kHeight - kMargin + 18
       << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">"
       << escape(series[i].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mfgcn::svg
