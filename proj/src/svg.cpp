#include "macroforest/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "macroforest/errors.hpp"

namespace macroforest {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Scale {
  double lo, hi;
  double a, b;  // pixel = a * value + b
  Scale(double lo_, double hi_, double px_lo, double px_hi) : lo(lo_), hi(hi_) {
    if (hi <= lo) hi = lo + 1.0;
    a = (px_hi - px_lo) / (hi - lo);
    b = px_lo - a * lo;
  }
  double operator()(double v) const { return a * v + b; }
};

void open_chart(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
}

void axes(std::ostringstream& out, const Scale& sx, const Scale& sy,
          const std::string& x_label, const std::string& y_label) {
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
      << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = sx.lo + (sx.hi - sx.lo) * i / 4.0;
    const double fy = sy.lo + (sy.hi - sy.lo) * i / 4.0;
    out << "<text x=\"" << num(sx(fx)) << "\" y=\"" << kHeight - kBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << num(fx) << "</text>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(sy(fy) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << num(fy) << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\""
      << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << (kTop + kHeight - kBottom) / 2 << ")\">"
      << y_label << "</text>\n";
}

const char* kColors[] = {"#1f6fb4", "#d1491f", "#3c8a3f", "#8a4fa8"};

}  // namespace

std::string svg_multi_line_plot(const std::vector<double>& x,
                                const std::vector<std::vector<double>>& series,
                                const std::vector<std::string>& series_names,
                                const std::string& title,
                                const std::string& x_label,
                                const std::string& y_label) {
  if (x.empty() || series.empty()) throw InvalidConfigError("svg: empty plot data");
  double ylo = series[0][0], yhi = series[0][0];
  for (const auto& s : series) {
    if (s.size() != x.size()) throw LengthMismatchError("svg: series length mismatch");
    for (double v : s) {
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  }
  const double pad = (yhi - ylo) * 0.05 + 1e-12;
  Scale sx(x.front(), x.back(), kLeft, kWidth - kRight);
  Scale sy(ylo - pad, yhi + pad, kHeight - kBottom, kTop);

  std::ostringstream out;
  open_chart(out, title);
  axes(out, sx, sy, x_label, y_label);
  for (std::size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill=\"none\" stroke=\"" << kColors[s % 4]
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
      out << num(sx(x[i])) << ',' << num(sy(series[s][i])) << ' ';
    }
    out << "\"/>\n";
    if (s < series_names.size() && !series_names[s].empty()) {
      out << "<text x=\"" << kWidth - kRight - 6 << "\" y=\""
          << kTop + 16 + 16 * double(s)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
          << kColors[s % 4] << "\">" << series_names[s] << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_line_plot(const std::vector<double>& x,
                          const std::vector<double>& y,
                          const std::string& title, const std::string& x_label,
                          const std::string& y_label) {
  return svg_multi_line_plot(x, {y}, {}, title, x_label, y_label);
}

std::string svg_bar_plot(const std::vector<std::string>& labels,
                         const std::vector<double>& values,
                         const std::string& title) {
  if (labels.size() != values.size() || labels.empty()) {
    throw LengthMismatchError("svg: labels/values mismatch");
  }
  double hi = 0;
  for (double v : values) hi = std::max(hi, v);
  Scale sy(0.0, hi, kHeight - kBottom, kTop);

  std::ostringstream out;
  open_chart(out, title);
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
      << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\"/>\n";
  const double span = (kWidth - kLeft - kRight) / double(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double x0 = kLeft + span * double(i) + span * 0.15;
    const double y0 = sy(values[i]);
    out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\""
        << num(span * 0.7) << "\" height=\"" << num(kHeight - kBottom - y0)
        << "\" fill=\"#1f6fb4\"/>\n";
    out << "<text x=\"" << num(x0 + span * 0.35) << "\" y=\""
        << kHeight - kBottom + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << labels[i] << "</text>\n";
    out << "<text x=\"" << num(x0 + span * 0.35) << "\" y=\"" << num(y0 - 4)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << num(values[i]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace macroforest
