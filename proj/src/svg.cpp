#include "tactile/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tactile {

namespace {

constexpr int kWidth = 720, kHeight = 440;
constexpr int kMarginL = 70, kMarginR = 20, kMarginT = 40, kMarginB = 50;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void open_svg(std::ofstream& out, int w, int h, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
      << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
}

}  // namespace

void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series) {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;

  const double plot_w = kWidth - kMarginL - kMarginR;
  const double plot_h = kHeight - kMarginT - kMarginB;
  auto sx = [&](double x) { return kMarginL + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) {
    return kHeight - kMarginB - (y - ymin) / (ymax - ymin) * plot_h;
  };

  const auto tmp = path.string() + ".tmp";
  std::ofstream out(tmp, std::ios::trunc);
  if (!out) throw std::runtime_error("write_line_plot: cannot write " + tmp);
  open_svg(out, kWidth, kHeight, title);

  out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    out << "<text x=\"" << fmt(sx(fx)) << "\" y=\"" << kHeight - kMarginB + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(fx) << "</text>\n";
    out << "<text x=\"" << kMarginL - 8 << "\" y=\"" << fmt(sy(fy) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(fy) << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << kHeight / 2 << ")\">" << y_label << "</text>\n";

  int legend_y = kMarginT + 14;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      out << fmt(sx(s.x[i])) << "," << fmt(sy(s.y[i])) << " ";
    }
    out << "\"/>\n";
    out << "<line x1=\"" << kMarginL + 10 << "\" y1=\"" << legend_y << "\" x2=\""
        << kMarginL + 34 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kMarginL + 40 << "\" y=\"" << legend_y + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
  out.close();
  std::filesystem::rename(tmp, path);
}

void write_heatmap(const std::filesystem::path& path, const std::string& title,
                   const Eigen::MatrixXd& values,
                   const std::vector<std::string>& tick_labels) {
  const auto n = values.rows();
  const auto m = values.cols();
  const int cell = std::max(6, static_cast<int>(360 / std::max<Eigen::Index>(n, 1)));
  const int w = kMarginL + static_cast<int>(m) * cell + kMarginR;
  const int h = kMarginT + static_cast<int>(n) * cell + kMarginB;

  const auto tmp = path.string() + ".tmp";
  std::ofstream out(tmp, std::ios::trunc);
  if (!out) throw std::runtime_error("write_heatmap: cannot write " + tmp);
  open_svg(out, w, h, title);

  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double v = std::clamp(values(i, j), 0.0, 1.0);
      const int r = static_cast<int>(255 * v);
      const int b = static_cast<int>(255 * (1 - v));
      out << "<rect x=\"" << kMarginL + j * cell << "\" y=\"" << kMarginT + i * cell
          << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << r
          << ",60," << b << ")\"/>\n";
    }
  if (!tick_labels.empty() && static_cast<Eigen::Index>(tick_labels.size()) == n) {
    for (Eigen::Index i = 0; i < n; ++i)
      out << "<text x=\"" << kMarginL - 6 << "\" y=\""
          << kMarginT + i * cell + cell / 2 + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"9\">"
          << tick_labels[static_cast<std::size_t>(i)] << "</text>\n";
  }
  out << "</svg>\n";
  out.close();
  std::filesystem::rename(tmp, path);
}

}  // namespace tactile
