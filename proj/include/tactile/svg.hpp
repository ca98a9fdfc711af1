#ifndef TACTILE_SVG_HPP
#define TACTILE_SVG_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tactile {

// Minimal deterministic SVG plotting; enough for the report figures.

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series);

void write_heatmap(const std::filesystem::path& path, const std::string& title,
                   const Eigen::MatrixXd& values,
                   const std::vector<std::string>& tick_labels);

}  // namespace tactile

#endif  // TACTILE_SVG_HPP
