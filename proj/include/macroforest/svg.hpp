#pragma once

#include <string>
#include <vector>

#include "macroforest/common.hpp"

namespace macroforest {

// Minimal static plots: one polyline or one bar row per chart, fixed layout,
// deterministic output bytes.
std::string svg_line_plot(const std::vector<double>& x,
                          const std::vector<double>& y,
                          const std::string& title,
                          const std::string& x_label,
                          const std::string& y_label);

std::string svg_multi_line_plot(const std::vector<double>& x,
                                const std::vector<std::vector<double>>& series,
                                const std::vector<std::string>& series_names,
                                const std::string& title,
                                const std::string& x_label,
                                const std::string& y_label);

std::string svg_bar_plot(const std::vector<std::string>& labels,
                         const std::vector<double>& values,
                         const std::string& title);

}  // namespace macroforest
