#pragma once

#include "hybridml/report/csv.hpp"

#include <string>
#include <vector>

namespace hybridml::report {

struct Bar {
  std::string label;
  double value = 0.0;
  /// Half-length of the whisker; NaN draws none.
  double error = 0.0;
};

struct BarGroup {
  std::string label;
  std::vector<double> values;
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  /// Optional whisker half-lengths, same length as y.
  std::vector<double> error;
};

/// Self-contained SVG documents; every plotted number is also written as a text label.
std::string bar_chart_svg(const std::string& title, const std::string& y_label, const std::vector<Bar>& bars);
std::string grouped_bar_svg(const std::string& title, const std::string& y_label,
                            const std::vector<std::string>& series_names, const std::vector<BarGroup>& groups);
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

/// Valid plot kinds: fig1, fig2, fig3, fig4.
const std::vector<std::string>& plot_kinds();

/// Renders one of the experiment tables. Throws on an empty table or an unknown kind.
std::string plot(const CsvTable& table, const std::string& kind);

}  // namespace hybridml::report
