#include "hybridml/report/svg.hpp"

#include "hybridml/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

namespace hybridml::report {

namespace {

constexpr const char* kModule = "report";
constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 70;
constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Linear map from data range to the plot area, with rounded tick marks.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double pixel_lo = 0.0;
  double pixel_hi = 1.0;

  double operator()(double v) const { return pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo); }

  std::vector<double> ticks() const {
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return out;
  }
};

Axis value_axis(double lo, double hi) {
  if (!(hi > lo)) {
    hi = lo + (lo == 0.0 ? 1.0 : std::abs(lo) * 0.1);
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - (lo < 0.0 ? pad : 0.0), hi + pad, kHeight - kBottom, kTop};
}

class Doc {
 public:
  explicit Doc(const std::string& title) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
         << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    text(kWidth / 2, 22, title, "middle", 14);
  }

  void text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 11,
            const char* extra = "") {
    out_ << "<text x=\"" << coord(x) << "\" y=\"" << coord(y) << "\" text-anchor=\"" << anchor << "\" font-size=\""
         << size << "\"" << extra << ">" << escape(s) << "</text>\n";
  }

  void line(double x1, double y1, double x2, double y2, const char* color = "#333", double width = 1) {
    out_ << "<line x1=\"" << coord(x1) << "\" y1=\"" << coord(y1) << "\" x2=\"" << coord(x2) << "\" y2=\""
         << coord(y2) << "\" stroke=\"" << color << "\" stroke-width=\"" << width << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const char* color) {
    out_ << "<rect x=\"" << coord(x) << "\" y=\"" << coord(y) << "\" width=\"" << coord(w) << "\" height=\""
         << coord(h) << "\" fill=\"" << color << "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const char* color) {
    out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) out_ << coord(x) << ',' << coord(y) << ' ';
    out_ << "\"/>\n";
  }

  void value_axis(const Axis& axis, const std::string& label) {
    line(kLeft, kTop, kLeft, kHeight - kBottom);
    line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom);
    for (double t : axis.ticks()) {
      const double y = axis(t);
      line(kLeft - 4, y, kLeft, y);
      text(kLeft - 6, y + 4, num(t), "end");
    }
    const std::string rot = " transform=\"rotate(-90 16 " + coord((kTop + kHeight - kBottom) / 2) + ")\"";
    text(16, (kTop + kHeight - kBottom) / 2, label, "middle", 12, rot.c_str());
  }

  void whisker(double x, double y_lo, double y_hi) {
    line(x, y_lo, x, y_hi, "#c00", 1.2);
    line(x - 4, y_lo, x + 4, y_lo, "#c00", 1.2);
    line(x - 4, y_hi, x + 4, y_hi, "#c00", 1.2);
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

}  // namespace

std::string bar_chart_svg(const std::string& title, const std::string& y_label, const std::vector<Bar>& bars) {
  if (bars.empty()) throw Error(kModule, "bar chart needs at least one bar");
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& b : bars) {
    const double e = finite_or(b.error, 0.0);
    lo = std::min(lo, b.value - e);
    hi = std::max(hi, b.value + e);
  }
  const Axis axis = value_axis(lo, hi);
  Doc doc(title);
  doc.value_axis(axis, y_label);
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    const double x = kLeft + slot * (static_cast<double>(i) + 0.2);
    const double w = slot * 0.6;
    const double y0 = axis(0.0);
    const double y1 = axis(b.value);
    doc.rect(x, std::min(y0, y1), w, std::abs(y1 - y0), kPalette[i % 7]);
    if (std::isfinite(b.error)) doc.whisker(x + w / 2, axis(b.value - b.error), axis(b.value + b.error));
    std::string label = num(b.value);
    if (std::isfinite(b.error)) label += " +/- " + num(b.error);
    doc.text(x + w / 2, std::min(y0, y1) - 6, label);
    doc.text(x + w / 2, kHeight - kBottom + 16, b.label);
  }
  return doc.finish();
}

std::string grouped_bar_svg(const std::string& title, const std::string& y_label,
                            const std::vector<std::string>& series_names, const std::vector<BarGroup>& groups) {
  if (groups.empty() || series_names.empty()) throw Error(kModule, "grouped bar chart needs groups and series");
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& g : groups) {
    if (g.values.size() != series_names.size()) throw Error(kModule, "group '" + g.label + "' has the wrong size");
    for (double v : g.values) {
      lo = std::min(lo, finite_or(v, 0.0));
      hi = std::max(hi, finite_or(v, 0.0));
    }
  }
  const Axis axis = value_axis(lo, hi);
  Doc doc(title);
  doc.value_axis(axis, y_label);
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(groups.size());
  const double bar = slot * 0.8 / static_cast<double>(series_names.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t s = 0; s < series_names.size(); ++s) {
      const double v = finite_or(groups[g].values[s], 0.0);
      const double x = kLeft + slot * static_cast<double>(g) + slot * 0.1 + bar * static_cast<double>(s);
      const double y0 = axis(0.0);
      const double y1 = axis(v);
      doc.rect(x, std::min(y0, y1), bar * 0.9, std::abs(y1 - y0), kPalette[s % 7]);
      doc.text(x + bar * 0.45, std::min(y0, y1) - 4, num(groups[g].values[s]), "middle", 9);
    }
    doc.text(kLeft + slot * (static_cast<double>(g) + 0.5), kHeight - kBottom + 16, groups[g].label, "middle", 10);
  }
  for (std::size_t s = 0; s < series_names.size(); ++s) {
    const double x = kLeft + 10 + 150 * static_cast<double>(s);
    doc.rect(x, kHeight - 28, 10, 10, kPalette[s % 7]);
    doc.text(x + 14, kHeight - 19, series_names[s], "start");
  }
  return doc.finish();
}

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series) {
  double xlo = std::numeric_limits<double>::infinity();
  double xhi = -xlo;
  double ylo = xlo;
  double yhi = -xlo;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || (!s.error.empty() && s.error.size() != s.y.size())) {
      throw Error(kModule, "series '" + s.name + "' has mismatched lengths");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      const double e = s.error.empty() ? 0.0 : finite_or(s.error[i], 0.0);
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i] - e);
      yhi = std::max(yhi, s.y[i] + e);
    }
  }
  if (!std::isfinite(xlo)) throw Error(kModule, "line chart has no finite points");
  if (!(xhi > xlo)) xhi = xlo + 1.0;
  const Axis y_axis = value_axis(std::min(ylo, 0.0), yhi);
  const Axis x_axis{xlo, xhi, kLeft + 10, kWidth - kRight - 10};
  Doc doc(title);
  doc.value_axis(y_axis, y_label);
  for (double t : x_axis.ticks()) {
    doc.line(x_axis(t), kHeight - kBottom, x_axis(t), kHeight - kBottom + 4);
    doc.text(x_axis(t), kHeight - kBottom + 16, num(t));
  }
  doc.text((kLeft + kWidth - kRight) / 2, kHeight - kBottom + 34, x_label, "middle", 12);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      pts.emplace_back(x_axis(s.x[i]), y_axis(s.y[i]));
      if (!s.error.empty() && std::isfinite(s.error[i])) {
        doc.whisker(x_axis(s.x[i]), y_axis(s.y[i] - s.error[i]), y_axis(s.y[i] + s.error[i]));
      }
    }
    doc.polyline(pts, kPalette[k % 7]);
    if (!pts.empty()) {
      std::string extra = " fill=\"" + std::string(kPalette[k % 7]) + "\"";
      doc.text(pts.back().first - 2, pts.back().second - 4, s.name + " " + num(s.y.back()), "end", 9, extra.c_str());
    }
    const double lx = kLeft + 10 + 110 * static_cast<double>(k % 5);
    const double ly = kHeight - 24 + 12 * static_cast<double>(k / 5) - 6;
    doc.rect(lx, ly - 8, 10, 10, kPalette[k % 7]);
    doc.text(lx + 14, ly, s.name, "start", 10);
  }
  return doc.finish();
}

const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> kinds{"fig1", "fig2", "fig3", "fig4"};
  return kinds;
}

std::string plot(const CsvTable& table, const std::string& kind) {
  if (std::find(plot_kinds().begin(), plot_kinds().end(), kind) == plot_kinds().end()) {
    throw Error(kModule, "unknown plot kind '" + kind + "' (valid: fig1, fig2, fig3, fig4)");
  }
  if (table.empty()) throw Error(kModule, "cannot plot an empty " + kind + " table");
  const auto label = table.column(kind == "fig3" ? "row" : (kind == "fig4" ? "seed" : "model"));

  if (kind == "fig1") {
    std::vector<Bar> bars;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      bars.push_back({table.rows[r][label], table.number(r, "test_error_mean"), table.number(r, "test_error_std")});
    }
    return bar_chart_svg("Held-out error by model (mean +/- 1 sd over re-splits)", "misclassification rate", bars);
  }
  if (kind == "fig2") {
    std::vector<Bar> bars;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      bars.push_back({table.rows[r][label], table.number(r, "test_mse"), std::numeric_limits<double>::quiet_NaN()});
    }
    return bar_chart_svg("Test mean squared error: base models vs stack", "MSE", bars);
  }
  if (kind == "fig3") {
    std::vector<BarGroup> groups;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      groups.push_back({table.rows[r][label], {table.number(r, "i_original"), table.number(r, "i_extracted"),
                                               table.number(r, "gain")}});
    }
    return grouped_bar_svg("Mutual information with the target (nats)", "nats", {"original", "extracted", "gain"},
                           groups);
  }
  // fig4: one line per seed plus the across-seed mean with +-1 sd whiskers.
  std::map<std::string, Series> per_seed;
  std::map<double, std::vector<double>> by_iter;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const double ei = table.number(r, "max_ei");
    if (!std::isfinite(ei)) continue;
    const double it = table.number(r, "iteration");
    auto& s = per_seed[table.rows[r][label]];
    s.name = "seed " + table.rows[r][label];
    s.x.push_back(it);
    s.y.push_back(ei);
    by_iter[it].push_back(ei);
  }
  if (per_seed.empty()) throw Error(kModule, "fig4 table has no acquisition steps");
  std::vector<Series> series;
  for (auto& [k, s] : per_seed) series.push_back(std::move(s));
  Series mean{"mean", {}, {}, {}};
  for (const auto& [it, values] : by_iter) {
    double m = 0.0;
    for (double v : values) m += v / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - m) * (v - m) / static_cast<double>(values.size());
    mean.x.push_back(it);
    mean.y.push_back(m);
    mean.error.push_back(std::sqrt(var));
  }
  series.push_back(std::move(mean));
  return line_chart_svg("Maximum expected improvement per iteration", "iteration", "max EI", series);
}

}  // namespace hybridml::report
