#pragma once

// Experiment reports: one JSON document, a CSV per table and an SVG per
// log-log ladder. No timestamps or host data, so reruns are byte-identical.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "holderlab/error.hpp"
#include "holderlab/norms/regression.hpp"

namespace holderlab::lab {

inline constexpr const char* kToolVersion = "holderlab 1.0.0";

struct Check {
  std::string name;
  double value = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool passed() const { return value >= lo && value <= hi; }
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

namespace detail {

// Shortest round-trip text for a double; JSON has no inf/nan so they become strings.
inline nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw Error("report: cannot write " + path.string());
}

}  // namespace detail

/// Self-contained log-log line plot of y against x.
inline std::string svg_loglog(const ScalingReport& r) {
  const double W = 480, H = 320, L = 60, R = 20, T = 30, B = 45;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    if (r.x[i] > 0 && r.y[i] > 0) {
      lx.push_back(std::log10(r.x[i]));
      ly.push_back(std::log10(r.y[i]));
    }
  }
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << L << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" << r.quantity
     << ": slope " << r.slope << " (target " << r.target << ")</text>\n";
  if (lx.size() >= 2) {
    const auto [x0, x1] = std::minmax_element(lx.begin(), lx.end());
    const auto [y0, y1] = std::minmax_element(ly.begin(), ly.end());
    const double ax = *x0, bx = std::max(*x1, ax + 1e-12), ay = *y0, by = std::max(*y1, ay + 1e-12);
    auto px = [&](double v) { return L + (v - ax) / (bx - ax) * (W - L - R); };
    auto py = [&](double v) { return H - B - (v - ay) / (by - ay) * (H - T - B); };
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < lx.size(); ++i) os << (i ? " " : "") << px(lx[i]) << ',' << py(ly[i]);
    os << "\"/>\n";
    for (std::size_t i = 0; i < lx.size(); ++i)
      os << "<circle cx=\"" << px(lx[i]) << "\" cy=\"" << py(ly[i]) << "\" r=\"3\" fill=\"steelblue\"/>\n";
    // fitted line
    os << "<line x1=\"" << px(ax) << "\" y1=\"" << py((r.slope * ax * std::log(10.0) + r.intercept) / std::log(10.0))
       << "\" x2=\"" << px(bx) << "\" y2=\"" << py((r.slope * bx * std::log(10.0) + r.intercept) / std::log(10.0))
       << "\" stroke=\"tomato\" stroke-dasharray=\"4 3\"/>\n";
    os << "<text x=\"" << L << "\" y=\"" << H - 12 << "\" font-family=\"sans-serif\" font-size=\"11\">log10 x: "
       << ax << " .. " << bx << "   log10 y: " << ay << " .. " << by << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

class Report {
 public:
  Report(std::string experiment, std::uint64_t seed, nlohmann::ordered_json config)
      : experiment_(std::move(experiment)) {
    doc_["tool"] = kToolVersion;
    doc_["experiment"] = experiment_;
    doc_["seed"] = seed;
    doc_["config"] = std::move(config);
    doc_["results"] = nlohmann::ordered_json::object();
  }

  void result(const std::string& key, double v) { doc_["results"][key] = detail::number(v); }
  void result(const std::string& key, const std::string& v) { doc_["results"][key] = v; }
  void result(const std::string& key, const char* v) { doc_["results"][key] = std::string(v); }
  void result(const std::string& key, nlohmann::ordered_json v) { doc_["results"][key] = std::move(v); }

  /// Adds a scaling report: JSON summary, CSV rung table and an SVG plot.
  void scaling(const ScalingReport& r, const std::string& x_name = "x", const std::string& y_name = "y") {
    nlohmann::ordered_json j;
    j["quantity"] = r.quantity;
    j["target_slope"] = detail::number(r.target);
    j["slope"] = detail::number(r.slope);
    j["intercept"] = detail::number(r.intercept);
    j["r_squared"] = detail::number(r.r_squared);
    auto rungs = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.x.size(); ++i)
      rungs.push_back({{x_name, detail::number(r.x[i])}, {y_name, detail::number(r.y[i])}});
    j["rungs"] = rungs;
    doc_["scaling"].push_back(j);
    Table t{"ladder_" + r.quantity, {x_name, y_name}, {}};
    for (std::size_t i = 0; i < r.x.size(); ++i) t.rows.push_back({r.x[i], r.y[i]});
    tables_.push_back(std::move(t));
    plots_.push_back(r);
  }

  void table(Table t) { tables_.push_back(std::move(t)); }

  void check(const std::string& name, double value, double lo, double hi) {
    checks_.push_back({name, value, lo, hi});
  }

  bool passed() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.passed(); });
  }
  const std::vector<Check>& checks() const { return checks_; }

  nlohmann::ordered_json json() const {
    auto d = doc_;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : checks_) {
      arr.push_back({{"name", c.name},
                     {"value", detail::number(c.value)},
                     {"min", detail::number(c.lo)},
                     {"max", detail::number(c.hi)},
                     {"passed", c.passed()}});
    }
    d["acceptance"] = {{"passed", passed()}, {"checks", arr}};
    d["files"] = files();
    return d;
  }

  std::vector<std::string> files() const {
    std::vector<std::string> f{"report.json"};
    for (const auto& t : tables_) f.push_back(t.name + ".csv");
    if (plots_enabled_)
      for (const auto& p : plots_) f.push_back("ladder_" + p.quantity + ".svg");
    return f;
  }

  void set_plots(bool on) { plots_enabled_ = on; }

  void write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    detail::write_text(dir / "report.json", json().dump(2) + "\n");
    for (const auto& t : tables_) {
      std::ostringstream os;
      for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
      os << '\n';
      for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << detail::csv_number(row[c]);
        os << '\n';
      }
      detail::write_text(dir / (t.name + ".csv"), os.str());
    }
    if (plots_enabled_)
      for (const auto& p : plots_) detail::write_text(dir / ("ladder_" + p.quantity + ".svg"), svg_loglog(p));
  }

 private:
  std::string experiment_;
  nlohmann::ordered_json doc_;
  std::vector<Table> tables_;
  std::vector<ScalingReport> plots_;
  std::vector<Check> checks_;
  bool plots_enabled_ = true;
};

}  // namespace holderlab::lab
