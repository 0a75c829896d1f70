#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "errors.hpp"

namespace ppnav {

using json = nlohmann::ordered_json;

inline constexpr const char* report_schema = "ppnav.report/1";

// JSON has no inf/nan; they travel as strings and come back as doubles.
inline json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

inline double num_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>());
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw InputError("expected a number in report JSON");
}

struct Estimate {
  std::string name;
  double value = 0.0;
  double se = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  std::size_t n = 0;
};

struct RegressionEntry {
  std::string name;
  double slope = 0.0, intercept = 0.0, slope_se = 0.0, r2 = 0.0;
  std::size_t n = 0;
};

struct Reference {
  std::string name;
  double value = 0.0;
  std::string source;  // analytic operation that produced it
};

// observed vs reference under a declared rule:
//   rel: |obs/ref - 1| <= tol; abs: |obs - ref| <= tol; le: obs <= ref; ge: obs >= ref;
//   range: ref <= obs <= tol; true: obs != 0
struct Comparison {
  std::string name;
  std::string rule;
  double observed = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  std::string source;
  bool pass = false;
};

inline bool evaluate_rule(const std::string& rule, double obs, double ref, double tol) {
  if (!std::isfinite(obs) && rule != "true") return false;
  if (rule == "rel") return std::fabs(obs / ref - 1.0) <= tol;
  if (rule == "abs") return std::fabs(obs - ref) <= tol;
  if (rule == "le") return obs <= ref;
  if (rule == "ge") return obs >= ref;
  if (rule == "range") return obs >= ref && obs <= tol;
  if (rule == "true") return obs != 0.0;
  throw InputError("unknown comparison rule '" + rule + "'");
}

struct Curve {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct EstimateReport {
  std::string op;
  std::vector<Estimate> estimates;
  std::vector<RegressionEntry> regressions;
  std::vector<Reference> references;
  std::vector<Comparison> comparisons;
  std::vector<Curve> curves;
  json provenance = json::object();
  json info = json::object();

  Estimate& estimate(std::string name, double value, double se = 0.0, std::size_t n = 0) {
    Estimate e{std::move(name), value, se, value - 1.96 * se, value + 1.96 * se, n};
    estimates.push_back(e);
    return estimates.back();
  }

  void reference(std::string name, double value, std::string source) {
    references.push_back({std::move(name), value, std::move(source)});
  }

  bool compare(std::string name, std::string rule, double obs, double ref, double tol, std::string source) {
    const bool ok = evaluate_rule(rule, obs, ref, tol);
    comparisons.push_back({std::move(name), std::move(rule), obs, ref, tol, std::move(source), ok});
    return ok;
  }

  bool all_pass() const {
    for (const auto& c : comparisons)
      if (!c.pass) return false;
    return true;
  }

  const Comparison* find(const std::string& name) const {
    for (const auto& c : comparisons)
      if (c.name == name) return &c;
    return nullptr;
  }
};

inline json to_json(const EstimateReport& r) {
  json j;
  j["schema"] = report_schema;
  j["op"] = r.op;
  j["pass"] = r.all_pass();
  j["estimates"] = json::array();
  for (const auto& e : r.estimates)
    j["estimates"].push_back({{"name", e.name}, {"value", num(e.value)}, {"se", num(e.se)},
                              {"ci", {num(e.ci_lo), num(e.ci_hi)}}, {"n", e.n}});
  j["regressions"] = json::array();
  for (const auto& g : r.regressions)
    j["regressions"].push_back({{"name", g.name}, {"slope", num(g.slope)}, {"intercept", num(g.intercept)},
                                {"slope_se", num(g.slope_se)}, {"r2", num(g.r2)}, {"n", g.n}});
  j["references"] = json::array();
  for (const auto& f : r.references)
    j["references"].push_back({{"name", f.name}, {"value", num(f.value)}, {"source", f.source}});
  j["comparisons"] = json::array();
  for (const auto& c : r.comparisons)
    j["comparisons"].push_back({{"name", c.name}, {"rule", c.rule}, {"observed", num(c.observed)},
                                {"reference", num(c.reference)}, {"tolerance", num(c.tolerance)},
                                {"source", c.source}, {"pass", c.pass}});
  j["curves"] = json::array();
  for (const auto& c : r.curves) {
    json rows = json::array();
    for (const auto& row : c.rows) {
      json jr = json::array();
      for (double v : row) jr.push_back(num(v));
      rows.push_back(jr);
    }
    j["curves"].push_back({{"name", c.name}, {"columns", c.columns}, {"rows", rows}});
  }
  j["provenance"] = r.provenance;
  j["info"] = r.info;
  return j;
}

inline EstimateReport report_from_json(const json& j) {
  if (j.value("schema", "") != report_schema) throw InputError("not a report with schema " + std::string(report_schema));
  EstimateReport r;
  r.op = j.at("op").get<std::string>();
  for (const auto& e : j.at("estimates"))
    r.estimates.push_back({e.at("name").get<std::string>(), num_from(e.at("value")), num_from(e.at("se")),
                           num_from(e.at("ci").at(0)), num_from(e.at("ci").at(1)), e.at("n").get<std::size_t>()});
  for (const auto& g : j.at("regressions"))
    r.regressions.push_back({g.at("name").get<std::string>(), num_from(g.at("slope")), num_from(g.at("intercept")),
                             num_from(g.at("slope_se")), num_from(g.at("r2")), g.at("n").get<std::size_t>()});
  for (const auto& f : j.at("references"))
    r.references.push_back({f.at("name").get<std::string>(), num_from(f.at("value")), f.at("source").get<std::string>()});
  for (const auto& c : j.at("comparisons"))
    r.comparisons.push_back({c.at("name").get<std::string>(), c.at("rule").get<std::string>(),
                             num_from(c.at("observed")), num_from(c.at("reference")), num_from(c.at("tolerance")),
                             c.at("source").get<std::string>(), c.at("pass").get<bool>()});
  for (const auto& c : j.at("curves")) {
    Curve cv;
    cv.name = c.at("name").get<std::string>();
    cv.columns = c.at("columns").get<std::vector<std::string>>();
    for (const auto& row : c.at("rows")) {
      std::vector<double> v;
      for (const auto& x : row) v.push_back(num_from(x));
      cv.rows.push_back(std::move(v));
    }
    r.curves.push_back(std::move(cv));
  }
  r.provenance = j.at("provenance");
  r.info = j.at("info");
  return r;
}

inline std::string dump_report(const EstimateReport& r) { return to_json(r).dump(2) + "\n"; }

inline void write_curve_csv(std::ostream& os, const Curve& c) {
  CsvWriter w(os);
  for (const auto& col : c.columns) w.field(col);
  w.end_row();
  for (const auto& row : c.rows) {
    for (double v : row) w.field(v);
    w.end_row();
  }
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw RuntimeFailure("cannot write " + p.string());
  f << text;
  if (!f) throw RuntimeFailure("write failed for " + p.string());
}

// Writes <stem>.json plus <stem>.<curve>.csv per curve; returns the paths.
inline std::vector<std::filesystem::path> emit_report(const EstimateReport& r, const std::filesystem::path& dir,
                                                      const std::string& stem, bool csv = true) {
  std::vector<std::filesystem::path> out;
  const auto jp = dir / (stem + ".json");
  write_text_file(jp, dump_report(r));
  out.push_back(jp);
  if (csv)
    for (const auto& c : r.curves) {
      std::ostringstream os;
      write_curve_csv(os, c);
      const auto cp = dir / (stem + "." + c.name + ".csv");
      write_text_file(cp, os.str());
      out.push_back(cp);
    }
  return out;
}

}  // namespace ppnav
