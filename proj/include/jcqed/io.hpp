#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "jcqed/config.hpp"
#include "jcqed/errors.hpp"
#include "jcqed/model.hpp"
#include "jcqed/quasiprob.hpp"

namespace jcqed {

/// Column-oriented numeric table; every row has one value per column.
struct CsvTable {
  std::string task;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) {
    if (row.size() != columns.size()) detail::fail_domain("csv row width does not match the header");
    rows.push_back(std::move(row));
  }
};

/// Header comment naming the task and schema version, then the column line, then rows at
/// full precision. No timestamps, so reruns are byte-identical.
inline std::string format_csv(const CsvTable& t) {
  std::string out = "# jcqed " + t.task + " csv v" + std::to_string(kCsvSchemaVersion) + "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += detail::format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) detail::fail_domain("cannot write '" + path.string() + "'");
  f << text;
  if (!f) detail::fail_domain("write failed for '" + path.string() + "'");
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) { write_text(path, format_csv(t)); }

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

inline nlohmann::json params_json(const ModelParams& p) {
  return {{"g", p.g},
          {"kappa", p.kappa},
          {"gamma", p.gamma},
          {"drive_re", p.drive.real()},
          {"drive_im", p.drive.imag()},
          {"n_max", p.n_max},
          {"hilbert_dim", p.hilbert_dim()}};
}

/// Metadata common to every task. `config` holds the resolved key/value set, so feeding the
/// file back through --config reproduces the run.
inline nlohmann::json run_metadata(const ScenarioConfig& c) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["csv_schema"] = kCsvSchemaVersion;
  j["task"] = c.task;
  j["config"] = c.to_json();
  j["params"] = params_json(c.params());
  j["tolerances"] = {{"rtol", c.rtol}, {"atol", c.atol}};
  return j;
}

inline CsvTable qgrid_table(const QGrid& q) {
  CsvTable t{"qfunc", {"x", "y", "Q"}, {}};
  t.rows.reserve(q.x.size() * q.y.size());
  for (std::size_t j = 0; j < q.y.size(); ++j) {
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      t.rows.push_back({q.x[i], q.y[j], q.values(static_cast<Index>(j), static_cast<Index>(i))});
    }
  }
  return t;
}

inline nlohmann::json qgrid_json(const QGrid& q) {
  nlohmann::json peaks = nlohmann::json::array();
  for (const auto& p : q.peaks) peaks.push_back({{"x", p.x}, {"y", p.y}, {"height", p.height}});
  return {{"grid",
           {{"x_min", q.spec.x_min},
            {"x_max", q.spec.x_max},
            {"nx", q.spec.nx},
            {"y_min", q.spec.y_min},
            {"y_max", q.spec.y_max},
            {"ny", q.spec.ny},
            {"dx", q.dx()},
            {"dy", q.dy()}}},
          {"time", q.time},
          {"integral", q.integral},
          {"max", q.max_value},
          {"min", q.min_value},
          {"peaks", peaks}};
}

/// Plot scripts are written next to the data; rendering only happens when gnuplot is on PATH,
/// so nothing else depends on it.
inline bool write_plot(const std::filesystem::path& dir, const std::string& stem, const std::string& body) {
  const auto script = dir / (stem + ".gp");
  write_text(script, "set terminal pngcairo size 900,650\nset output '" + stem + ".png'\nset datafile separator ','\n" +
                         body + "\n");
  if (std::system("command -v gnuplot >/dev/null 2>&1") != 0) return false;
  const std::string cmd = "cd '" + dir.string() + "' && gnuplot '" + stem + ".gp' >/dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

}  // namespace jcqed
