#pragma once
// Output formatting and study configuration: the fixed numeric format that
// keeps golden files stable, the flat key=value config for size/power grids,
// and the TSV / JSON-lines emitters for power estimates.

#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "genassoc/genetics.hpp"
#include "genassoc/simulate.hpp"
#include "genassoc/statistics.hpp"

namespace genassoc {

// ============================================================================
// Numeric formatting
// ============================================================================

/// Fixed decimal format for every emitted numeric: 6 significant digits,
/// scientific notation below 1e-4 (the %g rule), so outputs are stable for
/// golden-file comparison.
inline std::string format_sig6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ============================================================================
// Study configuration
// ============================================================================

/// Grid configuration for size/power studies: sample-size pairs, the
/// heterozygote-position and homozygote-risk grids, shared model scalars,
/// significance levels, replicate count, seed, optional output path and
/// optional abort-threshold override.
struct StudyConfig {
  std::vector<std::pair<std::int64_t, std::int64_t>> designs = {{500, 500}};
  std::vector<double> delta = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> lambda2 = {1.1, 1.2, 1.5, 2.0};
  double k = 0.1;
  double maf = 0.1;
  std::vector<double> alphas = {0.05, 0.01, 0.001};
  std::int64_t replicates = 1000000;
  std::uint64_t seed = 0;
  std::string output{};  // empty = stdout
  std::optional<double> abort_threshold{};
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

inline double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("trailing characters in number: '" + s + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& s) {
  std::size_t used = 0;
  std::int64_t v;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  if (used != s.size())
    throw std::invalid_argument("trailing characters in integer: '" + s + "'");
  return v;
}

inline std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s, ',')) out.push_back(parse_real(item));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

}  // namespace detail

/// Parses the flat key=value study configuration.  '#' starts a comment;
/// list values are comma-separated; designs are n1:n2 pairs.  Unknown keys
/// are errors so typos cannot silently fall back to defaults.
inline StudyConfig parse_study_config(std::istream& in) {
  StudyConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    try {
      if (key == "designs") {
        cfg.designs.clear();
        for (const auto& item : detail::split_list(value, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string::npos)
            throw std::invalid_argument("design must be n1:n2, got '" + item + "'");
          cfg.designs.emplace_back(detail::parse_int(detail::trim(item.substr(0, colon))),
                                   detail::parse_int(detail::trim(item.substr(colon + 1))));
        }
        if (cfg.designs.empty()) throw std::invalid_argument("empty design list");
      } else if (key == "delta") {
        cfg.delta = detail::parse_real_list(value);
      } else if (key == "lambda2") {
        cfg.lambda2 = detail::parse_real_list(value);
      } else if (key == "k") {
        cfg.k = detail::parse_real(value);
      } else if (key == "maf") {
        cfg.maf = detail::parse_real(value);
      } else if (key == "alphas") {
        cfg.alphas = detail::parse_real_list(value);
      } else if (key == "replicates") {
        cfg.replicates = detail::parse_int(value);
      } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(detail::parse_int(value));
      } else if (key == "output") {
        cfg.output = value;
      } else if (key == "abort") {
        cfg.abort_threshold = detail::parse_real(value);
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& err) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + err.what());
    }
  }
  return cfg;
}

// ============================================================================
// Power-estimate emitters
// ============================================================================

/// Header naming one grid cell; written as a comment above each TSV block.
inline std::string describe_cell(const StudyDesign& d) {
  std::ostringstream out;
  out << "n1=" << d.n1 << " n2=" << d.n2 << " delta=" << format_sig6(d.spec.delta)
      << " lambda2=" << format_sig6(d.spec.lambda2) << " k=" << format_sig6(d.spec.k)
      << " maf=" << format_sig6(d.spec.maf) << " replicates=" << d.replicates
      << " seed=" << d.seed;
  return out.str();
}

/// TSV block for one grid cell: a '#' cell-description comment, a column
/// header, then one row per (kind, method, alpha).  With scaled=true an extra
/// column reports power * 5/alpha, the null-table display convention.
inline void write_power_tsv(std::ostream& out, const StudyDesign& design,
                            const PowerEstimate& est, bool scaled, bool with_header = true) {
  out << "# " << describe_cell(design) << "\n";
  if (with_header) {
    out << "kind\tmethod\talpha\thits\tb\tpower\tci_half";
    if (scaled) out << "\tscaled";
    out << "\n";
  }
  for (StatisticKind k : kAllStatistics)
    for (Method m : kAllMethods)
      for (std::size_t a = 0; a < est.alphas.size(); ++a) {
        out << statistic_name(k) << '\t' << method_name(m) << '\t'
            << format_sig6(est.alphas[a]) << '\t' << est.hit_count(k, m, a) << '\t' << est.b
            << '\t' << format_sig6(est.power(k, m, a)) << '\t'
            << format_sig6(est.ci_half(k, m, a));
        if (scaled) out << '\t' << format_sig6(est.power(k, m, a) * 5.0 / est.alphas[a]);
        out << "\n";
      }
}

/// JSON-lines variant: one self-contained object per (kind, method, alpha).
inline void write_power_jsonl(std::ostream& out, const StudyDesign& design,
                              const PowerEstimate& est, bool scaled) {
  for (StatisticKind k : kAllStatistics)
    for (Method m : kAllMethods)
      for (std::size_t a = 0; a < est.alphas.size(); ++a) {
        nlohmann::json row;
        row["n1"] = design.n1;
        row["n2"] = design.n2;
        row["delta"] = design.spec.delta;
        row["lambda2"] = design.spec.lambda2;
        row["k"] = design.spec.k;
        row["maf"] = design.spec.maf;
        row["seed"] = design.seed;
        row["kind"] = statistic_name(k);
        row["method"] = method_name(m);
        row["alpha"] = est.alphas[a];
        row["hits"] = est.hit_count(k, m, a);
        row["b"] = est.b;
        row["power"] = est.power(k, m, a);
        row["ci_half"] = est.ci_half(k, m, a);
        if (scaled) row["scaled"] = est.power(k, m, a) * 5.0 / est.alphas[a];
        out << row.dump() << "\n";
      }
}

}  // namespace genassoc
