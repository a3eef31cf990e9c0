// Command-line front end: single-table testing, batch processing, size/power
// studies driven by a key=value config, and enumeration diagnostics.
//
// Exit codes: 0 success, 1 partial failure (batch lines skipped), 2 usage or
// parse error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "genassoc/asymptotic.hpp"
#include "genassoc/exact.hpp"
#include "genassoc/genetics.hpp"
#include "genassoc/report.hpp"
#include "genassoc/simulate.hpp"
#include "genassoc/statistics.hpp"
#include "genassoc/table.hpp"

namespace {

using namespace genassoc;

// ============================================================================
// Shared option plumbing
// ============================================================================

/// Worker count: explicit --parallel beats GENASSOC_THREADS beats hardware.
int resolve_threads(int cli_value) {
  if (cli_value > 0) return cli_value;
  if (const char* env = std::getenv("GENASSOC_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
      // fall through to hardware default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<StatisticKind> parse_stats_list(const std::string& arg) {
  if (arg == "all") return {kAllStatistics.begin(), kAllStatistics.end()};
  std::vector<StatisticKind> out;
  for (const auto& name : detail::split_list(arg, ',')) {
    const auto kind = parse_statistic_kind(name);
    if (!kind) throw CLI::ValidationError("--stats", "unknown statistic '" + name + "'");
    out.push_back(*kind);
  }
  if (out.empty()) throw CLI::ValidationError("--stats", "empty statistic list");
  return out;
}

struct MethodChoice {
  bool asymptotic = true;
  bool exact = true;
};

MethodChoice parse_method(const std::string& arg) {
  if (arg == "asymptotic") return {true, false};
  if (arg == "exact") return {false, true};
  return {true, true};
}

std::string aborted_token(double threshold) {
  return "ABORTED(>" + format_sig6(threshold) + ")";
}

/// The per-statistic report cells for one table: value, asymptotic p (or the
/// DEGENERATE_FREQS token), exact p (or the ABORTED token).
struct TableCells {
  std::string value, p_asym, p_exact;
};

TableCells compute_cells(const ContingencyTable& z, StatisticKind kind,
                         const MethodChoice& method, const ExactReport* exact_report,
                         const std::optional<double>& abort_threshold) {
  TableCells cells;
  cells.value = format_sig6(evaluate(kind, z));
  if (method.asymptotic) {
    try {
      cells.p_asym = format_sig6(asymptotic_p(kind, z));
    } catch (const DegenerateFreqsError&) {
      cells.p_asym = "DEGENERATE_FREQS";
    }
  }
  if (method.exact && exact_report) {
    const ExactPValue& p = (*exact_report)[kind];
    cells.p_exact = p.aborted() ? aborted_token(*abort_threshold) : format_sig6(p.p());
  }
  return cells;
}

// ============================================================================
// test: one table to stdout
// ============================================================================

int run_test(const std::string& table_arg, const std::string& stats_arg,
             const std::string& method_arg, const std::optional<double>& abort_threshold) {
  ContingencyTable z;
  try {
    z = parse_table(table_arg);
    check_valid(z);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  const auto kinds = parse_stats_list(stats_arg);
  const MethodChoice method = parse_method(method_arg);
  std::optional<ExactReport> exact_report;
  if (method.exact) {
    EnumerationOptions opts;
    opts.abort_threshold = abort_threshold;
    exact_report = exact_p_all(z, opts);
  }
  std::cout << "kind\tvalue";
  if (method.asymptotic) std::cout << "\tp_asym";
  if (method.exact) std::cout << "\tp_exact";
  std::cout << "\n";
  for (StatisticKind kind : kinds) {
    const TableCells cells = compute_cells(
        z, kind, method, exact_report ? &*exact_report : nullptr, abort_threshold);
    std::cout << statistic_name(kind) << '\t' << cells.value;
    if (method.asymptotic) std::cout << '\t' << cells.p_asym;
    if (method.exact) std::cout << '\t' << cells.p_exact;
    std::cout << "\n";
  }
  return 0;
}

// ============================================================================
// batch: CSV lines in, TSV rows out, order-preserving and parallel-safe
// ============================================================================

int run_batch(const std::string& path, const std::string& stats_arg,
              const std::string& method_arg, const std::optional<double>& abort_threshold,
              int threads) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open '" << path << "'\n";
    return 2;
  }
  const auto kinds = parse_stats_list(stats_arg);
  const MethodChoice method = parse_method(method_arg);

  struct Item {
    int lineno;
    ContingencyTable z;
  };
  std::vector<Item> items;
  std::vector<std::string> diagnostics;  // ordered parse failures
  std::string line;
  int lineno = 0;
  std::int64_t max_total = 2;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    try {
      ContingencyTable z = parse_table(stripped);
      check_valid(z);
      max_total = std::max(max_total, z.total());
      items.push_back({lineno, z});
    } catch (const std::exception& err) {
      const bool header_like =
          lineno == 1 && stripped.find_first_not_of("0123456789, \t") != std::string::npos;
      if (header_like) continue;  // tolerate a column-name header line
      diagnostics.push_back("line " + std::to_string(lineno) + ": " + err.what());
    }
  }

  const auto tables = shared_enumeration_tables(max_total);
  EnumerationOptions opts;
  opts.abort_threshold = abort_threshold;
  std::vector<std::string> rows(items.size());
  const auto worker = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const ContingencyTable& z = items[i].z;
      std::ostringstream row;
      row << z.x0 << ',' << z.x1 << ',' << z.x2 << ',' << z.y0 << ',' << z.y1 << ','
          << z.y2;
      std::optional<ExactReport> exact_report;
      if (method.exact)
        exact_report = ExactEnumerator(margins_of(z), tables).exact_p_all(z, opts);
      for (StatisticKind kind : kinds) {
        const TableCells cells = compute_cells(
            z, kind, method, exact_report ? &*exact_report : nullptr, abort_threshold);
        row << '\t' << cells.value;
        if (method.asymptotic) row << '\t' << cells.p_asym;
        if (method.exact) row << '\t' << cells.p_exact;
      }
      rows[i] = row.str();
    }
  };
  const std::size_t used = std::min<std::size_t>(
      static_cast<std::size_t>(std::max(1, resolve_threads(threads))),
      std::max<std::size_t>(items.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < used; ++w)
    pool.emplace_back(worker, items.size() * w / used, items.size() * (w + 1) / used);
  worker(0, items.size() / used);
  for (auto& th : pool) th.join();

  std::cout << "# table";
  for (StatisticKind kind : kinds) {
    std::cout << '\t' << statistic_name(kind);
    if (method.asymptotic) std::cout << '\t' << statistic_name(kind) << "_pa";
    if (method.exact) std::cout << '\t' << statistic_name(kind) << "_pe";
  }
  std::cout << "\n";
  for (const std::string& row : rows) std::cout << row << "\n";
  for (const std::string& d : diagnostics) std::cerr << d << "\n";
  return diagnostics.empty() ? 0 : 1;
}

// ============================================================================
// size / power: config-driven study grids
// ============================================================================

struct StudyOverrides {
  std::string output;
  std::int64_t replicates = 0;  // 0 = no override
  std::optional<std::uint64_t> seed;
};

int run_study(const std::string& config_path, bool null_size, const std::string& format,
              bool scaled, int threads, const StudyOverrides& over) {
  StudyConfig cfg;
  try {
    std::ifstream in(config_path);
    if (!in) throw std::invalid_argument("cannot open '" + config_path + "'");
    cfg = parse_study_config(in);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  if (!over.output.empty()) cfg.output = over.output;
  if (over.replicates > 0) cfg.replicates = over.replicates;
  if (over.seed) cfg.seed = *over.seed;

  std::ofstream file_out;
  if (!cfg.output.empty()) {
    file_out.open(cfg.output);
    if (!file_out) {
      std::cerr << "error: cannot open output '" << cfg.output << "'\n";
      return 2;
    }
  }
  std::ostream& out = cfg.output.empty() ? std::cout : file_out;

  // The null study fixes lambda2 = 1, which makes delta irrelevant; power
  // runs the full delta x lambda2 grid.
  std::vector<std::pair<double, double>> model_grid;
  if (null_size) {
    model_grid.emplace_back(0.0, 1.0);
  } else {
    for (double d : cfg.delta)
      for (double l2 : cfg.lambda2) model_grid.emplace_back(d, l2);
  }
  const bool want_scaled = null_size || scaled;
  const int workers = resolve_threads(threads);

  for (const auto& [n1, n2] : cfg.designs)
    for (const auto& [delta, lambda2] : model_grid) {
      StudyDesign design;
      design.n1 = n1;
      design.n2 = n2;
      design.spec = {cfg.k, cfg.maf, delta, lambda2};
      design.replicates = cfg.replicates;
      design.alphas = cfg.alphas;
      design.seed = cfg.seed;
      design.abort_threshold = cfg.abort_threshold;
      try {
        const PowerEstimate est = estimate_power(design, workers);
        if (format == "jsonl")
          write_power_jsonl(out, design, est, want_scaled);
        else
          write_power_tsv(out, design, est, want_scaled);
      } catch (const PenetranceOverflowError& err) {
        std::cerr << "skipped cell " << describe_cell(design) << ": " << err.what() << "\n";
      }
    }
  return 0;
}

// ============================================================================
// maxcount / enumerate: diagnostics
// ============================================================================

int run_maxcount(std::int64_t n1, std::int64_t n2) {
  if (n1 < 1 || n2 < 1) {
    std::cerr << "error: maxcount requires n1 >= 1 and n2 >= 1\n";
    return 2;
  }
  std::cout << max_summands(n1, n2) << "\n";
  return 0;
}

int run_enumerate(const std::string& margins_arg, std::int64_t n1) {
  Margins m{};
  try {
    const auto parts = detail::split_list(margins_arg, ',');
    if (parts.size() != 3)
      throw std::invalid_argument("margins must be m0,m1,m2, got '" + margins_arg + "'");
    m.m0 = detail::parse_int(parts[0]);
    m.m1 = detail::parse_int(parts[1]);
    m.m2 = detail::parse_int(parts[2]);
    m.n1 = n1;
    m.n2 = m.m0 + m.m1 + m.m2 - n1;
    if (m.m0 < 0 || m.m1 < 0 || m.m2 < 0 || m.n1 < 1 || m.n2 < 1)
      throw std::invalid_argument("margins infeasible with n1=" + std::to_string(n1));
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  const auto tables = shared_enumeration_tables(m.total());
  std::cout << "# x0\tx1\tx2\tprob\n";
  double total = 0.0;
  for_each_table(m, [&](const ContingencyTable& z) {
    const double p = hypergeometric_prob(z, tables->lf);
    total += p;
    std::cout << z.x0 << '\t' << z.x1 << '\t' << z.x2 << '\t' << format_sig6(p) << "\n";
  });
  std::cout << "# total\t" << format_sig6(total) << "\n";
  return 0;
}

}  // namespace

// ============================================================================
// main
// ============================================================================

int main(int argc, char** argv) {
  CLI::App app{"Robust association tests for 2x3 case-control genotype tables"};
  app.require_subcommand(1);

  // --- test ---
  auto* test = app.add_subcommand("test", "Statistics and p-values for one table");
  std::string test_table, test_stats = "all", test_method = "both";
  double test_abort = 0.0;
  bool test_no_abort = false;
  test->add_option("table", test_table, "Table as x0,x1,x2,y0,y1,y2 (cases first)")
      ->required();
  test->add_option("--stats", test_stats,
                   "Comma list of catt_half,pearson,min2,max3,cmax,clrt,mert, or 'all'");
  test->add_option("--method", test_method, "P-value method")
      ->check(CLI::IsMember({"asymptotic", "exact", "both"}));
  auto* test_abort_opt =
      test->add_option("--abort", test_abort, "Abort enumeration once p > threshold");
  test->add_flag("--no-abort", test_no_abort, "Force full enumeration (default)")
      ->excludes(test_abort_opt);

  // --- batch ---
  auto* batch = app.add_subcommand("batch", "Process a file of tables, one TSV row each");
  std::string batch_path, batch_stats = "all", batch_method = "both";
  double batch_abort = 0.0;
  bool batch_no_abort = false;
  int batch_threads = 0;
  batch->add_option("input", batch_path, "File of CSV table lines")->required();
  batch->add_option("--stats", batch_stats, "Statistic selection as in 'test'");
  batch->add_option("--method", batch_method, "P-value method")
      ->check(CLI::IsMember({"asymptotic", "exact", "both"}));
  auto* batch_abort_opt =
      batch->add_option("--abort", batch_abort, "Abort enumeration once p > threshold");
  batch->add_flag("--no-abort", batch_no_abort, "Force full enumeration (default)")
      ->excludes(batch_abort_opt);
  batch->add_option("--parallel", batch_threads, "Worker threads (default: GENASSOC_THREADS)");

  // --- size / power ---
  const auto add_study = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    return cmd;
  };
  auto* size = add_study("size", "Null test-size study from a config (lambda2 = 1)");
  auto* power = add_study("power", "Power study over the config's delta x lambda2 grid");
  std::string size_config, power_config, size_format = "tsv", power_format = "tsv";
  std::string size_output, power_output;
  std::int64_t size_replicates = 0, power_replicates = 0;
  std::int64_t size_seed = -1, power_seed = -1;
  bool power_scaled = false;
  int size_threads = 0, power_threads = 0;
  size->add_option("config", size_config, "Study config file")->required();
  size->add_option("--format", size_format)->check(CLI::IsMember({"tsv", "jsonl"}));
  size->add_option("--output", size_output, "Override the config output path");
  size->add_option("--replicates", size_replicates, "Override the replicate count");
  size->add_option("--seed", size_seed, "Override the seed");
  size->add_option("--parallel", size_threads, "Worker threads");
  power->add_option("config", power_config, "Study config file")->required();
  power->add_option("--format", power_format)->check(CLI::IsMember({"tsv", "jsonl"}));
  power->add_flag("--scaled", power_scaled, "Add the power * 5/alpha column");
  power->add_option("--output", power_output, "Override the config output path");
  power->add_option("--replicates", power_replicates, "Override the replicate count");
  power->add_option("--seed", power_seed, "Override the seed");
  power->add_option("--parallel", power_threads, "Worker threads");

  // --- maxcount / enumerate ---
  auto* maxcount = app.add_subcommand("maxcount", "Largest enumeration size for row totals");
  std::int64_t mc_n1 = 0, mc_n2 = 0;
  maxcount->add_option("n1", mc_n1, "Case total")->required();
  maxcount->add_option("n2", mc_n2, "Control total")->required();
  auto* enumerate = app.add_subcommand("enumerate", "List all tables for fixed margins");
  std::string en_margins;
  std::int64_t en_n1 = 0;
  enumerate->add_option("margins", en_margins, "Column margins m0,m1,m2")->required();
  enumerate->add_option("--n1", en_n1, "Case row total")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*test)
      return run_test(test_table, test_stats, test_method,
                      test_abort_opt->count() ? std::optional<double>(test_abort)
                                              : std::nullopt);
    if (*batch)
      return run_batch(batch_path, batch_stats, batch_method,
                       batch_abort_opt->count() ? std::optional<double>(batch_abort)
                                                : std::nullopt,
                       batch_threads);
    if (*size) {
      StudyOverrides over{size_output, size_replicates,
                          size_seed >= 0 ? std::optional<std::uint64_t>(
                                               static_cast<std::uint64_t>(size_seed))
                                         : std::nullopt};
      return run_study(size_config, true, size_format, false, size_threads, over);
    }
    if (*power) {
      StudyOverrides over{power_output, power_replicates,
                          power_seed >= 0 ? std::optional<std::uint64_t>(
                                                static_cast<std::uint64_t>(power_seed))
                                          : std::nullopt};
      return run_study(power_config, false, power_format, power_scaled, power_threads, over);
    }
    if (*maxcount) return run_maxcount(mc_n1, mc_n2);
    if (*enumerate) return run_enumerate(en_margins, en_n1);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
