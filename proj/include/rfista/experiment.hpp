#pragma once

// Batch experiments over randomized problem families: every trial draws an
// instance, computes oracle values once, runs each selected restart scheme
// from r_0 = 0 and keeps the full traces. Results are aggregated into
// per-scheme iteration statistics and written as CSV.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfista/lasso.hpp"
#include "rfista/restart.hpp"

namespace rfista {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  Family family = Family::Lasso;
  std::size_t rows = 600;
  std::size_t cols = 800;
  double alpha = 0.01;
  /// Unset: 0.9 for the lasso family, 0 (dense, full rank) for quadratic.
  std::optional<double> sparsity;
  std::size_t trials = 100;
  std::vector<Scheme> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
  double epsilon = 1e-11;
  double oracle_epsilon = 1e-12;
  std::filesystem::path out = "results";
  std::size_t jobs = 1;
  std::uint64_t seed = 1;  // trial i uses seed + i
  bool strict_exit = false;
  std::size_t k_min = 0;
  std::size_t budget = 10'000'000;

  double resolved_sparsity() const;

  /// Throws ConfigError.
  void validate() const;
};

/// Sets one key. Keys: family, rows (alias N), cols (alias n), alpha,
/// sparsity, trials, schemes (comma list), epsilon, oracle_epsilon, out,
/// jobs, seed, strict_exit, k_min, budget. Throws ConfigError.
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

/// Flat `key = value` document; `#` starts a comment. Throws ConfigError.
std::map<std::string, std::string> parse_config(std::istream& is);
std::map<std::string, std::string> load_config_file(const std::filesystem::path& path);

struct SchemeRun {
  Scheme scheme = Scheme::Lcr;
  RestartTrace trace;
  double f_final = 0.0;
};

/// Per-trial oracle values. NaN where unavailable.
struct TrialOracles {
  double f_star = 0.0;
  double x0_dist = 0.0;  // ||x_0 - x*||_R with x_0 = r_0+
  double f_r0 = 0.0;
  double g_r0 = 0.0;
  double f_x0 = 0.0;
  std::optional<double> mu;
  double epsilon = 0.0;
};

struct TrialResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool valid = false;
  std::string diagnostic;
  TrialOracles oracles;
  std::vector<SchemeRun> runs;

  const SchemeRun* find(Scheme scheme) const;
};

struct SchemeStats {
  Scheme scheme = Scheme::Lcr;
  std::size_t trials = 0;
  double average = 0.0;
  double median = 0.0;
  double maximum = 0.0;
  double minimum = 0.0;
};

struct ExperimentResult {
  std::vector<TrialResult> trials;
  std::vector<SchemeStats> stats;
  std::size_t invalid = 0;
};

/// Median of an even count is the mean of the two central values.
SchemeStats summarize(Scheme scheme, std::span<const std::size_t> iterations);

TrialResult run_trial(const ExperimentConfig& config, std::size_t index);

/// Trials run in parallel (config.jobs workers); output does not depend on
/// the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes stats.txt, stats.csv, trials.csv, oracles.csv and per-trial traces
/// under config.out. Throws std::runtime_error with the failing path.
void write_experiment(const ExperimentConfig& config, const ExperimentResult& result);

/// Reads back what write_experiment produced (traces of the LCR restarts and
/// inner iterations included).
std::vector<TrialResult> read_experiment(const std::filesystem::path& dir);

enum class TraceFormat { Csv, JsonLines };

/// Inner iterations of each run: scheme,k,j,f,g_dual_norm. The first line
/// is the schema (CSV header, or a {"schema": [...]} object).
void export_trace(std::ostream& os, std::span<const SchemeRun> runs, TraceFormat format);

/// Restart records: j,observed_n,effective_n,doubled,f_r,g_r.
void export_restarts(std::ostream& os, const RestartTrace& trace, TraceFormat format);

/// Text table in the layout of the usual restart-scheme comparison.
void print_stats_table(std::ostream& os, std::span<const SchemeStats> stats);

/// Floating-point slack for theorem checks: observed <= bound (1 + 1e-8) + 1e-12.
bool within_tolerance(double observed, double bound);

struct BoundCheck {
  enum class Status { Pass, Fail, Skipped };

  std::size_t trial = 0;
  std::string name;
  Status status = Status::Skipped;
  double observed = 0.0;  // at the tightest point
  double bound = 0.0;
  std::size_t at = 0;     // k or j of the tightest point
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::string note;
};

/// Checks, when the needed runs and oracles exist:
///   objective_gap_rate        f(x_k) - f* <= 2 ||x_0 - x*||_R^2 / (k+1)^2 (no restart)
///   gradient_map_rate         ||g(y_k)||_* <= 4 ||x_0 - x*||_R / (k+2)     (no restart)
///   lcr_sufficient_decrease   ||g(r_{j-1})||_*^2 / 2 <= f(r_{j-1}) - f(r_j)
///   lcr_restart_length        n_j <= ceil(4 sqrt(e+1) / sqrt(mu))
///   lcr_total_work            prox calls <= 16/sqrt(mu) ceil(ln(1 + 2 (f(r_0) - f*) / eps^2))
///   fista_no_increase         f(x_k) <= f(x_0) for k >= floor(2 / sqrt(mu))
///   fista_contraction         f(x_k) - f* <= (f(x_0) - f(x_k)) / e for k >= floor(2 sqrt(e+1) / sqrt(mu))
std::vector<BoundCheck> verify_bounds(const TrialResult& trial);

/// One line per check.
void print_bound_report(std::ostream& os, std::span<const BoundCheck> checks);

}  // namespace rfista
