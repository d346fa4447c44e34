#include "rfista/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "format.hpp"

namespace rfista {

using detail::format_double;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(std::string(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_unsigned(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a non-negative integer, got '" + value + "'");
  }
  if (used != value.size()) {
    throw ConfigError("config: " + key + " expects a non-negative integer, got '" + value + "'");
  }
  return static_cast<T>(v);
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + value + "'");
  }
  if (used != value.size()) {
    throw ConfigError("config: " + key + " expects a number, got '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("config: " + key + " expects true or false, got '" + value + "'");
}

// Commas and newlines would break the CSV layout.
std::string sanitize(std::string s) {
  for (auto& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return os;
}

void close_out(std::ofstream& os, const std::filesystem::path& path) {
  os.close();
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string trial_stem(std::size_t index) {
  std::ostringstream ss;
  ss << "trial_" << std::setw(4) << std::setfill('0') << index;
  return ss.str();
}

}  // namespace

double ExperimentConfig::resolved_sparsity() const {
  return sparsity.value_or(family == Family::Lasso ? 0.9 : 0.0);
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("config: trials must be >= 1");
  if (schemes.empty()) throw ConfigError("config: at least one scheme is required");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("config: epsilon must be > 0");
  if (!(oracle_epsilon > 0.0)) throw ConfigError("config: oracle_epsilon must be > 0");
  if (!(oracle_epsilon < epsilon)) throw ConfigError("config: oracle_epsilon must be < epsilon");
  if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
  if (budget < 2) throw ConfigError("config: budget must be >= 2");
  try {
    if (family == Family::Lasso) {
      LassoSpec{rows, cols, alpha, resolved_sparsity(), seed}.validate();
    } else {
      QuadraticSpec{rows, cols, resolved_sparsity(), seed}.validate();
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void apply_config_entry(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "family") {
    const auto f = parse_family(value);
    if (!f) throw ConfigError("config: unknown family '" + value + "'");
    c.family = *f;
  } else if (key == "rows" || key == "N") {
    c.rows = parse_unsigned<std::size_t>(key, value);
  } else if (key == "cols" || key == "n") {
    c.cols = parse_unsigned<std::size_t>(key, value);
  } else if (key == "alpha") {
    c.alpha = parse_real(key, value);
  } else if (key == "sparsity") {
    c.sparsity = parse_real(key, value);
  } else if (key == "trials") {
    c.trials = parse_unsigned<std::size_t>(key, value);
  } else if (key == "schemes" || key == "scheme") {
    std::vector<Scheme> schemes;
    for (const auto& token : split(value, ',')) {
      const auto s = parse_scheme(trim(token));
      if (!s) throw ConfigError("config: unknown scheme '" + trim(token) + "'");
      if (std::find(schemes.begin(), schemes.end(), *s) == schemes.end()) schemes.push_back(*s);
    }
    c.schemes = std::move(schemes);
  } else if (key == "epsilon" || key == "eps") {
    c.epsilon = parse_real(key, value);
  } else if (key == "oracle_epsilon" || key == "oracle_eps") {
    c.oracle_epsilon = parse_real(key, value);
  } else if (key == "out") {
    c.out = value;
  } else if (key == "jobs") {
    c.jobs = parse_unsigned<std::size_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_unsigned<std::uint64_t>(key, value);
  } else if (key == "strict_exit") {
    c.strict_exit = parse_bool(key, value);
  } else if (key == "k_min") {
    c.k_min = parse_unsigned<std::size_t>(key, value);
  } else if (key == "budget") {
    c.budget = parse_unsigned<std::size_t>(key, value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

std::map<std::string, std::string> parse_config(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
    out[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> load_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open '" + path.string() + "'");
  return parse_config(is);
}

const SchemeRun* TrialResult::find(Scheme scheme) const {
  for (const auto& r : runs) {
    if (r.scheme == scheme) return &r;
  }
  return nullptr;
}

SchemeStats summarize(Scheme scheme, std::span<const std::size_t> iterations) {
  SchemeStats s;
  s.scheme = scheme;
  s.trials = iterations.size();
  if (iterations.empty()) {
    s.average = s.median = s.maximum = s.minimum = kNaN;
    return s;
  }
  std::vector<std::size_t> sorted(iterations.begin(), iterations.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  s.minimum = static_cast<double>(sorted.front());
  s.maximum = static_cast<double>(sorted.back());
  s.median = n % 2 == 1 ? static_cast<double>(sorted[n / 2])
                        : 0.5 * (static_cast<double>(sorted[n / 2 - 1]) +
                                 static_cast<double>(sorted[n / 2]));
  // Integer sum keeps the average exact up to the final division.
  const auto total = std::accumulate(sorted.begin(), sorted.end(), std::uint64_t{0});
  s.average = static_cast<double>(total) / static_cast<double>(n);
  return s;
}

namespace {

LassoProblem make_instance(const ExperimentConfig& c, std::uint64_t seed) {
  const double sparsity = c.resolved_sparsity();
  if (c.family == Family::Lasso) return generate(LassoSpec{c.rows, c.cols, c.alpha, sparsity, seed});
  return generate(QuadraticSpec{c.rows, c.cols, sparsity, seed});
}

void fill_trial(const ExperimentConfig& c, TrialResult& t) {
  const LassoProblem lasso = make_instance(c, t.seed);
  const CompositeProblem& problem = lasso.problem;
  const std::vector<double> r0(lasso.cols, 0.0);

  std::vector<double> x_star;
  if (lasso.family == Family::Quadratic) {
    auto exact = least_squares_solution(lasso);
    if (!exact) {
      t.diagnostic = "least-squares oracle unavailable";
      return;
    }
    t.oracles.f_star = exact->first;
    x_star = std::move(exact->second);
    t.oracles.mu = oracle_mu(lasso);
  } else {
    FstarOracle oracle = oracle_fstar(lasso, c.oracle_epsilon, c.budget);
    t.oracles.f_star = oracle.f_star;
    if (!oracle.valid) {
      t.diagnostic = oracle.diagnostic;
      return;
    }
    x_star = std::move(oracle.x_star);
  }

  const ProxStep start = composite_gradient_map(problem, r0);
  std::vector<double> diff(lasso.cols);
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = start.y_plus[i] - x_star[i];
  t.oracles.x0_dist = problem.metric().norm(diff);
  t.oracles.f_r0 = objective(problem, r0);
  t.oracles.g_r0 = start.g_dual_norm;
  t.oracles.f_x0 = objective(problem, start.y_plus);
  t.oracles.epsilon = c.epsilon;

  for (Scheme scheme : c.schemes) {
    RestartRun run;
    run.scheme = scheme;
    run.epsilon = c.epsilon;
    run.r0 = r0;
    run.f_star = t.oracles.f_star;
    run.early_exit = !c.strict_exit;
    run.k_min = c.k_min;
    run.budget = c.budget;
    RestartResult res = solve(problem, run);
    SchemeRun out{scheme, std::move(res.trace), objective(problem, res.r_star)};
    if (!out.trace.converged && t.diagnostic.empty()) {
      t.diagnostic = "scheme " + std::string(scheme_name(scheme)) + " exhausted its budget";
    }
    t.runs.push_back(std::move(out));
  }
  t.valid = t.diagnostic.empty();
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& config, std::size_t index) {
  TrialResult t;
  t.index = index;
  t.seed = config.seed + index;
  t.oracles.f_star = kNaN;
  t.oracles.x0_dist = t.oracles.f_r0 = t.oracles.g_r0 = t.oracles.f_x0 = kNaN;
  t.oracles.epsilon = config.epsilon;
  try {
    fill_trial(config, t);
  } catch (const std::exception& e) {
    t.valid = false;
    t.diagnostic = std::string("trial failed: ") + e.what();
  }
  return t;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.trials.resize(config.trials);
  const auto count = static_cast<long long>(config.trials);
#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(config.jobs))
  for (long long i = 0; i < count; ++i) {
    result.trials[static_cast<std::size_t>(i)] = run_trial(config, static_cast<std::size_t>(i));
  }

  for (const auto& t : result.trials) result.invalid += t.valid ? 0 : 1;
  for (Scheme scheme : config.schemes) {
    std::vector<std::size_t> iterations;
    for (const auto& t : result.trials) {
      if (!t.valid) continue;
      if (const auto* r = t.find(scheme)) iterations.push_back(r->trace.total_iterations);
    }
    result.stats.push_back(summarize(scheme, iterations));
  }
  return result;
}

void export_trace(std::ostream& os, std::span<const SchemeRun> runs, TraceFormat format) {
  if (format == TraceFormat::Csv) {
    os << "scheme,k,j,f,g_dual_norm\n";
    for (const auto& run : runs) {
      const auto name = scheme_name(run.scheme);
      for (const auto& it : run.trace.iterations) {
        os << name << ',' << it.k << ',' << it.j << ',' << format_double(it.f) << ','
           << format_double(it.g_dual_norm) << '\n';
      }
    }
  } else {
    os << R"({"schema":["scheme","k","j","f","g_dual_norm"]})" << '\n';
    for (const auto& run : runs) {
      const auto name = scheme_name(run.scheme);
      for (const auto& it : run.trace.iterations) {
        os << R"({"scheme":")" << name << R"(","k":)" << it.k << R"(,"j":)" << it.j
           << R"(,"f":)" << json_number(it.f) << R"(,"g_dual_norm":)"
           << json_number(it.g_dual_norm) << "}\n";
      }
    }
  }
  if (!os) throw std::runtime_error("export_trace: stream failure");
}

void export_restarts(std::ostream& os, const RestartTrace& trace, TraceFormat format) {
  if (format == TraceFormat::Csv) {
    os << "j,observed_n,effective_n,doubled,f_r,g_r\n";
    for (const auto& r : trace.restarts) {
      os << r.j << ',' << r.observed_n << ',' << r.effective_n << ',' << (r.doubled ? 1 : 0)
         << ',' << format_double(r.f_r) << ',' << format_double(r.g_r) << '\n';
    }
  } else {
    os << R"({"schema":["j","observed_n","effective_n","doubled","f_r","g_r"]})" << '\n';
    for (const auto& r : trace.restarts) {
      os << R"({"j":)" << r.j << R"(,"observed_n":)" << r.observed_n << R"(,"effective_n":)"
         << r.effective_n << R"(,"doubled":)" << (r.doubled ? "true" : "false") << R"(,"f_r":)"
         << json_number(r.f_r) << R"(,"g_r":)" << json_number(r.g_r) << "}\n";
    }
  }
  if (!os) throw std::runtime_error("export_restarts: stream failure");
}

void print_stats_table(std::ostream& os, std::span<const SchemeStats> stats) {
  auto cell = [](double v) {
    std::ostringstream ss;
    if (std::isnan(v)) {
      ss << "-";
    } else if (v == std::floor(v)) {
      ss << static_cast<long long>(v);
    } else {
      ss << std::fixed << std::setprecision(2) << v;
    }
    return ss.str();
  };
  os << std::left << std::setw(18) << "Restart scheme";
  for (const auto& s : stats) os << std::right << std::setw(12) << scheme_name(s.scheme);
  os << '\n';
  const std::pair<const char*, double SchemeStats::*> rows[] = {
      {"Avg. Iter.", &SchemeStats::average},
      {"Median Iter.", &SchemeStats::median},
      {"Max. Iter.", &SchemeStats::maximum},
      {"Min. Iter.", &SchemeStats::minimum},
  };
  for (const auto& [label, field] : rows) {
    os << std::left << std::setw(18) << label;
    for (const auto& s : stats) os << std::right << std::setw(12) << cell(s.*field);
    os << '\n';
  }
  os << std::left << std::setw(18) << "Trials";
  for (const auto& s : stats) os << std::right << std::setw(12) << s.trials;
  os << '\n';
}

void write_experiment(const ExperimentConfig& config, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir = config.out;
  std::error_code ec;
  fs::create_directories(dir / "traces", ec);
  if (ec) throw std::runtime_error("cannot create '" + (dir / "traces").string() + "': " + ec.message());

  {
    const auto path = dir / "stats.txt";
    auto os = open_out(path);
    print_stats_table(os, result.stats);
    close_out(os, path);
  }
  {
    const auto path = dir / "stats.csv";
    auto os = open_out(path);
    os << "scheme,trials,average,median,maximum,minimum\n";
    for (const auto& s : result.stats) {
      os << scheme_name(s.scheme) << ',' << s.trials << ',' << format_double(s.average) << ','
         << format_double(s.median) << ',' << format_double(s.maximum) << ','
         << format_double(s.minimum) << '\n';
    }
    close_out(os, path);
  }
  {
    const auto path = dir / "oracles.csv";
    auto os = open_out(path);
    os << "trial,seed,valid,f_star,x0_dist,f_r0,g_r0,f_x0,mu,epsilon,diagnostic\n";
    for (const auto& t : result.trials) {
      const auto& o = t.oracles;
      os << t.index << ',' << t.seed << ',' << (t.valid ? 1 : 0) << ',' << format_double(o.f_star)
         << ',' << format_double(o.x0_dist) << ',' << format_double(o.f_r0) << ','
         << format_double(o.g_r0) << ',' << format_double(o.f_x0) << ','
         << (o.mu ? format_double(*o.mu) : std::string()) << ',' << format_double(o.epsilon)
         << ',' << sanitize(t.diagnostic) << '\n';
    }
    close_out(os, path);
  }
  {
    const auto path = dir / "trials.csv";
    auto os = open_out(path);
    os << "trial,seed,scheme,iterations,prox_calls,restarts,outer_checks,converged,"
          "budget_exhausted,final_g_dual_norm,f_final,f_r0,g_r0\n";
    for (const auto& t : result.trials) {
      for (const auto& run : t.runs) {
        const auto& tr = run.trace;
        os << t.index << ',' << t.seed << ',' << scheme_name(run.scheme) << ','
           << tr.total_iterations << ',' << tr.prox_calls << ',' << tr.restarts.size() << ','
           << tr.outer_checks << ',' << (tr.converged ? 1 : 0) << ','
           << (tr.budget_exhausted ? 1 : 0) << ',' << format_double(tr.final_g_dual_norm) << ','
           << format_double(run.f_final) << ',' << format_double(tr.f_r0) << ','
           << format_double(tr.g_r0) << '\n';
      }
    }
    close_out(os, path);
  }
  for (const auto& t : result.trials) {
    const auto stem = trial_stem(t.index);
    const auto path = dir / "traces" / (stem + ".csv");
    auto os = open_out(path);
    export_trace(os, t.runs, TraceFormat::Csv);
    close_out(os, path);
    if (const auto* lcr = t.find(Scheme::Lcr)) {
      const auto nj_path = dir / "traces" / (stem + "_lcr_nj.csv");
      auto nj = open_out(nj_path);
      export_restarts(nj, lcr->trace, TraceFormat::Csv);
      close_out(nj, nj_path);
    }
  }
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::filesystem::path& path) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw std::runtime_error("'" + path.string() + "': missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  }
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("'" + path.string() + "' is empty");
  t.header = split(line, ',');
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != t.header.size()) {
      throw std::runtime_error("'" + path.string() + "': row has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

double to_real(const std::string& s) { return s.empty() ? kNaN : std::stod(s); }
std::size_t to_size(const std::string& s) { return static_cast<std::size_t>(std::stoull(s)); }

Scheme to_scheme(const std::string& s, const std::filesystem::path& path) {
  const auto scheme = parse_scheme(s);
  if (!scheme) throw std::runtime_error("'" + path.string() + "': unknown scheme '" + s + "'");
  return *scheme;
}

}  // namespace

std::vector<TrialResult> read_experiment(const std::filesystem::path& dir) {
  const auto oracle_path = dir / "oracles.csv";
  const CsvTable oracles = read_csv(oracle_path);
  std::vector<TrialResult> trials;
  std::map<std::size_t, std::size_t> slot;
  for (const auto& row : oracles.rows) {
    auto at = [&](const char* name) { return row[oracles.column(name, oracle_path)]; };
    TrialResult t;
    t.index = to_size(at("trial"));
    t.seed = std::stoull(at("seed"));
    t.valid = at("valid") == "1";
    t.diagnostic = at("diagnostic");
    t.oracles.f_star = to_real(at("f_star"));
    t.oracles.x0_dist = to_real(at("x0_dist"));
    t.oracles.f_r0 = to_real(at("f_r0"));
    t.oracles.g_r0 = to_real(at("g_r0"));
    t.oracles.f_x0 = to_real(at("f_x0"));
    if (!at("mu").empty()) t.oracles.mu = to_real(at("mu"));
    t.oracles.epsilon = to_real(at("epsilon"));
    slot[t.index] = trials.size();
    trials.push_back(std::move(t));
  }

  const auto trials_path = dir / "trials.csv";
  const CsvTable runs = read_csv(trials_path);
  for (const auto& row : runs.rows) {
    auto at = [&](const char* name) { return row[runs.column(name, trials_path)]; };
    const auto it = slot.find(to_size(at("trial")));
    if (it == slot.end()) throw std::runtime_error("'" + trials_path.string() + "': unknown trial");
    SchemeRun run;
    run.scheme = to_scheme(at("scheme"), trials_path);
    run.trace.total_iterations = to_size(at("iterations"));
    run.trace.prox_calls = to_size(at("prox_calls"));
    run.trace.outer_checks = to_size(at("outer_checks"));
    run.trace.converged = at("converged") == "1";
    run.trace.budget_exhausted = at("budget_exhausted") == "1";
    run.trace.final_g_dual_norm = to_real(at("final_g_dual_norm"));
    run.trace.f_r0 = to_real(at("f_r0"));
    run.trace.g_r0 = to_real(at("g_r0"));
    run.f_final = to_real(at("f_final"));
    trials[it->second].runs.push_back(std::move(run));
  }

  for (auto& t : trials) {
    const auto stem = trial_stem(t.index);
    const auto path = dir / "traces" / (stem + ".csv");
    const CsvTable trace = read_csv(path);
    const auto c_scheme = trace.column("scheme", path), c_k = trace.column("k", path),
               c_j = trace.column("j", path), c_f = trace.column("f", path),
               c_g = trace.column("g_dual_norm", path);
    for (const auto& row : trace.rows) {
      const Scheme scheme = to_scheme(row[c_scheme], path);
      auto run = std::find_if(t.runs.begin(), t.runs.end(),
                              [&](const SchemeRun& r) { return r.scheme == scheme; });
      if (run == t.runs.end()) {
        throw std::runtime_error("'" + path.string() + "': scheme not listed in trials.csv");
      }
      run->trace.iterations.push_back(
          {to_size(row[c_k]), to_size(row[c_j]), to_real(row[c_f]), to_real(row[c_g])});
    }

    const auto nj_path = dir / "traces" / (stem + "_lcr_nj.csv");
    auto lcr = std::find_if(t.runs.begin(), t.runs.end(),
                            [](const SchemeRun& r) { return r.scheme == Scheme::Lcr; });
    if (lcr == t.runs.end() || !std::filesystem::exists(nj_path)) continue;
    const CsvTable nj = read_csv(nj_path);
    for (const auto& row : nj.rows) {
      auto at = [&](const char* name) { return row[nj.column(name, nj_path)]; };
      lcr->trace.restarts.push_back({.j = to_size(at("j")),
                                     .observed_n = to_size(at("observed_n")),
                                     .effective_n = to_size(at("effective_n")),
                                     .doubled = at("doubled") == "1",
                                     .f_r = to_real(at("f_r")),
                                     .g_r = to_real(at("g_r"))});
    }
  }
  return trials;
}

bool within_tolerance(double observed, double bound) {
  return observed <= bound * (1.0 + 1e-8) + 1e-12;
}

namespace {

// Tracks the tightest point of one inequality family.
class CheckBuilder {
 public:
  CheckBuilder(std::size_t trial, std::string name) {
    check_.trial = trial;
    check_.name = std::move(name);
  }

  void add(double observed, double bound, std::size_t at) {
    ++check_.checked;
    const bool ok = within_tolerance(observed, bound);
    if (!ok) ++check_.violations;
    const double margin = observed - bound;
    if (check_.checked == 1 || margin > worst_margin_ || std::isnan(margin)) {
      worst_margin_ = margin;
      check_.observed = observed;
      check_.bound = bound;
      check_.at = at;
    }
  }

  BoundCheck done(std::string note = {}) {
    check_.status = check_.violations == 0 ? BoundCheck::Status::Pass : BoundCheck::Status::Fail;
    check_.note = std::move(note);
    return check_;
  }

  BoundCheck skip(std::string note) {
    check_.status = BoundCheck::Status::Skipped;
    check_.note = std::move(note);
    return check_;
  }

 private:
  BoundCheck check_;
  double worst_margin_ = 0.0;
};

}  // namespace

std::vector<BoundCheck> verify_bounds(const TrialResult& t) {
  std::vector<BoundCheck> out;
  const auto& o = t.oracles;
  const auto* none = t.find(Scheme::NoRestart);
  const auto* lcr = t.find(Scheme::Lcr);
  const bool have_fstar = t.valid && std::isfinite(o.f_star);
  const bool have_dist = have_fstar && std::isfinite(o.x0_dist);
  const bool have_mu = t.valid && o.mu && *o.mu > 0.0;
  const std::string invalid = t.valid ? "" : "invalid trial: " + t.diagnostic;

  auto missing = [&](bool run_ok, bool oracle_ok, const char* run, const char* oracle) {
    if (!t.valid) return invalid;
    if (!run_ok) return std::string("no ") + run + " run";
    if (!oracle_ok) return std::string("oracle ") + oracle + " unavailable";
    return std::string();
  };

  {
    CheckBuilder c(t.index, "objective_gap_rate");
    if (auto why = missing(none, have_dist, "none", "f*/x*"); !why.empty()) {
      out.push_back(c.skip(why));
    } else {
      const double d2 = o.x0_dist * o.x0_dist;
      for (const auto& it : none->trace.iterations) {
        const double k1 = static_cast<double>(it.k + 1);
        c.add(it.f - o.f_star, 2.0 * d2 / (k1 * k1), it.k);
      }
      out.push_back(c.done());
    }
  }
  {
    CheckBuilder c(t.index, "gradient_map_rate");
    if (auto why = missing(none, have_dist, "none", "x*"); !why.empty()) {
      out.push_back(c.skip(why));
    } else {
      // Row k holds ||g(y_{k-1})||_*, bounded by 4 D / (k + 1).
      for (const auto& it : none->trace.iterations) {
        c.add(it.g_dual_norm, 4.0 * o.x0_dist / static_cast<double>(it.k + 1), it.k - 1);
      }
      out.push_back(c.done());
    }
  }
  {
    CheckBuilder c(t.index, "lcr_sufficient_decrease");
    if (auto why = missing(lcr, true, "lcr", ""); !why.empty()) {
      out.push_back(c.skip(why));
    } else {
      const auto& rec = lcr->trace.restarts;
      for (std::size_t i = 0; i < rec.size(); ++i) {
        const double f_prev = i == 0 ? lcr->trace.f_r0 : rec[i - 1].f_r;
        const double g_prev = i == 0 ? lcr->trace.g_r0 : rec[i - 1].g_r;
        if (std::isnan(g_prev)) continue;
        c.add(0.5 * g_prev * g_prev, f_prev - rec[i].f_r, rec[i].j);
      }
      out.push_back(c.done());
    }
  }

  const double sqrt_mu = have_mu ? std::sqrt(*o.mu) : kNaN;
  const double e = std::numbers::e;
  {
    CheckBuilder c(t.index, "lcr_restart_length");
    if (auto why = missing(lcr, have_mu, "lcr", "mu"); !why.empty()) {
      out.push_back(c.skip(why));
    } else {
      const double bound = std::ceil(4.0 * std::sqrt(e + 1.0) / sqrt_mu);
      for (const auto& r : lcr->trace.restarts) {
        c.add(static_cast<double>(r.observed_n), bound, r.j);
      }
      out.push_back(c.done());
    }
  }
  {
    CheckBuilder c(t.index, "lcr_total_work");
    if (auto why = missing(lcr, have_mu && have_fstar, "lcr", "mu/f*"); !why.empty()) {
      out.push_back(c.skip(why));
    } else {
      const double gap = std::max(lcr->trace.f_r0 - o.f_star, 0.0);
      const double bound =
          16.0 / sqrt_mu * std::ceil(std::log1p(2.0 * gap / (o.epsilon * o.epsilon)));
      c.add(static_cast<double>(lcr->trace.total_iterations), bound, lcr->trace.restarts.size());
      out.push_back(c.done("observed = inner iterations; prox calls = " +
                           std::to_string(lcr->trace.prox_calls)));
    }
  }
  {
    CheckBuilder c(t.index, "fista_no_increase");
    if (auto why = missing(none, have_mu, "none", "mu"); !why.empty()) {
      out.push_back(c.skip(why));
    } else {
      const auto from = static_cast<std::size_t>(std::floor(2.0 / sqrt_mu));
      for (const auto& it : none->trace.iterations) {
        if (it.k >= from) c.add(it.f, o.f_x0, it.k);
      }
      out.push_back(c.done("k >= " + std::to_string(from)));
    }
  }
  {
    CheckBuilder c(t.index, "fista_contraction");
    if (auto why = missing(none, have_mu && have_fstar, "none", "mu/f*"); !why.empty()) {
      out.push_back(c.skip(why));
    } else {
      const auto from = static_cast<std::size_t>(std::floor(2.0 * std::sqrt(e + 1.0) / sqrt_mu));
      for (const auto& it : none->trace.iterations) {
        if (it.k >= from) c.add(it.f - o.f_star, (o.f_x0 - it.f) / e, it.k);
      }
      out.push_back(c.done("k >= " + std::to_string(from)));
    }
  }
  return out;
}

void print_bound_report(std::ostream& os, std::span<const BoundCheck> checks) {
  for (const auto& c : checks) {
    const char* status = c.status == BoundCheck::Status::Pass   ? "PASS"
                         : c.status == BoundCheck::Status::Fail ? "FAIL"
                                                                : "SKIP";
    os << "trial=" << c.trial << " check=" << c.name << " status=" << status;
    if (c.status != BoundCheck::Status::Skipped) {
      os << " bound=" << format_double(c.bound) << " observed=" << format_double(c.observed)
         << " at=" << c.at << " checked=" << c.checked << " violations=" << c.violations;
    }
    if (!c.note.empty()) os << " note=\"" << c.note << '"';
    os << '\n';
  }
}

}  // namespace rfista
