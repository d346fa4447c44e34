// rfista: generate problems, solve them with a restart scheme, run batch
// experiments and check recorded traces against the convergence bounds.
//
// Exit codes: 0 success, 1 invalid trial or failed bound, 2 configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "rfista/experiment.hpp"
#include "rfista/lasso.hpp"
#include "rfista/restart.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;

// String-valued flags mirror config keys so that file values and flags go
// through the same parser; a flag given on the command line wins.
struct Overrides {
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
    options.emplace_back(key, app.add_option(flag, values[key], help));
  }

  void apply(rfista::ExperimentConfig& config) const {
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) rfista::apply_config_entry(config, key, values.at(key));
    }
  }
};

void add_spec_flags(CLI::App& app, Overrides& o) {
  o.add(app, "--family", "family", "Problem family: lasso or quadratic");
  o.add(app, "--rows,-N", "rows", "Rows of A");
  o.add(app, "--cols", "cols", "Columns of A");
  o.add(app, "--alpha", "alpha", "Weights W_ii ~ Uniform[0, alpha]");
  o.add(app, "--sparsity", "sparsity", "Probability of a zero entry in A");
  o.add(app, "--seed", "seed", "Base seed; trial i uses seed + i");
}

rfista::LassoProblem generate_from(const rfista::ExperimentConfig& c) {
  const double sparsity = c.resolved_sparsity();
  if (c.family == rfista::Family::Lasso) {
    return rfista::generate(rfista::LassoSpec{c.rows, c.cols, c.alpha, sparsity, c.seed});
  }
  return rfista::generate(rfista::QuadraticSpec{c.rows, c.cols, sparsity, c.seed});
}

rfista::TraceFormat parse_format(const std::string& s) {
  if (s == "csv") return rfista::TraceFormat::Csv;
  if (s == "jsonl") return rfista::TraceFormat::JsonLines;
  throw rfista::ConfigError("unknown format '" + s + "' (csv or jsonl)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Restarted FISTA experiments"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a batch experiment");
  std::string run_config;
  std::vector<std::string> run_schemes;
  bool run_strict = false;
  Overrides run_o;
  run->add_option("--config", run_config, "Flat key = value config file");
  add_spec_flags(*run, run_o);
  run_o.add(*run, "--trials", "trials", "Number of trials");
  run_o.add(*run, "--eps", "epsilon", "Target ||g||_* accuracy");
  run_o.add(*run, "--oracle-eps", "oracle_epsilon", "Accuracy of the f* oracle");
  run_o.add(*run, "--out", "out", "Output directory");
  run_o.add(*run, "--jobs", "jobs", "Trials run in parallel");
  run_o.add(*run, "--k-min", "k_min", "Minimum inner iterations for func/grad/opt");
  run_o.add(*run, "--budget", "budget", "Prox-call budget per run");
  auto* run_scheme_opt =
      run->add_option("--scheme", run_schemes, "Scheme to run (repeatable): none,func,grad,opt,lcr");
  auto* run_strict_opt =
      run->add_flag("--strict-exit", run_strict, "Check convergence only between restarts");

  // gen
  auto* gen = app.add_subcommand("gen", "Write one generated problem");
  std::string gen_config, gen_out = "-";
  Overrides gen_o;
  gen->add_option("--config", gen_config, "Flat key = value config file");
  add_spec_flags(*gen, gen_o);
  gen->add_option("--out", gen_out, "Problem file ('-' for stdout)");

  // solve
  auto* slv = app.add_subcommand("solve", "Solve one problem file with one scheme");
  std::string slv_problem, slv_scheme = "lcr", slv_out, slv_format = "csv";
  double slv_eps = 1e-11, slv_oracle_eps = 1e-12;
  std::size_t slv_k_min = 0, slv_budget = 10'000'000;
  bool slv_strict = false;
  slv->add_option("problem", slv_problem, "Problem file from 'gen'")->required();
  slv->add_option("--scheme", slv_scheme, "none, func, grad, opt or lcr");
  slv->add_option("--eps", slv_eps, "Target ||g||_* accuracy");
  slv->add_option("--oracle-eps", slv_oracle_eps, "Accuracy of the f* oracle (opt scheme)");
  slv->add_option("--k-min", slv_k_min, "Minimum inner iterations for func/grad/opt");
  slv->add_option("--budget", slv_budget, "Prox-call budget");
  slv->add_option("--out", slv_out, "Directory for trace and restart files");
  slv->add_option("--format", slv_format, "csv or jsonl");
  slv->add_flag("--strict-exit", slv_strict, "Check convergence only between restarts");

  // verify
  auto* ver = app.add_subcommand("verify", "Check experiment traces against the bounds");
  std::string ver_dir;
  ver->add_option("dir", ver_dir, "Experiment output directory");
  ver->add_option("--out", ver_dir, "Experiment output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) {
      rfista::ExperimentConfig config;
      if (!run_config.empty()) {
        for (const auto& [k, v] : rfista::load_config_file(run_config)) {
          rfista::apply_config_entry(config, k, v);
        }
      }
      run_o.apply(config);
      if (run_scheme_opt->count() > 0) {
        std::string joined;
        for (const auto& s : run_schemes) joined += (joined.empty() ? "" : ",") + s;
        rfista::apply_config_entry(config, "schemes", joined);
      }
      if (run_strict_opt->count() > 0) config.strict_exit = run_strict;
      config.validate();

      const auto result = rfista::run_experiment(config);
      rfista::write_experiment(config, result);
      rfista::print_stats_table(std::cout, result.stats);
      for (const auto& t : result.trials) {
        if (!t.valid) {
          std::cerr << "invalid trial " << t.index << " (seed " << t.seed << "): " << t.diagnostic
                    << '\n';
        }
      }
      std::cout << "results written to " << config.out.string() << '\n';
      return result.invalid == 0 ? kOk : kFailed;
    }

    if (*gen) {
      rfista::ExperimentConfig config;
      if (!gen_config.empty()) {
        for (const auto& [k, v] : rfista::load_config_file(gen_config)) {
          rfista::apply_config_entry(config, k, v);
        }
      }
      gen_o.apply(config);
      config.validate();
      const auto problem = generate_from(config);
      if (gen_out == "-") {
        rfista::write_problem(std::cout, problem);
      } else {
        std::ofstream os(gen_out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open '" + gen_out + "' for writing");
        rfista::write_problem(os, problem);
      }
      return kOk;
    }

    if (*slv) {
      const auto scheme = rfista::parse_scheme(slv_scheme);
      if (!scheme) throw rfista::ConfigError("unknown scheme '" + slv_scheme + "'");
      if (!(slv_eps > 0.0)) throw rfista::ConfigError("--eps must be > 0");
      const auto format = parse_format(slv_format);

      std::ifstream is(slv_problem);
      if (!is) throw rfista::ConfigError("cannot open problem file '" + slv_problem + "'");
      const auto lasso = rfista::read_problem(is);

      rfista::RestartRun run_spec;
      run_spec.scheme = *scheme;
      run_spec.epsilon = slv_eps;
      run_spec.r0.assign(lasso.cols, 0.0);
      run_spec.early_exit = !slv_strict;
      run_spec.k_min = slv_k_min;
      run_spec.budget = slv_budget;
      if (*scheme == rfista::Scheme::OptimalValue) {
        const auto oracle = rfista::oracle_fstar(lasso, slv_oracle_eps, slv_budget);
        if (!oracle.valid) {
          std::cerr << "f* oracle failed: " << oracle.diagnostic << '\n';
          return kFailed;
        }
        run_spec.f_star = oracle.f_star;
      }
      const auto res = rfista::solve(lasso.problem, run_spec);
      const auto& tr = res.trace;
      std::printf("scheme=%s iterations=%zu prox_calls=%zu restarts=%zu converged=%d "
                  "f=%.17g g_dual_norm=%.17g\n",
                  std::string(rfista::scheme_name(*scheme)).c_str(), tr.total_iterations,
                  tr.prox_calls, tr.restarts.size(), tr.converged ? 1 : 0,
                  rfista::objective(lasso.problem, res.r_star), tr.final_g_dual_norm);
      if (!slv_out.empty()) {
        std::filesystem::create_directories(slv_out);
        const std::string ext = format == rfista::TraceFormat::Csv ? ".csv" : ".jsonl";
        const auto trace_path = std::filesystem::path(slv_out) / ("trace" + ext);
        const auto nj_path = std::filesystem::path(slv_out) / ("restarts" + ext);
        std::ofstream t(trace_path, std::ios::binary), n(nj_path, std::ios::binary);
        if (!t) throw std::runtime_error("cannot open '" + trace_path.string() + "'");
        if (!n) throw std::runtime_error("cannot open '" + nj_path.string() + "'");
        const rfista::SchemeRun runs[] = {{*scheme, tr, 0.0}};
        rfista::export_trace(t, runs, format);
        rfista::export_restarts(n, tr, format);
      }
      return tr.converged ? kOk : kFailed;
    }

    if (*ver) {
      if (ver_dir.empty()) throw rfista::ConfigError("verify needs an experiment directory");
      const auto trials = rfista::read_experiment(ver_dir);
      std::size_t failed = 0;
      for (const auto& t : trials) {
        const auto checks = rfista::verify_bounds(t);
        rfista::print_bound_report(std::cout, checks);
        for (const auto& c : checks) failed += c.status == rfista::BoundCheck::Status::Fail;
      }
      std::cout << "failed checks: " << failed << '\n';
      return failed == 0 ? kOk : kFailed;
    }
  } catch (const rfista::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kOk;
}
