#include "cli.hpp"

#include <siga/builtin.hpp>
#include <siga/checks.hpp>
#include <siga/io.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace siga::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

portfolio::PriceFormat format_by_name(const std::string& s) {
  if (s == "csv") return portfolio::PriceFormat::CSV;
  if (s == "indtrack") return portfolio::PriceFormat::ORLibraryIndtrack;
  throw UsageError("unknown price format '" + s + "' (expected csv or indtrack)");
}

std::string dataset_name(const std::string& source) {
  if (portfolio::is_synthetic_source(source)) {
    std::string s = source;
    std::replace(s.begin(), s.end(), ':', '_');
    return s;
  }
  return fs::path(source).stem().string();
}

portfolio::PriceMatrix load_dataset(const std::string& source,
                                    const std::optional<portfolio::PriceFormat>& format) {
  if (!portfolio::is_synthetic_source(source) && !fs::exists(source)) {
    throw UsageError("dataset not found: " + source);
  }
  return portfolio::load_prices(source, format.value_or(portfolio::format_from_path(source)));
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

std::string weights_text(const Eigen::VectorXd& y) {
  std::string s;
  for (Index i = 0; i < y.size(); ++i) s += io::format_number(y(i)) + "\n";
  return s;
}

json report_json(const portfolio::EvaluationReport& r) {
  json j{{"method", portfolio::to_string(r.method)},
         {"sr_in", r.sr_in},
         {"sr_out", r.sr_out},
         {"cr_out", r.cr_out},
         {"y_star", io::to_json(r.y_star)},
         {"converged", r.converged},
         {"residual", r.residual},
         {"iterations", r.iterations}};
  if (r.x_star.size() > 0) j["x_star"] = io::to_json(r.x_star);
  if (r.y_smoothed.size() > 0) j["y_smoothed"] = io::to_json(r.y_smoothed);
  return j;
}

void write_solve_outputs(const std::string& out_dir, const SigaTrace<double>& trace,
                         const json& final_state) {
  ensure_dir(out_dir);
  std::ostringstream csv;
  io::write_trace_csv(csv, trace);
  io::write_text_file(join(out_dir, "trace.csv"), csv.str());
  io::write_text_file(join(out_dir, "trace.json"), io::to_json(trace).dump(2) + "\n");
  io::write_text_file(join(out_dir, "final_state.json"), final_state.dump(2) + "\n");
}

// Certificate at the final x after re-solving y there; the solver state pairs
// x^{T+1} with y^T.
json certificate_json(const SmoothingKernel<double>& kernel, const PviProblem<double>& problem,
                      const UpperObjective<double>& objective, const SigaState<double>& state,
                      const SigaConfig<double>& config, std::ostream& err) {
  try {
    const double tau = state.tau > 0.0 ? state.tau : config.tau0;
    const auto fresh =
        refresh_state(kernel, problem, objective, state, tau, config.max_inner_iters);
    const auto cert = certify_epsilon_stationary(kernel, problem, objective, fresh,
                                                 config.clarke_grid_points);
    return io::to_json(cert);
  } catch (const ConvergenceError& e) {
    err << "warning: certificate skipped: " << e.what() << "\n";
    return nullptr;
  }
}

int cmd_solve(const std::string& config_path, const std::optional<std::string>& out_override,
              const std::optional<std::uint64_t>& seed, const std::optional<long>& max_iters,
              std::ostream& out, std::ostream& err) {
  RunConfig rc = load_run_config(config_path);
  if (out_override) rc.out = *out_override;
  if (seed) rc.seed = *seed;
  json overrides = rc.siga;
  if (max_iters) overrides["max_outer_iters"] = *max_iters;
  const auto kernel = kernel_by_name(rc.kernel);

  json final_state;
  SigaTrace<double> trace;
  if (rc.dataset) {
    const auto prices = load_dataset(*rc.dataset, rc.format);
    const auto data = portfolio::prepare_dataset(prices, rc.dataset_options);
    const auto& model = data.model;
    const auto config = siga_config(overrides, portfolio::default_siga_config(model), model.m(),
                                    model.assets);
    const auto contraction = analyze_contraction(model.pvi, 64, rc.seed);
    if (!contraction.warning.empty()) err << "warning: " << contraction.warning << "\n";
    auto result = portfolio::run_siga_portfolio(model, data.split.test.returns, config);
    trace = std::move(result.run.trace);
    final_state = {{"problem", "portfolio"},
                   {"dataset", *rc.dataset},
                   {"assets", model.assets},
                   {"state", io::to_json(result.run.state)},
                   {"contraction", io::to_json(contraction)},
                   {"report", report_json(result.report)},
                   {"certificate", certificate_json(kernel, model.pvi, model.objective,
                                                    result.run.state, config, err)}};
  } else {
    const auto bp = builtin_by_name(rc.builtin);
    SigaConfig<double> base;
    base.x0 = bp.x0;
    base.y0 = bp.y0;
    const auto config = siga_config(overrides, base, bp.problem.m, bp.problem.n);
    const auto contraction = analyze_contraction(bp.problem, 64, rc.seed);
    if (!contraction.warning.empty()) err << "warning: " << contraction.warning << "\n";
    auto result = run_siga(kernel, bp.problem, bp.objective, config);
    trace = std::move(result.trace);
    final_state = {{"problem", bp.name},
                   {"state", io::to_json(result.state)},
                   {"objective", bp.objective.f(result.state.x, result.state.y)},
                   {"contraction", io::to_json(contraction)},
                   {"certificate", certificate_json(kernel, bp.problem, bp.objective,
                                                    result.state, config, err)}};
  }
  write_solve_outputs(rc.out, trace, final_state);
  out << "wrote " << trace.records.size() << " iterations to " << rc.out << "\n";
  return kOk;
}

std::vector<portfolio::Method> parse_methods(const std::string& list) {
  std::vector<portfolio::Method> methods;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto m = portfolio::method_from_string(item);
      if (std::find(methods.begin(), methods.end(), m) == methods.end()) methods.push_back(m);
    } catch (const ArgumentError& e) {
      throw UsageError(e.what());
    }
  }
  if (methods.empty()) throw UsageError("--methods selects no method");
  std::sort(methods.begin(), methods.end());
  return methods;
}

int cmd_bench(const std::vector<std::string>& datasets, const std::string& methods_list,
              const std::optional<std::string>& config_path,
              const std::optional<std::string>& out_override, const std::optional<long>& max_iters,
              std::ostream& out, std::ostream& err) {
  RunConfig rc = config_path ? load_run_config(*config_path) : RunConfig{};
  if (out_override) rc.out = *out_override;
  const auto methods = parse_methods(methods_list);
  json overrides = rc.siga;
  if (max_iters) overrides["max_outer_iters"] = *max_iters;
  ensure_dir(rc.out);

  struct Row {
    std::string dataset;
    portfolio::Method method;
    portfolio::EvaluationReport report;
  };
  std::vector<Row> rows;
  bool failed = false;
  for (const auto& source : datasets) {
    const std::string name = dataset_name(source);
    try {
      // a missing file only fails its own rows here, unlike in solve
      if (!portfolio::is_synthetic_source(source) && !fs::exists(source)) {
        throw Error("dataset not found");
      }
      const auto prices = load_dataset(source, rc.format);
      const auto data = portfolio::prepare_dataset(prices, rc.dataset_options);
      const auto& test = data.split.test.returns;
      for (auto method : methods) {
        portfolio::EvaluationReport r;
        switch (method) {
          case portfolio::Method::Naive: r = portfolio::run_naive(data.model, test); break;
          case portfolio::Method::Fix:
            r = portfolio::run_fix(data.model, test, rc.fix);
            if (!r.converged) {
              err << "warning: " << name << ": fix did not reach tolerance " << rc.fix.tolerance
                  << " (residual " << r.residual << ")\n";
            }
            break;
          case portfolio::Method::SIGA: {
            const auto config = siga_config(overrides, portfolio::default_siga_config(data.model),
                                            data.model.m(), data.model.assets);
            r = portfolio::run_siga_portfolio(data.model, test, config).report;
            break;
          }
        }
        rows.push_back({name, method, std::move(r)});
      }
      const auto sr_in_of = [&](portfolio::Method m) -> std::optional<double> {
        for (const auto& row : rows) {
          if (row.dataset == name && row.method == m) return row.report.sr_in;
        }
        return std::nullopt;
      };
      const auto fix_sr = sr_in_of(portfolio::Method::Fix);
      const auto siga_sr = sr_in_of(portfolio::Method::SIGA);
      if (fix_sr && siga_sr && *siga_sr < *fix_sr - 1e-9) {
        err << "note: " << name << ": in-sample SR of siga (" << *siga_sr
            << ") is below fix (" << *fix_sr << ")\n";
      }
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      err << "error: " << source << ": " << e.what() << "\n";
      failed = true;
    }
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.dataset != b.dataset ? a.dataset < b.dataset : a.method < b.method;
  });
  std::string csv = "dataset,method,sr_in,sr_out,cr_out\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    const std::string method = portfolio::to_string(row.method);
    csv += row.dataset + "," + method + "," + io::format_number(r.sr_in) + "," +
           io::format_number(r.sr_out) + "," + io::format_number(r.cr_out) + "\n";
    io::write_text_file(join(rc.out, "weights_" + row.dataset + "_" + method + ".txt"),
                        weights_text(r.y_star));
  }
  io::write_text_file(join(rc.out, "bench.csv"), csv);
  out << csv;
  return failed ? kFailure : kOk;
}

int cmd_check(const std::string& selector, const std::optional<std::string>& fixture,
              const std::optional<std::string>& out_dir, std::uint64_t seed, std::ostream& out) {
  std::vector<BuiltinProblem> problems;
  if (fixture) {
    if (*fixture != "corrupted") throw UsageError("unknown fixture '" + *fixture + "'");
    problems.push_back(corrupted());
  } else {
    for (const auto& name : builtin_names()) problems.push_back(builtin_by_name(name));
  }
  std::vector<checks::ProbeReport> reports;
  try {
    reports = checks::run_suite(selector, problems, seed);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  for (const auto& r : reports) {
    out << (r.pass ? "PASS " : "FAIL ") << r.quantity << ": max " << io::format_number(r.max_observed)
        << " <= " << io::format_number(r.threshold) << " (" << r.samples << " samples)\n";
  }
  if (out_dir) {
    ensure_dir(*out_dir);
    io::write_text_file(join(*out_dir, "checks.json"), io::to_json(reports).dump(2) + "\n");
  }
  const bool ok = checks::all_pass(reports);
  out << (ok ? "all probes passed" : "some probes failed") << "\n";
  return ok ? kOk : kFailure;
}

int cmd_convert(const std::string& in, const std::string& out_path,
                const std::optional<std::string>& format, std::ostream& out) {
  if (!fs::exists(in)) throw UsageError("input not found: " + in);
  const auto fmt = format ? format_by_name(*format) : portfolio::PriceFormat::ORLibraryIndtrack;
  const auto prices = portfolio::parse_prices_file(in, fmt);
  std::ostringstream csv;
  portfolio::write_prices_csv(csv, prices);
  io::write_text_file(out_path, csv.str());
  out << "wrote " << prices.periods() << " x " << prices.assets() << " prices to " << out_path
      << "\n";
  return kOk;
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  RunConfig rc;
  try {
    if (j.contains("problem")) {
      const json& p = j.at("problem");
      if (p.contains("builtin") && p.contains("portfolio")) {
        throw UsageError("config: choose either problem.builtin or problem.portfolio");
      }
      read_if(p, "builtin", rc.builtin);
      if (p.contains("portfolio")) {
        const json& d = p.at("portfolio");
        rc.dataset = d.at("dataset").get<std::string>();
        if (d.contains("format")) rc.format = format_by_name(d.at("format").get<std::string>());
        auto& o = rc.dataset_options;
        if (d.contains("zero_frac_max")) o.zero_frac_max = d.at("zero_frac_max").get<double>();
        if (d.contains("top_k")) o.top_k = d.at("top_k").get<Index>();
        read_if(d, "train_frac", o.train_frac);
        read_if(d, "ridge", o.ridge);
        read_if(d, "nu", o.nu);
        read_if(d, "delta", o.delta);
        if (!(o.train_frac > 0.0 && o.train_frac < 1.0)) throw UsageError("config: train_frac must lie in (0, 1)");
        if (!(o.ridge >= 0.0)) throw UsageError("config: ridge must be nonnegative");
        if (!(o.nu > 0.0) || !(o.delta > 0.0)) throw UsageError("config: nu and delta must be positive");
      }
    }
    read_if(j, "kernel", rc.kernel);
    kernel_by_name(rc.kernel);
    if (j.contains("siga")) {
      rc.siga = j.at("siga");
      if (!rc.siga.is_object()) throw UsageError("config: siga must be an object");
    }
    if (j.contains("fix")) {
      read_if(j.at("fix"), "tolerance", rc.fix.tolerance);
      read_if(j.at("fix"), "max_iters", rc.fix.max_iters);
    }
    read_if(j, "out", rc.out);
    read_if(j, "seed", rc.seed);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  return parse_run_config(j);
}

SigaConfig<double> siga_config(const json& o, SigaConfig<double> c, Index m, Index n) {
  try {
    read_if(o, "mu0", c.mu0);
    read_if(o, "zeta0", c.zeta0);
    read_if(o, "tau0", c.tau0);
    read_if(o, "p", c.p);
    read_if(o, "max_outer_iters", c.max_outer_iters);
    read_if(o, "max_inner_iters", c.max_inner_iters);
    read_if(o, "min_inner_iters", c.min_inner_iters);
    read_if(o, "early_stop_epsilon", c.early_stop_epsilon);
    read_if(o, "clarke_grid_points", c.clarke_grid_points);
    if (o.contains("x0")) c.x0 = io::vector_from_json(o.at("x0"));
    if (o.contains("y0")) c.y0 = io::vector_from_json(o.at("y0"));
    c.validate(m, n);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config siga: ") + e.what());
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  return c;
}

SmoothingKernel<double> kernel_by_name(const std::string& name) {
  if (name == "chks") return SmoothingKernel<double>::chks();
  if (name == "uniform") return SmoothingKernel<double>::uniform();
  throw UsageError("unknown kernel '" + name + "' (expected chks or uniform)");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Smoothing implicit gradient solver for PVI-constrained problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<long> max_iters;
  auto* solve = app.add_subcommand("solve", "Run SIGA on a builtin or portfolio problem");
  solve->add_option("--config", config_path, "JSON run configuration")->required();
  solve->add_option("--out", out_dir, "Output directory (overrides config)");
  solve->add_option("--seed", seed, "Seed for sampled diagnostics");
  solve->add_option("--max-iters", max_iters, "Outer iteration budget")->check(CLI::NonNegativeNumber);

  std::vector<std::string> datasets;
  std::string methods = "naive,fix,siga";
  std::optional<std::string> bench_config;
  auto* bench = app.add_subcommand("bench", "Compare Naive, Fix and SIGA portfolios");
  bench->add_option("datasets", datasets, "Price files or synthetic:N:J:SEED")->required();
  bench->add_option("--methods", methods, "Comma-separated subset of naive,fix,siga");
  bench->add_option("--config", bench_config, "JSON run configuration");
  bench->add_option("--out", out_dir, "Output directory");
  bench->add_option("--seed", seed, "Unused; accepted for symmetry");
  bench->add_option("--max-iters", max_iters, "SIGA outer iteration budget")->check(CLI::NonNegativeNumber);

  std::string selector = "all";
  std::optional<std::string> fixture;
  std::uint64_t check_seed = 42;
  auto* check = app.add_subcommand("check", "Run verification probes");
  check->add_option("suite", selector, "gradients, smoothing, contraction or all");
  check->add_option("--fixture", fixture, "Replace the builtins by a fixture (corrupted)");
  check->add_option("--seed", check_seed, "Probe seed");
  check->add_option("--out", out_dir, "Directory for checks.json");

  std::string convert_in, convert_out;
  std::optional<std::string> convert_format;
  auto* convert = app.add_subcommand("convert-data", "Convert an indtrack price file to CSV");
  convert->add_option("input", convert_in)->required();
  convert->add_option("output", convert_out)->required();
  convert->add_option("--format", convert_format, "Input format: indtrack (default) or csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*solve) return cmd_solve(config_path, out_dir, seed, max_iters, out, err);
    if (*bench) return cmd_bench(datasets, methods, bench_config, out_dir, max_iters, out, err);
    if (*check) return cmd_check(selector, fixture, out_dir, check_seed, out);
    if (*convert) return cmd_convert(convert_in, convert_out, convert_format, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace siga::cli
