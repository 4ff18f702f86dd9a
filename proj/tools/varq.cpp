// varq: audit A/A-test t-statistics and simulate variance-quality metric power.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "varq/commands.hpp"
#include "varq/errors.hpp"
#include "varq/io.hpp"

namespace {

using varq::ExitCode;

struct SourceFlag {
  std::string text;

  varq::SourceDistribution parse() const {
    // kind:a:b, e.g. uniform:5:6 or normal:0:1
    const auto first = text.find(':');
    const auto second = text.find(':', first == std::string::npos ? first : first + 1);
    if (first == std::string::npos || second == std::string::npos) {
      throw varq::ValidationError("--source expects kind:a:b, got '" + text + "'");
    }
    const auto kind = text.substr(0, first);
    double a = 0, b = 0;
    try {
      a = std::stod(text.substr(first + 1, second - first - 1));
      b = std::stod(text.substr(second + 1));
    } catch (const std::exception&) {
      throw varq::ValidationError("--source parameters must be numbers: '" + text + "'");
    }
    if (kind == "uniform") return varq::SourceDistribution::uniform(a, b);
    if (kind == "normal") return varq::SourceDistribution::normal(a, b);
    throw varq::ValidationError("--source kind must be uniform or normal");
  }
};

struct SidednessFlags {
  std::string all = "two";
  std::optional<std::string> fpr, avg_t2, kurtosis;

  void add(CLI::App* app) {
    app->add_option("--sidedness", all, "z-test sidedness for every metric")
        ->check(CLI::IsMember({"two", "greater"}));
    app->add_option("--fpr-sidedness", fpr)->check(CLI::IsMember({"two", "greater"}));
    app->add_option("--avg-t2-sidedness", avg_t2)->check(CLI::IsMember({"two", "greater"}));
    app->add_option("--kurtosis-sidedness", kurtosis)->check(CLI::IsMember({"two", "greater"}));
  }

  varq::MetricSidedness resolve() const {
    return {varq::parse_sidedness(fpr.value_or(all)), varq::parse_sidedness(avg_t2.value_or(all)),
            varq::parse_sidedness(kurtosis.value_or(all))};
  }
};

std::vector<double> parse_reals(const std::string& list) {
  std::vector<double> out;
  std::stringstream in(list);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw varq::ValidationError("not a number: '" + item + "'");
    }
  }
  return out;
}

std::vector<std::size_t> parse_counts(const std::string& list) {
  std::vector<std::size_t> out;
  for (const double v : parse_reals(list)) {
    if (v < 1 || v != std::floor(v)) throw varq::ValidationError("n grid entries must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variance-quality metrics for A/A tests: audit, sweep, plotdata, simulate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", varq::artifact_version());

  // audit
  auto* audit = app.add_subcommand("audit", "Audit a file of t-statistics (experiment_id,t)");
  std::string audit_input;
  varq::AuditOptions audit_opts;
  SidednessFlags audit_sided;
  std::string audit_format = "text";
  std::optional<std::string> audit_out;
  audit->add_option("input", audit_input, "t-statistic file")->required();
  audit->add_option("--alpha", audit_opts.alpha, "significance level of the meta-tests");
  audit->add_option("--ci-level", audit_opts.ci_level, "confidence level of the audited intervals");
  audit_sided.add(audit);
  audit->add_option("--format", audit_format)->check(CLI::IsMember({"text", "json"}));
  audit->add_option("--out", audit_out, "also write the JSON report here");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run the power / sample-complexity / efficiency sweep");
  std::optional<std::string> manifest_path;
  std::string sweep_out = "sweep-out";
  std::optional<std::string> thetas, n_grid, metrics, targets, interp, mode, source;
  std::optional<std::size_t> n_min, n_max, n_count, trials, group_size;
  std::optional<double> alpha, ci_level;
  std::optional<std::uint64_t> seed;
  bool fast = false;
  SidednessFlags sweep_sided;
  unsigned sweep_workers = default_workers();
  sweep->add_option("--manifest", manifest_path, "replay a manifest (manifest.json or sweep.json)");
  sweep->add_option("--theta", thetas, "comma-separated noise levels");
  sweep->add_option("--n-grid", n_grid, "comma-separated numbers of tests");
  sweep->add_option("--n-min", n_min);
  sweep->add_option("--n-max", n_max);
  sweep->add_option("--n-count", n_count, "log-spaced grid from --n-min to --n-max");
  sweep->add_option("--trials", trials);
  sweep->add_option("--metrics", metrics, "comma-separated subset of FPR,AVG_T2,KURTOSIS");
  sweep->add_option("--target-powers", targets, "comma-separated powers for inversion");
  sweep->add_option("--interp", interp)->check(CLI::IsMember({"first-crossing", "isotonic"}));
  sweep->add_option("--mode", mode)->check(CLI::IsMember({"full", "fast"}));
  sweep->add_flag("--fast", fast, "shorthand for --mode fast");
  sweep->add_option("--group-size", group_size);
  sweep->add_option("--source", source, "kind:a:b, e.g. uniform:5:6");
  sweep->add_option("--alpha", alpha);
  sweep->add_option("--ci-level", ci_level);
  sweep->add_option("--seed", seed);
  sweep_sided.add(sweep);
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--workers", sweep_workers)->check(CLI::PositiveNumber);

  // plotdata
  auto* plot = app.add_subcommand("plotdata", "Write per-theta figure series from sweep outputs");
  std::string plot_in;
  std::optional<std::string> plot_out;
  plot->add_option("sweep_dir", plot_in)->required();
  plot->add_option("--out", plot_out, "output directory (default: <sweep_dir>/plot)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Write simulated A/A t-statistics as a t-statistic file");
  varq::ExperimentConfig sim;
  std::string sim_mode = "full";
  std::optional<std::string> sim_source, sim_out;
  unsigned sim_workers = default_workers();
  simulate->add_option("--theta", sim.noise.theta);
  simulate->add_option("--n", sim.n_tests, "number of A/A tests")->required();
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--mode", sim_mode)->check(CLI::IsMember({"full", "fast"}));
  simulate->add_option("--group-size", sim.group_size);
  simulate->add_option("--source", sim_source, "kind:a:b, e.g. uniform:5:6");
  simulate->add_option("--out", sim_out, "output file (default: stdout)");
  simulate->add_option("--workers", sim_workers)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::Validation);
  }

  try {
    if (*audit) {
      audit_opts.sidedness = audit_sided.resolve();
      const auto report = varq::cmd_audit(audit_input, audit_opts);
      const auto json = varq::to_json(report);
      if (audit_out) varq::write_file_atomic(*audit_out, json.dump(2) + "\n");
      std::cout << (audit_format == "json" ? json.dump(2) + "\n" : varq::render_text(report));
    } else if (*sweep) {
      varq::RunManifest manifest;
      if (manifest_path) {
        std::ifstream in(*manifest_path);
        if (!in) throw varq::DependencyError("cannot open manifest " + *manifest_path);
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
          throw varq::ParseError(*manifest_path, 0, e.what());
        }
        manifest = varq::manifest_from_json(doc);
      }
      auto& cfg = manifest.config;
      if (thetas) manifest.sweep.thetas = parse_reals(*thetas);
      if (n_grid) manifest.sweep.n_grid = parse_counts(*n_grid);
      if (n_min || n_max || n_count) {
        manifest.sweep.n_grid = varq::log_spaced_grid(n_min.value_or(100), n_max.value_or(10000), n_count.value_or(30));
      }
      if (trials) manifest.sweep.trials = *trials;
      if (metrics) {
        manifest.sweep.metrics.clear();
        std::stringstream in(*metrics);
        for (std::string name; std::getline(in, name, ',');) {
          try {
            manifest.sweep.metrics.push_back(varq::parse_metric_kind(name));
          } catch (const std::invalid_argument& e) {
            throw varq::ValidationError(e.what());
          }
        }
      }
      if (targets) manifest.target_powers = parse_reals(*targets);
      if (interp) manifest.interpolation = varq::parse_interpolation(*interp);
      if (mode) cfg.mode = varq::parse_simulation_mode(*mode);
      if (fast) cfg.mode = varq::SimulationMode::FastPath;
      if (group_size) cfg.group_size = *group_size;
      if (source) cfg.source = SourceFlag{*source}.parse();
      if (alpha) cfg.alpha = *alpha;
      if (ci_level) cfg.ci_level = *ci_level;
      if (seed) cfg.seed = *seed;
      if (sweep->count("--sidedness") || sweep_sided.fpr || sweep_sided.avg_t2 || sweep_sided.kurtosis) {
        cfg.sidedness = sweep_sided.resolve();
      }
      const auto result = varq::cmd_sweep(manifest, sweep_out, sweep_workers);
      const auto& d = result.manifest.diagnostics;
      std::cout << "wrote " << sweep_out << "/{power,complexity,efficiency}.csv, sweep.json, manifest.json\n"
                << "curves: " << result.sweep.curves.size() << ", degenerate batches: " << d.degenerate_batches
                << ", NOT_REACHED: " << d.not_reached << ", UNDEFINED: " << d.undefined_efficiency << "\n";
    } else if (*plot) {
      const std::filesystem::path out = plot_out ? std::filesystem::path(*plot_out)
                                                 : std::filesystem::path(plot_in) / "plot";
      const auto summary = varq::cmd_plotdata(plot_in, out);
      std::cout << "wrote " << summary.figure1_files.size() << " figure-1 and " << summary.figure2_files.size()
                << " figure-2 series files to " << out.string() << "; omitted " << summary.omitted_undefined
                << " UNDEFINED efficiency points\n";
    } else if (*simulate) {
      sim.mode = varq::parse_simulation_mode(sim_mode);
      if (sim_source) sim.source = SourceFlag{*sim_source}.parse();
      std::string text;
      std::optional<std::filesystem::path> out;
      if (sim_out) out = *sim_out;
      varq::cmd_simulate(sim, out, sim_workers, sim_out ? nullptr : &text);
      if (!sim_out) std::cout << text;
    }
  } catch (const varq::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Parse);
  } catch (const varq::DependencyError& e) {
    std::cerr << "dependency error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Dependency);
  } catch (const varq::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Validation);
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Validation);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Runtime);
  }
  return static_cast<int>(ExitCode::Ok);
}
