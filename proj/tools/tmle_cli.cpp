#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "tmle/error.hpp"
#include "tmle/experiment.hpp"
#include "tmle/io.hpp"
#include "tmle/kernels.hpp"
#include "tmle/kr_map.hpp"
#include "tmle/metrics.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace tmle;

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  ensure_parent(out);
  write_text_file(out, text);
}

void require_config(const std::string& path) {
  if (path.empty()) throw ConfigError("--config is required");
}

SampleSet draw(const ExperimentConfig& config, std::size_t n, std::uint64_t seed) {
  const DensityField truth = make_test_density(config.density, config.dim);
  const FactorizedDensity ref = make_factorized_density(config.reference, config.dim);
  const auto kr = KrMap::build(truth, ref);
  return sample_target(*kr, ref, n, seed);
}

int cmd_oracle(const std::string& config_path) {
  require_config(config_path);
  const ExperimentConfig config = load_experiment_config(config_path);
  const OracleReport report = run_oracle_check(config);
  std::cout << to_json(report).dump(2) << '\n';
  return 0;
}

int cmd_fit(const std::string& config_path, long long n, std::uint64_t seed, const std::string& out) {
  if (n <= 0) throw ConfigError("n must be positive");
  require_config(config_path);
  const ExperimentConfig config = load_experiment_config(config_path);
  const SampleSet data = draw(config, static_cast<std::size_t>(n), seed);
  const FitConfig fc = config.fit_config(static_cast<std::size_t>(n));
  const FitResult result = fit(data, make_factorized_density(config.reference, config.dim), fc);
  Json j = to_json(result);
  j["n"] = n;
  j["seed"] = seed;
  j["lambda"] = fc.lambda;
  j["link"] = to_json(fc.link);
  emit(j.dump(2) + "\n", out);
  if (!result.converged) std::cerr << "warning: optimizer did not converge (" << result.termination << ")\n";
  return 0;
}

int cmd_rates(const std::string& config_path, const std::string& out_dir) {
  require_config(config_path);
  const ExperimentConfig config = load_experiment_config(config_path);
  const std::string dir = out_dir.empty() ? config.output : out_dir;
  const RateStudy study = run_rate_study(config);
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  write_rates_csv(csv, study.rows);
  write_text_file((std::filesystem::path(dir) / "rates.csv").string(), csv.str());
  Json summary = to_json(study.summary);
  summary["config"] = to_json(config);
  write_text_file((std::filesystem::path(dir) / "summary.json").string(), summary.dump(2) + "\n");
  std::cout << "theoretical slope " << format_double(study.summary.theoretical_slope) << '\n';
  for (const auto& s : study.summary.slopes) {
    std::cout << s.metric << " slope " << format_double(s.slope) << " r2 " << format_double(s.r_squared)
              << " excluded " << s.excluded << '\n';
  }
  std::cout << "wrote " << (std::filesystem::path(dir) / "rates.csv").string() << '\n';
  return 0;
}

int cmd_sample(const std::string& config_path, long long n, std::uint64_t seed, const std::string& out) {
  if (n <= 0) throw ConfigError("n must be positive");
  require_config(config_path);
  const ExperimentConfig config = load_experiment_config(config_path);
  const SampleSet data = draw(config, static_cast<std::size_t>(n), seed);
  std::ostringstream csv;
  write_samples_csv(csv, data);
  emit(csv.str(), out);
  return 0;
}

int cmd_metrics(const std::string& config_path, const std::string& theta_path) {
  require_config(config_path);
  if (theta_path.empty()) throw ConfigError("--theta is required");
  const ExperimentConfig config = load_experiment_config(config_path);
  Json j = read_json_file(theta_path, "theta file");
  if (j.contains("theta")) j = j.at("theta");
  const Theta theta = theta_from_json(j);
  if (theta.dim() != config.dim) throw ConfigError("theta dimension does not match the config");
  const DensityField truth = make_test_density(config.density, config.dim);
  const FactorizedDensity ref = make_factorized_density(config.reference, config.dim);
  FitConfig fc = config.fit_config(1);
  const auto map = fitted_map(theta, fc);
  const DensityField q = pullback_density(map, ref.as_field());
  const GridSpec grid = GridSpec::default_for(config.dim);
  const MetricsReport report = compare_densities(truth, q, grid);
  const auto kr = KrMap::build(truth, ref);
  Json out = to_json(report);
  out["h1diag"] = h1diag_map_distance(*map, *kr, grid);
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transport-map density estimation: KR oracle, penalized MLE fits and rate studies"};
  app.set_version_flag("--version", std::string("tmle ") + kVersion + " (" + std::string(kernels::isa_name(kernels::active().isa)) + " kernels)");
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string theta;
  long long n = 0;
  std::uint64_t seed = 0;

  auto* oracle = app.add_subcommand("oracle-check", "Build the KR map for the config and report residuals");
  oracle->add_option("--config", config, "Experiment JSON config");

  auto* fitc = app.add_subcommand("fit", "Sample N points from the config density and fit");
  fitc->add_option("--config", config, "Experiment JSON config");
  fitc->add_option("--n", n, "Sample size");
  fitc->add_option("--seed", seed, "Sampling seed");
  fitc->add_option("--out", out, "Output JSON (stdout when absent)");

  auto* rates = app.add_subcommand("rates", "Run the rate study; writes rates.csv and summary.json");
  rates->add_option("--config", config, "Experiment JSON config");
  rates->add_option("--out", out, "Output directory (config output when absent)");

  auto* sample = app.add_subcommand("sample", "Draw samples from the config density via the KR map");
  sample->add_option("--config", config, "Experiment JSON config");
  sample->add_option("--n", n, "Sample size");
  sample->add_option("--seed", seed, "Sampling seed");
  sample->add_option("--out", out, "Output CSV (stdout when absent)");

  auto* metrics = app.add_subcommand("metrics", "Metrics of a fitted theta against the config density");
  metrics->add_option("--config", config, "Experiment JSON config");
  metrics->add_option("--theta", theta, "Theta JSON (or fit output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (oracle->parsed()) return cmd_oracle(config);
    if (fitc->parsed()) return cmd_fit(config, n, seed, out);
    if (rates->parsed()) return cmd_rates(config, out);
    if (sample->parsed()) return cmd_sample(config, n, seed, out);
    if (metrics->parsed()) return cmd_metrics(config, theta);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
