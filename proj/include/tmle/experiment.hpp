#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tmle/density.hpp"
#include "tmle/estimator.hpp"
#include "tmle/io.hpp"
#include "tmle/wavelet.hpp"

namespace tmle {

struct ScheduleOverride {
  std::optional<double> lambda;
  std::optional<int> max_level;
};

struct ExperimentConfig {
  DensitySpec density{};
  DensitySpec reference{};
  double alpha = 2.0;
  std::size_t dim = 1;
  std::vector<std::size_t> n_grid;
  int replicates = 1;
  std::uint64_t seed = 0;
  LinkSpec link{};
  WaveletFamily basis = WaveletFamily::haar;
  ScheduleOverride schedule{};
  std::string output = ".";
  OptimizerSettings optimizer{};
  // Wall times are written as 0 unless set, keeping reruns byte-identical.
  bool record_timing = false;

  void validate() const;
  // Fit configuration for sample size n: paper schedule unless overridden.
  FitConfig fit_config(std::size_t n) const;
};

ExperimentConfig experiment_config_from_json(const Json& j);
Json to_json(const ExperimentConfig& config);
// ConfigError naming the path when the file is missing or invalid.
ExperimentConfig load_experiment_config(const std::string& path);

struct OracleReport {
  // sup over the probe grid of |eta(S(x)) det grad S(x) - p0(x)|
  double pushforward_sup_error = 0.0;
  // min over the probe grid of every diagonal partial
  double monotonicity_min = 0.0;
  // max over random points of |S^{-1}(S(x)) - x|_inf
  double roundtrip_residual = 0.0;
  std::size_t probe_nodes = 0;
  std::size_t roundtrip_points = 0;
};

OracleReport run_oracle_check(const ExperimentConfig& config, std::size_t roundtrip_points = 1000);
Json to_json(const OracleReport& report);

struct ResultRow {
  std::size_t n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
  double lambda = 0.0;
  int j_level = 0;
  double wall_time_s = 0.0;
  bool converged = false;
};

struct MetricSlope {
  std::string metric;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::size_t> n;
  std::vector<double> median;
  std::size_t excluded = 0;  // non-converged or failed replicates
};

struct RateSummary {
  double theoretical_slope = 0.0;  // -alpha / (2 alpha + d)
  std::vector<MetricSlope> slopes;

  const MetricSlope& slope(const std::string& metric) const;
};

struct RateStudy {
  std::vector<ResultRow> rows;
  RateSummary summary;
};

// Metric names recorded for every (N, replicate), in CSV order.
const std::vector<std::string>& rate_metrics();

// seed xor splitmix64((n_index << 32) | replicate)
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t n_index, int replicate);

RateStudy run_rate_study(const ExperimentConfig& config);
RateSummary summarize(const std::vector<ResultRow>& rows, double alpha, std::size_t dim);

void write_rates_csv(std::ostream& out, const std::vector<ResultRow>& rows);
Json to_json(const RateSummary& summary);

}  // namespace tmle
