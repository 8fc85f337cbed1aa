#include "tmle/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <set>

#include "tmle/error.hpp"
#include "tmle/kr_map.hpp"
#include "tmle/metrics.hpp"
#include "tmle/rational_map.hpp"

namespace tmle {

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
  if (dim < 1 || dim > 3) throw ConfigError("dim must be 1, 2 or 3");
  if (!(alpha >= 1.0) || !std::isfinite(alpha) || alpha != std::floor(alpha)) {
    throw ConfigError("alpha must be an integer >= 1");
  }
  if (replicates < 1) throw ConfigError("replicates must be at least 1");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] == 0) throw ConfigError("n_grid entries must be positive");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("n_grid must be strictly increasing");
  }
  if (schedule.lambda && !(*schedule.lambda >= 0.0)) throw ConfigError("schedule.lambda must be non-negative");
  if (schedule.max_level && *schedule.max_level < 0) throw ConfigError("schedule.J must be non-negative");
  if (density.kind == DensityKind::nonproduct_coupling && dim < 2) {
    throw ConfigError("nonproduct_coupling needs dim >= 2");
  }
  if (reference.kind == DensityKind::nonproduct_coupling) {
    throw ConfigError("unsupported reference: the reference density must factorize");
  }
  FitConfig probe = fit_config(n_grid.empty() ? 1 : n_grid.front());
  probe.validate();
}

FitConfig ExperimentConfig::fit_config(std::size_t n) const {
  const Schedule s = tuning_schedule(n, alpha, dim);
  FitConfig c;
  c.alpha = alpha;
  c.lambda = schedule.lambda.value_or(s.lambda);
  c.max_level = schedule.max_level.value_or(s.max_level);
  c.family = basis;
  c.link = link;
  c.optimizer = optimizer;
  return c;
}

namespace {

const std::set<std::string> kConfigKeys = {"density", "reference", "alpha",    "dim",       "n_grid",
                                           "replicates", "seed",   "link",     "basis",     "schedule",
                                           "output",  "optimizer", "record_timing"};

template <class T>
T get(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("config field \"") + key + "\" has the wrong type");
  }
}

}  // namespace

ExperimentConfig experiment_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kConfigKeys.contains(key)) throw ConfigError("unknown config field \"" + key + "\"");
  }
  ExperimentConfig c;
  if (j.contains("density")) c.density = density_spec_from_json(j.at("density"));
  if (j.contains("reference")) c.reference = density_spec_from_json(j.at("reference"));
  c.alpha = get<double>(j, "alpha", c.alpha);
  const auto dim = get<long long>(j, "dim", 1);
  if (dim < 1) throw ConfigError("dim must be at least 1");
  c.dim = static_cast<std::size_t>(dim);
  if (j.contains("n_grid")) {
    if (!j.at("n_grid").is_array()) throw ConfigError("n_grid must be an array");
    for (const auto& v : j.at("n_grid")) {
      if (!v.is_number_integer() || v.get<long long>() <= 0) throw ConfigError("n_grid entries must be positive integers");
      c.n_grid.push_back(v.get<std::size_t>());
    }
  }
  c.replicates = get<int>(j, "replicates", c.replicates);
  c.seed = get<std::uint64_t>(j, "seed", c.seed);
  if (j.contains("link")) c.link = link_spec_from_json(j.at("link"));
  try {
    c.basis = wavelet_family_from_string(get<std::string>(j, "basis", to_string(c.basis)));
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("schedule") && !j.at("schedule").is_null()) {
    const Json& s = j.at("schedule");
    if (!s.is_object()) throw ConfigError("schedule must be an object");
    if (s.contains("lambda") && !s.at("lambda").is_null()) c.schedule.lambda = get<double>(s, "lambda", 0.0);
    if (s.contains("J") && !s.at("J").is_null()) c.schedule.max_level = get<int>(s, "J", 0);
  }
  c.output = get<std::string>(j, "output", c.output);
  if (j.contains("optimizer")) c.optimizer = optimizer_settings_from_json(j.at("optimizer"));
  c.record_timing = get<bool>(j, "record_timing", c.record_timing);
  c.validate();
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json s = Json::object();
  s["lambda"] = c.schedule.lambda ? Json(*c.schedule.lambda) : Json(nullptr);
  s["J"] = c.schedule.max_level ? Json(*c.schedule.max_level) : Json(nullptr);
  return Json{{"density", to_json(c.density)},
              {"reference", to_json(c.reference)},
              {"alpha", c.alpha},
              {"dim", c.dim},
              {"n_grid", c.n_grid},
              {"replicates", c.replicates},
              {"seed", c.seed},
              {"link", to_json(c.link)},
              {"basis", to_string(c.basis)},
              {"schedule", s},
              {"output", c.output},
              {"optimizer", to_json(c.optimizer)},
              {"record_timing", c.record_timing}};
}

ExperimentConfig load_experiment_config(const std::string& path) {
  const Json j = read_json_file(path);
  try {
    return experiment_config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Oracle check

OracleReport run_oracle_check(const ExperimentConfig& config, std::size_t roundtrip_points) {
  config.validate();
  const std::size_t d = config.dim;
  const DensityField truth = make_test_density(config.density, d);
  const FactorizedDensity ref = make_factorized_density(config.reference, d);
  const auto kr = KrMap::build(truth, ref);
  const DensityField pulled = pullback_density(kr, ref.as_field());

  OracleReport report;
  const TensorGrid grid = make_tensor_grid(GridSpec::default_for(d));
  report.probe_nodes = grid.size();
  report.monotonicity_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.point(i);
    report.pushforward_sup_error = std::max(report.pushforward_sup_error, std::fabs(pulled(x) - truth(x)));
    for (std::size_t k = 0; k < d; ++k) {
      report.monotonicity_min = std::min(report.monotonicity_min, kr->diagonal_partial(k, x));
    }
  }

  std::mt19937_64 rng(config.seed);
  std::vector<double> x(d);
  std::vector<double> z(d);
  for (std::size_t i = 0; i < roundtrip_points; ++i) {
    for (auto& v : x) v = unit_uniform(rng());
    kr->evaluate(x, z);
    const std::vector<double> back = invert_triangular(*kr, z);
    for (std::size_t k = 0; k < d; ++k) {
      report.roundtrip_residual = std::max(report.roundtrip_residual, std::fabs(back[k] - x[k]));
    }
  }
  report.roundtrip_points = roundtrip_points;
  return report;
}

Json to_json(const OracleReport& r) {
  return Json{{"pushforward_sup_error", r.pushforward_sup_error},
              {"monotonicity_min", r.monotonicity_min},
              {"roundtrip_residual", r.roundtrip_residual},
              {"probe_nodes", r.probe_nodes},
              {"roundtrip_points", r.roundtrip_points}};
}

// ---------------------------------------------------------------------------
// Rate study

const std::vector<std::string>& rate_metrics() {
  static const std::vector<std::string> names = {"h1diag", "hellinger", "kl", "l2", "tau2"};
  return names;
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t n_index, int replicate) {
  std::uint64_t z = (static_cast<std::uint64_t>(n_index) << 32) | static_cast<std::uint32_t>(replicate);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return seed ^ z;
}

const MetricSlope& RateSummary::slope(const std::string& metric) const {
  for (const auto& s : slopes) {
    if (s.metric == metric) return s;
  }
  throw InputError("no slope recorded for metric " + metric);
}

RateSummary summarize(const std::vector<ResultRow>& rows, double alpha, std::size_t dim) {
  RateSummary summary;
  summary.theoretical_slope = -alpha / (2.0 * alpha + static_cast<double>(dim));
  std::vector<std::size_t> ns;
  for (const auto& r : rows) ns.push_back(r.n);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  for (const auto& metric : rate_metrics()) {
    MetricSlope s;
    s.metric = metric;
    std::vector<std::pair<double, double>> points;
    for (std::size_t n : ns) {
      std::vector<double> values;
      for (const auto& r : rows) {
        if (r.n != n || r.metric != metric) continue;
        if (r.converged && std::isfinite(r.value)) {
          values.push_back(r.value);
        } else {
          ++s.excluded;
        }
      }
      if (values.empty()) continue;
      std::sort(values.begin(), values.end());
      const std::size_t h = values.size() / 2;
      const double med = values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
      s.n.push_back(n);
      s.median.push_back(med);
      points.emplace_back(static_cast<double>(n), med);
    }
    s.slope = s.intercept = s.r_squared = std::numeric_limits<double>::quiet_NaN();
    try {
      const RateFit fit = rate_fit(points);
      s.slope = fit.slope;
      s.intercept = fit.intercept;
      s.r_squared = fit.r_squared;
    } catch (const InputError&) {
    }
    summary.slopes.push_back(std::move(s));
  }
  return summary;
}

RateStudy run_rate_study(const ExperimentConfig& config) {
  config.validate();
  if (config.n_grid.empty()) throw ConfigError("rate study needs a non-empty n_grid");
  const std::size_t d = config.dim;
  const DensityField truth = make_test_density(config.density, d);
  const FactorizedDensity ref = make_factorized_density(config.reference, d);
  const DensityField eta = ref.as_field();
  const auto kr = KrMap::build(truth, ref);
  const GridSpec grid = GridSpec::default_for(d);
  const TensorGrid nodes = make_tensor_grid(grid);
  std::vector<double> truth_values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) truth_values[i] = truth(nodes.point(i));

  RateStudy study;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    const std::size_t n = config.n_grid[ni];
    const FitConfig fc = config.fit_config(n);
    for (int rep = 0; rep < config.replicates; ++rep) {
      const std::uint64_t seed = replicate_seed(config.seed, ni, rep);
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<double> values(rate_metrics().size(), nan);
      bool converged = false;
      try {
        const SampleSet data = sample_target(*kr, ref, n, seed);
        const FitResult result = fit(data, ref, fc);
        converged = result.converged;
        const auto map = fitted_map(result.theta_hat, fc);
        const DensityField q = pullback_density(map, eta);
        std::vector<double> q_values(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) q_values[i] = q(nodes.point(i));
        const MetricsReport m = compare_tabulated(nodes.weights, truth_values, q_values, grid);
        const double norm = b_alpha_norm(result.theta_hat, config.alpha);
        values[0] = h1diag_map_distance(*map, *kr, grid);
        values[1] = m.hellinger;
        values[2] = m.kl;
        values[3] = m.l2;
        values[4] = m.hellinger * m.hellinger + fc.lambda * fc.lambda * norm * norm;
      } catch (const NumericalError&) {
        converged = false;
      }
      const double wall =
          config.record_timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() : 0.0;
      for (std::size_t m = 0; m < values.size(); ++m) {
        study.rows.push_back(ResultRow{n, rep, seed, rate_metrics()[m], values[m], fc.lambda, fc.max_level, wall,
                                       converged});
      }
    }
  }
  std::stable_sort(study.rows.begin(), study.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.n != b.n) return a.n < b.n;
    if (a.replicate != b.replicate) return a.replicate < b.replicate;
    return a.metric < b.metric;
  });
  study.summary = summarize(study.rows, config.alpha, d);
  return study;
}

void write_rates_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "n,replicate,seed,metric,value,lambda,j_level,wall_time_s,converged\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.replicate << ',' << r.seed << ',' << r.metric << ',' << format_double(r.value) << ','
        << format_double(r.lambda) << ',' << r.j_level << ',' << format_double(r.wall_time_s) << ','
        << (r.converged ? "true" : "false") << '\n';
  }
}

Json to_json(const RateSummary& summary) {
  Json metrics = Json::object();
  for (const auto& s : summary.slopes) {
    const auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
    metrics[s.metric] = Json{{"slope", num(s.slope)},
                             {"intercept", num(s.intercept)},
                             {"r_squared", num(s.r_squared)},
                             {"n", s.n},
                             {"median", s.median},
                             {"excluded", s.excluded}};
  }
  return Json{{"theoretical_slope", summary.theoretical_slope}, {"metrics", metrics}};
}

}  // namespace tmle
