#include "tmle/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tmle/error.hpp"

namespace tmle {

namespace {

template <class T>
T field(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Density specs

Json to_json(const DensitySpec& spec) {
  Json j{{"kind", to_string(spec.kind)}};
  switch (spec.kind) {
    case DensityKind::uniform:
      break;
    case DensityKind::linear_tilt:
      j["tilt"] = spec.tilt;
      break;
    case DensityKind::cosine_bump:
      j["amplitude"] = spec.amplitude;
      j["frequency"] = spec.frequency;
      break;
    case DensityKind::product_of_marginals: {
      Json m = Json::array();
      for (const auto& s : spec.marginals) m.push_back(to_json(s));
      j["marginals"] = m;
      break;
    }
    case DensityKind::nonproduct_coupling:
      j["strength"] = spec.strength;
      break;
  }
  return j;
}

DensitySpec density_spec_from_json(const Json& j) {
  const std::string where = "density";
  if (j.is_string()) return density_spec_from_json(Json{{"kind", j.get<std::string>()}});
  require_object(j, where);
  DensitySpec s;
  try {
    s.kind = density_kind_from_string(field<std::string>(j, "kind", "uniform", where));
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  s.tilt = field<double>(j, "tilt", s.tilt, where);
  s.amplitude = field<double>(j, "amplitude", s.amplitude, where);
  s.frequency = field<int>(j, "frequency", s.frequency, where);
  s.strength = field<double>(j, "strength", s.strength, where);
  s.smoothness = field<int>(j, "smoothness", s.smoothness, where);
  s.min_lower_bound = field<double>(j, "min_lower_bound", s.min_lower_bound, where);
  if (j.contains("marginals")) {
    if (!j.at("marginals").is_array()) throw ConfigError("density.marginals must be an array");
    for (const auto& m : j.at("marginals")) s.marginals.push_back(density_spec_from_json(m));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Link and optimizer

Json to_json(const LinkSpec& link) {
  return Json{{"k_min", link.k_min}, {"k_max", link.k_max}, {"calibrated", link.calibrated}};
}

LinkSpec link_spec_from_json(const Json& j) {
  require_object(j, "link");
  LinkSpec l;
  l.k_min = field<double>(j, "k_min", l.k_min, "link");
  l.k_max = field<double>(j, "k_max", l.k_max, "link");
  l.calibrated = field<bool>(j, "calibrated", l.calibrated, "link");
  return l;
}

Json to_json(const OptimizerSettings& opt) {
  return Json{{"max_iters", opt.max_iters},
              {"gradient_tolerance", opt.gradient_tolerance},
              {"memory", opt.memory},
              {"record_trace", opt.record_trace}};
}

OptimizerSettings optimizer_settings_from_json(const Json& j) {
  require_object(j, "optimizer");
  OptimizerSettings o;
  o.max_iters = field<int>(j, "max_iters", o.max_iters, "optimizer");
  o.gradient_tolerance = field<double>(j, "gradient_tolerance", o.gradient_tolerance, "optimizer");
  o.memory = field<int>(j, "memory", o.memory, "optimizer");
  o.record_trace = field<bool>(j, "record_trace", o.record_trace, "optimizer");
  return o;
}

// ---------------------------------------------------------------------------
// Theta

Json to_json(const Theta& theta) {
  const WaveletBasis& basis = theta.basis();
  Json comps = Json::array();
  for (std::size_t k = 0; k < theta.dim(); ++k) {
    const auto c = theta.component(k);
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] == 0.0) continue;
      comps.push_back(Json::array({k + 1, basis.level_of(k, i), basis.m_of(k, i), c[i]}));
    }
  }
  return Json{{"alpha", theta.alpha()},
              {"J", theta.max_level()},
              {"basis", to_string(basis.family())},
              {"dim", theta.dim()},
              {"components", comps}};
}

Theta theta_from_json(const Json& j) {
  require_object(j, "theta");
  for (const char* key : {"alpha", "J", "basis", "dim", "components"}) {
    if (!j.contains(key)) throw ConfigError(std::string("theta is missing \"") + key + "\"");
  }
  WaveletFamily family;
  try {
    family = wavelet_family_from_string(j.at("basis").get<std::string>());
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  } catch (const Json::exception&) {
    throw ConfigError("theta.basis must be a string");
  }
  const auto dim = field<std::size_t>(j, "dim", 0, "theta");
  const int level = field<int>(j, "J", -1, "theta");
  if (dim < 1) throw ConfigError("theta.dim must be at least 1");
  if (level < 0) throw ConfigError("theta.J must be non-negative");
  auto basis = std::make_shared<const WaveletBasis>(family, dim, level);
  Theta theta(basis, field<double>(j, "alpha", 0.0, "theta"));
  const Json& comps = j.at("components");
  if (!comps.is_array()) throw ConfigError("theta.components must be an array");
  for (std::size_t r = 0; r < comps.size(); ++r) {
    const Json& e = comps[r];
    if (!e.is_array() || e.size() != 4) throw ConfigError("theta.components[" + std::to_string(r) + "] must be [k, l, m, value]");
    try {
      const auto k = e[0].get<std::size_t>();
      const int l = e[1].get<int>();
      const auto m = e[2].get<std::size_t>();
      if (k < 1 || k > dim) throw ConfigError("theta.components[" + std::to_string(r) + "]: k out of range");
      theta.at(k - 1, l, m) = e[3].get<double>();
    } catch (const Json::exception&) {
      throw ConfigError("theta.components[" + std::to_string(r) + "] has a non-numeric entry");
    } catch (const ConfigError&) {
      throw;
    } catch (const InputError& ex) {
      throw ConfigError("theta.components[" + std::to_string(r) + "]: " + ex.what());
    }
  }
  return theta;
}

// ---------------------------------------------------------------------------
// Results

Json to_json(const FitResult& r) {
  Json j{{"theta", to_json(r.theta_hat)},
         {"objective_value", r.objective_value},
         {"initial_objective", r.initial_objective},
         {"iterations", r.iterations},
         {"converged", r.converged},
         {"gradient_norm_final", r.gradient_norm_final},
         {"termination", r.termination}};
  if (!r.objective_trace.empty()) j["objective_trace"] = r.objective_trace;
  return j;
}

Json to_json(const MetricsReport& m) {
  return Json{{"hellinger", m.hellinger},
              {"l2", m.l2},
              {"kl", m.kl},
              {"tv", m.tv},
              {"grid", {{"dim", m.grid.dim}, {"total_nodes", m.grid.total_nodes()}}}};
}

// ---------------------------------------------------------------------------
// Files

void write_samples_csv(std::ostream& out, const SampleSet& samples) {
  for (std::size_t k = 0; k < samples.dim; ++k) out << (k ? ",x" : "x") << k + 1;
  out << '\n';
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto x = samples.point(i);
    for (std::size_t k = 0; k < samples.dim; ++k) out << (k ? "," : "") << format_double(x[k]);
    out << '\n';
  }
}

SampleSet read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("sample CSV is empty");
  SampleSet s;
  s.dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        s.points.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InputError("sample CSV row " + std::to_string(row) + ": cannot parse \"" + cell + "\"");
      }
      ++cols;
    }
    if (cols != s.dim) throw InputError("sample CSV row " + std::to_string(row) + " has " + std::to_string(cols) + " columns");
  }
  return s;
}

Json read_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + what + ": " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed: " + path);
}

}  // namespace tmle
