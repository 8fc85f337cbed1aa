#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "tmle/density.hpp"
#include "tmle/estimator.hpp"
#include "tmle/kr_map.hpp"
#include "tmle/metrics.hpp"
#include "tmle/rational_map.hpp"

namespace tmle {

using Json = nlohmann::json;

// %.17g: lossless for doubles; nan and inf spelled out.
std::string format_double(double v);

Json to_json(const DensitySpec& spec);
DensitySpec density_spec_from_json(const Json& j);

Json to_json(const LinkSpec& link);
LinkSpec link_spec_from_json(const Json& j);

Json to_json(const OptimizerSettings& opt);
OptimizerSettings optimizer_settings_from_json(const Json& j);

// {alpha, J, basis, dim, components: [[k, l, m, value], ...]} with k 1-based,
// m 1-based within level l; zero coefficients may be omitted.
Json to_json(const Theta& theta);
Theta theta_from_json(const Json& j);

Json to_json(const FitResult& result);
Json to_json(const MetricsReport& report);

// One row per point, coordinates at 17 significant digits, header x1,...,xd.
void write_samples_csv(std::ostream& out, const SampleSet& samples);
SampleSet read_samples_csv(std::istream& in);

// Reads a whole JSON file; ConfigError naming the path when it is missing or
// malformed.
Json read_json_file(const std::string& path, const std::string& what = "config file");
void write_text_file(const std::string& path, const std::string& text);

}  // namespace tmle
