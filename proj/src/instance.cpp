#include "sep/instance.hpp"

#include <stdexcept>

namespace sep {

void to_json(nlohmann::json& j, const InstanceFile& f) {
  j = nlohmann::json{{"lambda", f.lambda},
                     {"mu", f.mu},
                     {"options",
                      {{"tolerance", f.options.tolerance},
                       {"mc_paths", f.options.mc_paths},
                       {"seed", f.options.seed},
                       {"dt_root_rost", f.options.dt_root_rost}}}};
}

void from_json(const nlohmann::json& j, InstanceFile& f) {
  if (!j.is_object()) throw std::invalid_argument("instance: expected object");
  for (const auto& [key, _] : j.items()) {
    if (key != "lambda" && key != "mu" && key != "options")
      throw std::invalid_argument("instance: unknown key '" + key + "'");
  }
  f = InstanceFile{};
  f.lambda = j.at("lambda").get<DiscreteMeasure>();
  f.mu = j.at("mu").get<DiscreteMeasure>();
  if (j.contains("options")) {
    const auto& jo = j.at("options");
    for (const auto& [key, _] : jo.items()) {
      if (key != "tolerance" && key != "mc_paths" && key != "seed" &&
          key != "dt_root_rost")
        throw std::invalid_argument("instance: unknown option '" + key + "'");
    }
    if (jo.contains("tolerance")) f.options.tolerance = jo.at("tolerance").get<double>();
    if (jo.contains("mc_paths")) f.options.mc_paths = jo.at("mc_paths").get<std::int64_t>();
    if (jo.contains("seed")) f.options.seed = jo.at("seed").get<std::uint64_t>();
    if (jo.contains("dt_root_rost"))
      f.options.dt_root_rost = jo.at("dt_root_rost").get<double>();
    if (f.options.tolerance <= 0.0)
      throw std::invalid_argument("instance: tolerance must be > 0");
    if (f.options.mc_paths < 1)
      throw std::invalid_argument("instance: mc_paths must be >= 1");
    if (f.options.dt_root_rost <= 0.0)
      throw std::invalid_argument("instance: dt_root_rost must be > 0");
  }
}

InstanceFile example_instance(double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("example_instance: alpha in [0, 1]");
  InstanceFile f;
  f.lambda = DiscreteMeasure({{-1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}});
  f.mu = DiscreteMeasure(
      {{-2.0, 0.5 * (1.0 - alpha)}, {0.0, alpha}, {2.0, 0.5 * (1.0 - alpha)}});
  return f;
}

}  // namespace sep
