#pragma once

#include <cstdint>

#include <json.hpp>

#include "sep/measure.hpp"

namespace sep {

struct InstanceOptions {
  double tolerance = 1e-10;
  std::int64_t mc_paths = 1'000'000;
  std::uint64_t seed = 42;
  double dt_root_rost = 1e-4;
  bool operator==(const InstanceOptions&) const = default;
};

struct InstanceFile {
  DiscreteMeasure lambda;
  DiscreteMeasure mu;
  InstanceOptions options;
  bool operator==(const InstanceFile&) const = default;
};

void to_json(nlohmann::json& j, const InstanceFile& f);
void from_json(const nlohmann::json& j, InstanceFile& f);  // rejects unknown keys

// The three-atom family: lambda = 1/4 d(-1) + 1/2 d(0) + 1/4 d(1),
// mu = (1-alpha)/2 d(-2) + alpha d(0) + (1-alpha)/2 d(2).
InstanceFile example_instance(double alpha);

}  // namespace sep
