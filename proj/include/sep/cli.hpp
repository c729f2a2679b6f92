#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sep/calibration.hpp"

namespace sep {

void to_json(nlohmann::json& j, const CalibrationResult& r);

namespace cli {

// Exit codes shared by all subcommands:
//   0 success, 1 I/O or parse failure, 2 convex-order violation,
//   3 no-progress / non-terminating engine, 4 verification failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 1;
inline constexpr int kExitConvexOrder = 2;
inline constexpr int kExitNoProgress = 3;
inline constexpr int kExitVerifyFailed = 4;

struct CommonFlags {
  double tol = -1.0;  // <= 0: use the instance file's tolerance
  std::int64_t mc_paths = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  double dt = -1.0;
};

int cmd_calibrate(const std::string& instance_path, const CommonFlags& flags,
                  const std::string& out_path);

int cmd_example(double alpha, const std::string& out_dir, const CommonFlags& flags);

int cmd_compare(const std::string& instance_path, const std::vector<std::string>& rules,
                const CommonFlags& flags, const std::string& out_path,
                const std::string& hp_params_path, const std::string& root_params_path,
                const std::string& rost_params_path);

int cmd_verify(const std::string& instance_path, const std::string& rule_path,
               const CommonFlags& flags);

// Case classification of the example family from the calibrated barrier.
std::string example_case_label(const VhBarrier& barrier);

}  // namespace cli
}  // namespace sep
