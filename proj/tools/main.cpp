#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sep/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Skorokhod embeddings with vh-barrier stopping rules"};
  app.require_subcommand(1);

  sep::cli::CommonFlags flags;
  double tol_flag = -1.0;
  std::int64_t mc_paths_flag = -1;
  std::uint64_t seed_flag = 42;
  bool seed_given = false;
  double dt_flag = -1.0;
  int threads_flag = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--tol", tol_flag, "calibration tolerance (default 1e-10)");
    cmd->add_option("--mc-paths", mc_paths_flag, "Monte Carlo paths (default 1e6)");
    cmd->add_option("--seed", seed_flag, "RNG seed (default 42)")
        ->each([&](const std::string&) { seed_given = true; });
    cmd->add_option("--threads", threads_flag, "Monte Carlo worker threads");
    cmd->add_option("--dt", dt_flag, "Euler step for Root/Rost (default 1e-4)");
  };

  std::string instance_path, rule_path, out_path, out_dir;
  double alpha = 0.0;
  std::vector<std::string> rules{"perkins", "ay"};
  std::string hp_params, root_params, rost_params;

  CLI::App* calibrate = app.add_subcommand("calibrate", "calibrate a Perkins rule");
  calibrate->add_option("instance", instance_path, "instance JSON file")->required();
  calibrate->add_option("--out", out_path, "output JSON path (default stdout)");
  add_common(calibrate);

  CLI::App* example = app.add_subcommand("example", "run the three-atom family");
  example->add_option("--alpha", alpha, "atom mass at 0")->required();
  example->add_option("--out-dir", out_dir, "directory for artifacts");
  add_common(example);

  CLI::App* compare = app.add_subcommand("compare", "compare stopping rules");
  compare->add_option("instance", instance_path, "instance JSON file")->required();
  compare->add_option("--rules", rules, "subset of perkins,ay,hp,root,rost")
      ->delimiter(',');
  compare->add_option("--out", out_path, "output JSON path (default stdout)");
  compare->add_option("--hp-params", hp_params, "Hobson-Pedersen parameter file");
  compare->add_option("--root-params", root_params, "Root barrier file");
  compare->add_option("--rost-params", rost_params, "Rost barrier file");
  add_common(compare);

  CLI::App* verify = app.add_subcommand("verify", "verify a rule against an instance");
  verify->add_option("instance", instance_path, "instance JSON file")->required();
  verify->add_option("rule", rule_path, "rule JSON file")->required();
  add_common(verify);

  CLI11_PARSE(app, argc, argv);

  flags.tol = tol_flag;
  flags.mc_paths = mc_paths_flag;
  flags.seed = seed_flag;
  flags.seed_set = seed_given;
  flags.threads = threads_flag;
  flags.dt = dt_flag;

  if (calibrate->parsed()) return sep::cli::cmd_calibrate(instance_path, flags, out_path);
  if (example->parsed()) return sep::cli::cmd_example(alpha, out_dir, flags);
  if (compare->parsed())
    return sep::cli::cmd_compare(instance_path, rules, flags, out_path, hp_params,
                                 root_params, rost_params);
  if (verify->parsed()) return sep::cli::cmd_verify(instance_path, rule_path, flags);
  return sep::cli::kExitParse;
}
