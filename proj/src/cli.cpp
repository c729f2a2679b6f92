#include "sep/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sep/analysis.hpp"
#include "sep/instance.hpp"
#include "sep/render.hpp"

namespace fs = std::filesystem;

namespace sep {

void to_json(nlohmann::json& j, const CalibrationResult& r) {
  j = nlohmann::json{{"rule", StoppingRule{r.rule}},
                     {"residual_tv", r.residual_tv},
                     {"iterations", r.iterations},
                     {"certificate", r.certificate}};
}

namespace cli {

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

void write_json_output(const nlohmann::json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_text_file(out_path, j.dump(2) + "\n");
  }
}

std::string cdf_csv(const StepFunction& cdf) {
  std::ostringstream os;
  os << "level,cdf\n";
  char buf[96];
  for (const auto& [x, v] : cdf.breakpoints()) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", x, v);
    os << buf;
  }
  return os.str();
}

std::string verdict_string(const DominanceVerdict& v) {
  switch (v.kind) {
    case DominanceVerdict::Kind::Equal:
      return "Equal";
    case DominanceVerdict::Kind::FirstSmaller:
      return "FirstSmaller";
    case DominanceVerdict::Kind::SecondSmaller:
      return "SecondSmaller";
    case DominanceVerdict::Kind::Crossing: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "Crossing(at=%.17g)", v.at);
      return buf;
    }
  }
  return "";
}

InstanceFile load_instance(const std::string& path, const CommonFlags& flags) {
  InstanceFile inst = read_json_file(path).get<InstanceFile>();
  if (flags.tol > 0.0) inst.options.tolerance = flags.tol;
  if (flags.mc_paths > 0) inst.options.mc_paths = flags.mc_paths;
  if (flags.seed_set) inst.options.seed = flags.seed;
  if (flags.dt > 0.0) inst.options.dt_root_rost = flags.dt;
  return inst;
}

}  // namespace

std::string example_case_label(const VhBarrier& barrier) {
  if (barrier.h_line_at(0.0) != nullptr) return "(5/8, 3/4]: v-line and h-line";
  if (barrier.v_line_at(0.0) != nullptr) return "(1/2, 5/8]: v-line added";
  return "[0, 1/2]: atom-stop only";
}

int cmd_calibrate(const std::string& instance_path, const CommonFlags& flags,
                  const std::string& out_path) {
  InstanceFile inst;
  try {
    inst = load_instance(instance_path, flags);
  } catch (const std::exception& e) {
    std::cerr << "calibrate: " << e.what() << "\n";
    return kExitParse;
  }
  try {
    const CalibrationResult result =
        calibrate_perkins(inst.lambda, inst.mu, inst.options.tolerance);
    nlohmann::json j = result;
    j["status"] = "ok";
    write_json_output(j, out_path);
    return kExitOk;
  } catch (const ConvexOrderViolatedError& e) {
    std::cerr << "calibrate: " << e.what() << "\n";
    return kExitConvexOrder;
  } catch (const NoProgressError& e) {
    std::cerr << "calibrate: " << e.what() << "\n";
    nlohmann::json j = e.best;
    j["status"] = "no_progress";
    write_json_output(j, out_path);
    return kExitNoProgress;
  } catch (const NonTerminatingError& e) {
    std::cerr << "calibrate: " << e.what() << "\n";
    return kExitNoProgress;
  } catch (const std::exception& e) {
    std::cerr << "calibrate: " << e.what() << "\n";
    return kExitParse;
  }
}

int cmd_example(double alpha, const std::string& out_dir, const CommonFlags& flags) {
  if (alpha < 0.0 || alpha > 1.0) {
    std::cerr << "example: alpha must lie in [0, 1]\n";
    return kExitParse;
  }
  InstanceFile inst = example_instance(alpha);
  if (flags.tol > 0.0) inst.options.tolerance = flags.tol;

  const bool in_order = convex_order(inst.lambda, inst.mu);
  char line[256];

  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  auto emit = [&](const std::string& name, const std::string& text) {
    if (!out_dir.empty())
      write_text_file((std::filesystem::path(out_dir) / name).string(), text);
  };
  emit("instance.json", nlohmann::json(inst).dump(2) + "\n");

  if (!in_order) {
    const std::string label = "(3/4, 1]: not in convex order";
    std::snprintf(line, sizeof(line), "alpha=%.17g case=\"%s\"\n", alpha, label.c_str());
    std::cout << line;
    nlohmann::json report{{"alpha", alpha}, {"case", label}, {"convex_order", false}};
    emit("report.json", report.dump(2) + "\n");
    return kExitConvexOrder;
  }

  try {
    const CalibrationResult result =
        calibrate_perkins(inst.lambda, inst.mu, inst.options.tolerance);
    const std::string label = example_case_label(result.rule.barrier);
    const double expected_duration_identity =
        moment(inst.mu, 2) - moment(inst.lambda, 2);
    const double duration_error =
        std::abs(result.certificate.expected_duration - expected_duration_identity);

    std::snprintf(line, sizeof(line), "alpha=%.17g case=\"%s\"\n", alpha, label.c_str());
    std::cout << line;
    std::snprintf(line, sizeof(line),
                  "residual_tv=%.17g expected_duration=%.17g duration_identity_error=%.17g\n",
                  result.residual_tv, result.certificate.expected_duration,
                  duration_error);
    std::cout << line;

    nlohmann::json report{{"alpha", alpha},
                          {"case", label},
                          {"convex_order", true},
                          {"residual_tv", result.residual_tv},
                          {"atom_mass_at_zero", result.certificate.atom_mass_at_zero},
                          {"expected_duration", result.certificate.expected_duration},
                          {"duration_identity_error", duration_error}};
    emit("report.json", report.dump(2) + "\n");
    emit("result.json", nlohmann::json(result).dump(2) + "\n");
    emit("barrier.svg",
         render_barrier_svg(result.rule.barrier, inst.lambda, inst.mu));
    emit("cdf_max.csv", cdf_csv(extrema_cdf(result.certificate, Extremum::Max)));
    emit("cdf_min.csv", cdf_csv(extrema_cdf(result.certificate, Extremum::Min)));
    {
      std::ostringstream law_csv;
      write_csv(law_csv, result.certificate);
      emit("certificate.csv", law_csv.str());
    }
    return kExitOk;
  } catch (const NoProgressError& e) {
    std::cerr << "example: " << e.what() << "\n";
    return kExitNoProgress;
  } catch (const std::exception& e) {
    std::cerr << "example: " << e.what() << "\n";
    return kExitParse;
  }
}

int cmd_compare(const std::string& instance_path, const std::vector<std::string>& rules,
                const CommonFlags& flags, const std::string& out_path,
                const std::string& hp_params_path, const std::string& root_params_path,
                const std::string& rost_params_path) {
  InstanceFile inst;
  try {
    inst = load_instance(instance_path, flags);
  } catch (const std::exception& e) {
    std::cerr << "compare: " << e.what() << "\n";
    return kExitParse;
  }

  std::vector<std::pair<std::string, StoppingRule>> built;
  std::vector<std::pair<std::string, StoppedLaw>> laws;

  try {
    for (const std::string& name : rules) {
      if (name == "perkins") {
        const CalibrationResult res =
            calibrate_perkins(inst.lambda, inst.mu, inst.options.tolerance);
        built.push_back({name, StoppingRule{res.rule}});
      } else if (name == "ay") {
        if (inst.lambda.size() != 1 || inst.lambda.mean() != 0.0)
          std::cerr << "compare: warning: azema-yor baseline assumes a "
                       "deterministic start at 0\n";
        built.push_back({name, StoppingRule{AzemaYorRule{azema_yor_boundary(inst.mu)}}});
      } else if (name == "hp") {
        if (hp_params_path.empty()) {
          std::cerr << "compare: warning: hp requires --hp-params; skipped\n";
          continue;
        }
        const nlohmann::json jp = read_json_file(hp_params_path);
        built.push_back({name, StoppingRule{HobsonPedersenRule{
                                   jp.at("G").get<DiscreteMeasure>(),
                                   jp.at("g").get<StepFunction>()}}});
      } else if (name == "root") {
        if (root_params_path.empty()) {
          std::cerr << "compare: warning: root requires --root-params; skipped\n";
          continue;
        }
        built.push_back({name, StoppingRule{RootRule{
                                   read_json_file(root_params_path)
                                       .get<TimeSpaceBarrier>()}}});
      } else if (name == "rost") {
        if (rost_params_path.empty()) {
          std::cerr << "compare: warning: rost requires --rost-params; skipped\n";
          continue;
        }
        built.push_back({name, StoppingRule{RostRule{
                                   read_json_file(rost_params_path)
                                       .get<TimeSpaceBarrier>(),
                                   meet(inst.lambda, inst.mu)}}});
      } else {
        std::cerr << "compare: unknown rule '" << name << "'\n";
        return kExitParse;
      }
    }

    // Evaluate every law on the union of the rules' coordinates so the
    // extrema marginals are recorded at one resolution.
    std::vector<double> shared = inst.mu.support();
    for (const auto& [_, rule] : built) {
      const auto coords = rule_coordinates(rule);
      shared.insert(shared.end(), coords.begin(), coords.end());
    }
    McOptions mc;
    mc.dt = inst.options.dt_root_rost;
    mc.threads = flags.threads;
    mc.extra_levels = shared;

    for (const auto& [name, rule] : built) {
      if (const auto* perkins = std::get_if<PerkinsRule>(&rule)) {
        laws.push_back({name, exact_stopped_law(*perkins, inst.lambda, shared)});
      } else if (const auto* ay = std::get_if<AzemaYorRule>(&rule)) {
        laws.push_back({name, exact_stopped_law(*ay, inst.lambda, shared)});
      } else {
        laws.push_back({name, mc_stopped_law(rule, inst.lambda,
                                             inst.options.mc_paths,
                                             inst.options.seed, mc)});
      }
    }
  } catch (const ConvexOrderViolatedError& e) {
    std::cerr << "compare: " << e.what() << "\n";
    return kExitConvexOrder;
  } catch (const NoProgressError& e) {
    std::cerr << "compare: " << e.what() << "\n";
    return kExitNoProgress;
  } catch (const NonTerminatingError& e) {
    std::cerr << "compare: " << e.what() << "\n";
    return kExitNoProgress;
  } catch (const std::exception& e) {
    std::cerr << "compare: " << e.what() << "\n";
    return kExitParse;
  }

  std::vector<double> grid = inst.lambda.support();
  {
    const auto ms = inst.mu.support();
    grid.insert(grid.end(), ms.begin(), ms.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }
  const auto battery = standard_battery(grid);

  nlohmann::json names = nlohmann::json::array();
  for (const auto& [name, _] : laws) names.push_back(name);

  auto matrix_for = [&](Extremum which) {
    nlohmann::json m = nlohmann::json::array();
    for (const auto& [ni, li] : laws) {
      nlohmann::json row = nlohmann::json::array();
      for (const auto& [nj, lj] : laws) {
        row.push_back(
            verdict_string(dominance(extrema_cdf(li, which), extrema_cdf(lj, which))));
      }
      m.push_back(std::move(row));
    }
    return m;
  };

  nlohmann::json objectives;
  for (const auto& phi : battery) {
    nlohmann::json per_rule;
    for (const auto& [name, law] : laws) {
      const ObjectiveVector g = objective_vector(law, phi);
      per_rule[name] = {g.g1, g.g2, g.g3, g.g4};
    }
    objectives[phi.name()] = std::move(per_rule);
  }

  nlohmann::json durations;
  for (const auto& [name, law] : laws) durations[name] = law.expected_duration;

  nlohmann::json residuals;
  for (const auto& [name, law] : laws)
    residuals[name] = verify_embedding(law, inst.mu);

  const nlohmann::json out{{"rules", std::move(names)},
                           {"max_law_dominance", matrix_for(Extremum::Max)},
                           {"min_law_dominance", matrix_for(Extremum::Min)},
                           {"objectives", std::move(objectives)},
                           {"expected_duration", std::move(durations)},
                           {"embedding_tv", std::move(residuals)}};
  try {
    write_json_output(out, out_path);
    if (!out_path.empty()) {
      // CDF pairs for plotting, next to the report.
      const fs::path base = fs::path(out_path).parent_path();
      for (const auto& [name, law] : laws) {
        write_text_file((base / ("cdf_max_" + name + ".csv")).string(),
                        cdf_csv(extrema_cdf(law, Extremum::Max)));
        write_text_file((base / ("cdf_min_" + name + ".csv")).string(),
                        cdf_csv(extrema_cdf(law, Extremum::Min)));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "compare: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitOk;
}

int cmd_verify(const std::string& instance_path, const std::string& rule_path,
               const CommonFlags& flags) {
  InstanceFile inst;
  StoppingRule rule;
  try {
    inst = load_instance(instance_path, flags);
    rule = read_json_file(rule_path).get<StoppingRule>();
  } catch (const std::exception& e) {
    std::cerr << "verify: " << e.what() << "\n";
    return kExitParse;
  }

  const bool exact = std::holds_alternative<PerkinsRule>(rule) ||
                     std::holds_alternative<AzemaYorRule>(rule);
  StoppedLaw law;
  try {
    if (const auto* perkins = std::get_if<PerkinsRule>(&rule)) {
      law = exact_stopped_law(*perkins, inst.lambda);
    } else if (const auto* ay = std::get_if<AzemaYorRule>(&rule)) {
      law = exact_stopped_law(*ay, inst.lambda);
    } else {
      McOptions mc;
      mc.dt = inst.options.dt_root_rost;
      mc.threads = flags.threads;
      law = mc_stopped_law(rule, inst.lambda, inst.options.mc_paths,
                           inst.options.seed, mc);
    }
  } catch (const NonTerminatingError& e) {
    std::cerr << "verify: " << e.what() << "\n";
    return kExitNoProgress;
  } catch (const std::exception& e) {
    std::cerr << "verify: " << e.what() << "\n";
    return kExitParse;
  }

  char line[256];
  bool all_pass = true;
  auto check = [&](const char* name, double value, double threshold) {
    const bool pass = value <= threshold;
    all_pass = all_pass && pass;
    std::snprintf(line, sizeof(line), "%s=%.17g threshold=%.3g %s\n", name, value,
                  threshold, pass ? "PASS" : "FAIL");
    std::cout << line;
  };

  const double tv_threshold = exact ? std::max(inst.options.tolerance, 1e-9) : 1e-2;
  check("tv_residual", verify_embedding(law, inst.mu), tv_threshold);

  // E[tau] = m2(embedded law) - m2(lambda) by optional stopping; for Euler
  // rules the time discretization biases the duration, so the gate is loose.
  const double duration_identity =
      std::abs(law.expected_duration -
               (moment(law.endpoint_law(), 2) - moment(inst.lambda, 2)));
  const bool euler = std::holds_alternative<RootRule>(rule) ||
                     std::holds_alternative<RostRule>(rule);
  check("duration_identity_error", duration_identity,
        exact ? 1e-8 : (euler ? 5e-2 : 1e-8));

  if (const auto* perkins = std::get_if<PerkinsRule>(&rule)) {
    check("monotonicity_violations",
          static_cast<double>(monotonicity_audit(law).size()), 0.0);
    const LoynesReport self = loynes_check(perkins->barrier, perkins->barrier,
                                           inst.lambda, perkins->atom_stop, 10000,
                                           inst.options.seed);
    check("loynes_self_union_tv", self.endpoint_tv_r_union, 1e-12);
    check("loynes_self_union_violations", static_cast<double>(self.violations), 0.0);
  } else {
    std::cout << "monotonicity_audit=skipped (rule may stop at interior points)\n";
  }

  return all_pass ? kExitOk : kExitVerifyFailed;
}

}  // namespace cli
}  // namespace sep
