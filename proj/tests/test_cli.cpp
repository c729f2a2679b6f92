#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sep/cli.hpp"
#include "sep/instance.hpp"
#include "sep/render.hpp"

using namespace sep;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_dir() {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() / ("sepb_cli_test_" + std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const std::string& args) {
  const char* bin = std::getenv("SEPB_BIN");
#ifdef SEPB_BIN_FALLBACK
  if (bin == nullptr) bin = SEPB_BIN_FALLBACK;
#endif
  REQUIRE(bin != nullptr);
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd =
      std::string(bin) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(raw);
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

fs::path write_instance(double alpha) {
  const fs::path p = scratch_dir() / "instance.json";
  std::ofstream out(p);
  out << nlohmann::json(example_instance(alpha)).dump(2);
  return p;
}

}  // namespace

TEST_CASE("example command reports the case boundaries") {
  const fs::path dir = scratch_dir();
  const auto r1 = run_cli("example --alpha 0.5 --out-dir " + (dir / "a").string());
  CHECK(r1.exit_code == 0);
  CHECK(r1.out.find("[0, 1/2]: atom-stop only") != std::string::npos);
  CHECK(fs::exists(dir / "a" / "report.json"));
  CHECK(fs::exists(dir / "a" / "barrier.svg"));
  CHECK(fs::exists(dir / "a" / "cdf_max.csv"));

  const auto r2 = run_cli("example --alpha 0.65");
  CHECK(r2.exit_code == 0);
  CHECK(r2.out.find("(5/8, 3/4]: v-line and h-line") != std::string::npos);

  const auto r3 = run_cli("example --alpha 1.0");
  CHECK(r3.exit_code == cli::kExitConvexOrder);
  CHECK(r3.out.find("(3/4, 1]: not in convex order") != std::string::npos);

  const auto r4 = run_cli("example --alpha 0.55");
  CHECK(r4.exit_code == 0);
  CHECK(r4.out.find("(1/2, 5/8]: v-line added") != std::string::npos);
}

TEST_CASE("example runs are byte-identical") {
  const fs::path dir = scratch_dir();
  const auto r1 = run_cli("example --alpha 0.6 --out-dir " + (dir / "x").string());
  const auto r2 = run_cli("example --alpha 0.6 --out-dir " + (dir / "y").string());
  CHECK(r1.exit_code == 0);
  CHECK(r1.out == r2.out);
  CHECK(read_file(dir / "x" / "report.json") == read_file(dir / "y" / "report.json"));
  CHECK(read_file(dir / "x" / "result.json") == read_file(dir / "y" / "result.json"));
  CHECK(read_file(dir / "x" / "cdf_max.csv") == read_file(dir / "y" / "cdf_max.csv"));
  CHECK(read_file(dir / "x" / "barrier.svg") == read_file(dir / "y" / "barrier.svg"));
}

TEST_CASE("calibrate command") {
  const fs::path inst = write_instance(0.6);
  const fs::path out = scratch_dir() / "result.json";
  const auto r = run_cli("calibrate " + inst.string() + " --out " + out.string());
  CHECK(r.exit_code == 0);
  const auto j = nlohmann::json::parse(read_file(out));
  CHECK(j.at("status") == "ok");
  CHECK(j.at("residual_tv").get<double>() <= 1e-10);
  CHECK(j.at("rule").at("variant") == "perkins");

  // Convex order failure exits 2.
  const fs::path bad = write_instance(0.8);
  CHECK(run_cli("calibrate " + bad.string()).exit_code == cli::kExitConvexOrder);

  // Malformed JSON exits 1.
  const fs::path broken = scratch_dir() / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK(run_cli("calibrate " + broken.string()).exit_code == cli::kExitParse);

  // Unknown keys are rejected.
  const fs::path unknown = scratch_dir() / "unknown.json";
  std::ofstream(unknown) << R"({"lambda":{"atoms":[{"x":0,"p":1}]},)"
                         << R"("mu":{"atoms":[{"x":0,"p":1}]},"bogus":1})";
  CHECK(run_cli("calibrate " + unknown.string()).exit_code == cli::kExitParse);
}

TEST_CASE("verify command") {
  const fs::path inst = write_instance(0.6);
  const fs::path rule_path = scratch_dir() / "rule.json";
  {
    const auto inst_obj = example_instance(0.6);
    const auto res = calibrate_perkins(inst_obj.lambda, inst_obj.mu, 1e-10);
    std::ofstream(rule_path) << nlohmann::json(StoppingRule{res.rule}).dump(2);
  }
  const auto ok = run_cli("verify " + inst.string() + " " + rule_path.string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("tv_residual") != std::string::npos);
  CHECK(ok.out.find("FAIL") == std::string::npos);

  // An empty barrier cannot terminate: exit 3.
  const fs::path empty_rule = scratch_dir() / "empty.json";
  std::ofstream(empty_rule)
      << R"({"variant":"perkins","barrier":{"v_lines":[],"h_lines":[]},)"
      << R"("atom_stop":{"atoms":[]}})";
  CHECK(run_cli("verify " + inst.string() + " " + empty_rule.string()).exit_code ==
        cli::kExitNoProgress);

  // A wrong-target rule fails verification: exit 4.
  const fs::path wrong_rule = scratch_dir() / "wrong.json";
  std::ofstream(wrong_rule)
      << R"({"variant":"perkins","barrier":{"v_lines":[{"max":2,"depth":-2}],)"
      << R"("h_lines":[{"min":-2,"right":2}]},"atom_stop":{"atoms":[]}})";
  CHECK(run_cli("verify " + inst.string() + " " + wrong_rule.string()).exit_code ==
        cli::kExitVerifyFailed);
}

TEST_CASE("compare command") {
  // Point start with an interior atom separates Perkins from Azema-Yor.
  InstanceFile inst;
  inst.lambda = DiscreteMeasure::point_mass(0.0);
  inst.mu = DiscreteMeasure({{-2.0, 0.25}, {0.5, 0.5}, {1.0, 0.25}});
  const fs::path p = scratch_dir() / "inst.json";
  std::ofstream(p) << nlohmann::json(inst).dump(2);

  const fs::path out = scratch_dir() / "cmp.json";
  const auto r =
      run_cli("compare " + p.string() + " --rules perkins,ay --out " + out.string());
  CHECK(r.exit_code == 0);
  const auto j = nlohmann::json::parse(read_file(out));
  CHECK(j.at("rules") == nlohmann::json::array({"perkins", "ay"}));
  CHECK(j.at("max_law_dominance")[0][1] == "FirstSmaller");
  CHECK(j.at("max_law_dominance")[0][0] == "Equal");
  CHECK(j.at("objectives").contains("tanh"));

  // hp without a parameter file is skipped with a warning on stderr.
  const auto r2 = run_cli("compare " + p.string() + " --rules perkins,hp");
  CHECK(r2.exit_code == 0);
  CHECK(r2.err.find("hp") != std::string::npos);
  const auto j2 = nlohmann::json::parse(r2.out);
  CHECK(j2.at("rules") == nlohmann::json::array({"perkins"}));

  // Single rule: 1x1 Equal matrix.
  const auto r3 = run_cli("compare " + p.string() + " --rules perkins");
  const auto j3 = nlohmann::json::parse(r3.out);
  CHECK(j3.at("max_law_dominance") ==
        nlohmann::json::array({nlohmann::json::array({"Equal"})}));
}

TEST_CASE("compare with a rost barrier file") {
  const fs::path inst = write_instance(0.5);
  const fs::path rost = scratch_dir() / "rost.json";
  std::ofstream(rost) << R"({"kind":"inverse","levels":[)"
                      << R"({"level":-2,"threshold":"inf"},{"level":0,"threshold":"inf"},)"
                      << R"({"level":2,"threshold":"inf"}]})";
  const fs::path out = scratch_dir() / "cmp.json";
  const auto r = run_cli("compare " + inst.string() +
                         " --rules perkins,rost --rost-params " + rost.string() +
                         " --mc-paths 20000 --dt 0.001 --out " + out.string());
  CHECK(r.exit_code == 0);
  const auto j = nlohmann::json::parse(read_file(out));
  CHECK(j.at("rules") == nlohmann::json::array({"perkins", "rost"}));
  CHECK(j.at("expected_duration").contains("rost"));
  CHECK(fs::exists(out.parent_path() / "cdf_max_perkins.csv"));
  CHECK(fs::exists(out.parent_path() / "cdf_min_rost.csv"));
}

TEST_CASE("render produces well-formed svg") {
  const auto inst = example_instance(0.7);
  const auto res = calibrate_perkins(inst.lambda, inst.mu, 1e-10);
  const std::string svg = render_barrier_svg(res.rule.barrier, inst.lambda, inst.mu);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("#8F00FF") != std::string::npos);  // violet v-lines
  CHECK(svg.find("#FF69B4") != std::string::npos);  // hot-pink h-lines
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
}
