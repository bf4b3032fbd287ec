#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "xover_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path scratch_file(const std::string& name) {
  static int counter = 0;
  return scratch_dir() / (std::to_string(counter++) + "_" + name);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

RunResult run_cli(const std::string& arguments) {
  const fs::path out_path = scratch_file("stdout.txt");
  const fs::path err_path = scratch_file("stderr.txt");
  const std::string command = std::string("\"") + XOVER_CLI_PATH + "\" " +
                              arguments + " > \"" + out_path.string() +
                              "\" 2> \"" + err_path.string() + "\"";
  const int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

std::string config(const std::string& name) {
  return std::string("--config \"") + XOVER_CONFIG_DIR + "/" + name + "\"";
}

fs::path write_file(const std::string& name, const std::string& contents) {
  const fs::path path = scratch_file(name);
  std::ofstream out(path);
  out << contents;
  return path;
}

nlohmann::json load_json(const fs::path& path) {
  std::ifstream in(path);
  nlohmann::json j;
  in >> j;
  return j;
}

const char* kMinimalConfig = R"({
  "t": 2, "p": 2,
  "sequences": ["AB", "BA"],
  "theta": [0.5, -1.0, 4.0, -2.0],
  "family": "bernoulli", "link": "logit",
  "correlation": {"structure": "ar1", "alpha": 0.1}
})";

}  // namespace

TEST_CASE("help and argument errors use the documented exit codes") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK_THAT(run_cli("--help").out, ContainsSubstring("optimize"));
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("optimize").exit_code == 2);  // --config is required
  CHECK(run_cli("frobnicate --config x.json").exit_code == 2);
}

TEST_CASE("optimize finds the balanced design and writes a result file") {
  const fs::path out = scratch_file("optimize.json");
  const auto result =
      run_cli("optimize " + config("logit_2x2.json") + " --out \"" +
              out.string() + "\"");
  CHECK(result.exit_code == 0);
  CHECK_THAT(result.out, ContainsSubstring("converged"));
  CHECK_THAT(result.out, ContainsSubstring("optimal"));

  const auto j = load_json(out);
  CHECK(j["criterion"] == "theta");
  CHECK(j["converged"] == true);
  CHECK(j["verified_optimal"] == true);
  REQUIRE(j["proportions"].size() == 2);
  CHECK_THAT(j["proportions"][0].get<double>(), WithinAbs(0.5, 1e-4));
  CHECK_THAT(j["proportions"][1].get<double>(), WithinAbs(0.5, 1e-4));
}

TEST_CASE("criterion flag overrides the config") {
  const fs::path out = scratch_file("optimize_tau.json");
  const auto result =
      run_cli("optimize " + config("logit_2x2.json") + " --criterion tau" +
              " --out \"" + out.string() + "\"");
  CHECK(result.exit_code == 0);
  const auto j = load_json(out);
  CHECK(j["criterion"] == "tau");
  CHECK_THAT(j["proportions"][0].get<double>(), WithinAbs(0.177, 5e-4));
  CHECK_THAT(j["proportions"][1].get<double>(), WithinAbs(0.823, 5e-4));
}

TEST_CASE("verify accepts the committed optima") {
  for (const char* name :
       {"logit_2x2.json", "poisson_4x4.json", "logit_4x4_theta.json",
        "logit_4x4_tau.json"}) {
    const auto result = run_cli("verify " + config(name));
    INFO("config " << name << "\n" << result.err);
    CHECK(result.exit_code == 0);
    CHECK_THAT(result.out, ContainsSubstring("verdict: optimal"));
  }
}

TEST_CASE("verify flags a non-optimal design with exit code 4") {
  const auto inline_design =
      run_cli("verify " + config("logit_2x2.json") + " --design 0.9,0.1");
  CHECK(inline_design.exit_code == 4);
  CHECK_THAT(inline_design.out, ContainsSubstring("verdict: not optimal"));

  const auto uniform =
      run_cli("verify " + config("poisson_4x4.json") + " --design uniform");
  CHECK(uniform.exit_code == 4);
}

TEST_CASE("optimize output feeds back into verify") {
  const fs::path out = scratch_file("roundtrip.json");
  REQUIRE(run_cli("optimize " + config("poisson_4x4.json") + " --out \"" +
                  out.string() + "\"")
              .exit_code == 0);
  const auto verified = run_cli("verify " + config("poisson_4x4.json") +
                                " --design \"" + out.string() + "\"");
  CHECK(verified.exit_code == 0);
  CHECK_THAT(verified.out, ContainsSubstring("verdict: optimal"));
}

TEST_CASE("verify needs a design from somewhere") {
  const fs::path cfg = write_file("no_props.json", kMinimalConfig);
  const auto result = run_cli("verify --config \"" + cfg.string() + "\"");
  CHECK(result.exit_code == 2);
  CHECK_THAT(result.err, ContainsSubstring("no candidate design"));
}

TEST_CASE("verify design file may be a bare array or an object") {
  const fs::path bare = write_file("design_array.json", "[0.5, 0.5]");
  CHECK(run_cli("verify " + config("logit_2x2.json") + " --design \"" +
                bare.string() + "\"")
            .exit_code == 0);

  const fs::path object =
      write_file("design_object.json", R"({"proportions": [0.5, 0.5]})");
  CHECK(run_cli("verify " + config("logit_2x2.json") + " --design \"" +
                object.string() + "\"")
            .exit_code == 0);

  const auto missing = run_cli("verify " + config("logit_2x2.json") +
                               " --design /nonexistent.json");
  CHECK(missing.exit_code == 2);
}

TEST_CASE("design arguments are validated") {
  CHECK(run_cli("verify " + config("logit_2x2.json") + " --design 0.5,0.4")
            .exit_code == 2);
  CHECK(run_cli("verify " + config("logit_2x2.json") +
                " --design 0.5,0.25,0.25")
            .exit_code == 2);
  CHECK(run_cli("verify " + config("logit_2x2.json") + " --design 1.5,-0.5")
            .exit_code == 2);
  CHECK(run_cli("verify " + config("logit_2x2.json") + " --design a,b")
            .exit_code == 2);
}

TEST_CASE("singular designs exit with the numerical failure code") {
  const auto result =
      run_cli("verify " + config("logit_2x2.json") + " --design 1.0,0.0");
  CHECK(result.exit_code == 3);
  CHECK_THAT(result.err, ContainsSubstring("numerical error"));
}

TEST_CASE("sweep writes a csv profile") {
  const fs::path out = scratch_file("sweep.csv");
  const auto result = run_cli("sweep " + config("logit_2x2.json") +
                              " --grid 5 --out \"" + out.string() + "\"");
  CHECK(result.exit_code == 0);
  const std::string csv = slurp(out);
  CHECK_THAT(csv, ContainsSubstring("p_i,objective,directional_derivative"));
  CHECK_THAT(csv, ContainsSubstring("0,,"));

  std::istringstream lines(csv);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 6);  // header plus five grid rows

  const auto to_stdout = run_cli("sweep " + config("logit_2x2.json") +
                                 " --grid 3");
  CHECK(to_stdout.exit_code == 0);
  CHECK_THAT(to_stdout.out,
             ContainsSubstring("p_i,objective,directional_derivative"));
}

TEST_CASE("sweep validates index and grid") {
  CHECK(run_cli("sweep " + config("logit_2x2.json") + " --index 3")
            .exit_code == 2);
  CHECK(run_cli("sweep " + config("logit_2x2.json") + " --index 0")
            .exit_code == 2);
  CHECK(run_cli("sweep " + config("logit_2x2.json") + " --grid 1")
            .exit_code == 2);
}

TEST_CASE("oracle reports the lattice optimum") {
  const auto result =
      run_cli("oracle " + config("logit_2x2.json") + " --resolution 0.02");
  CHECK(result.exit_code == 0);
  CHECK_THAT(result.out, ContainsSubstring("grid:       1/50"));
  CHECK_THAT(result.out, ContainsSubstring("0.5"));

  CHECK(run_cli("oracle " + config("logit_2x2.json") + " --resolution 0")
            .exit_code == 2);
  // A lattice this fine on four sequences exceeds the point cap.
  CHECK(run_cli("oracle " + config("poisson_4x4.json") +
                " --resolution 0.0001")
            .exit_code == 2);
}

TEST_CASE("efficiency compares two designs both ways") {
  const fs::path out = scratch_file("efficiency.json");
  const auto result = run_cli(
      "efficiency " + config("logit_2x2.json") +
      " --design-a 0.5,0.5 --design-b 0.9,0.1 --out \"" + out.string() + "\"");
  CHECK(result.exit_code == 0);
  const auto j = load_json(out);
  const double forward = j["a_vs_b"].get<double>();
  const double backward = j["b_vs_a"].get<double>();
  CHECK(forward > 1.0);
  CHECK_THAT(forward * backward, WithinAbs(1.0, 1e-10));

  const auto same = run_cli("efficiency " + config("logit_2x2.json") +
                            " --design-a uniform --design-b 0.5,0.5");
  CHECK(same.exit_code == 0);
  CHECK_THAT(same.out, ContainsSubstring("1"));

  CHECK(run_cli("efficiency " + config("logit_2x2.json") +
                " --design-a uniform")
            .exit_code == 2);
}

TEST_CASE("config problems exit with the validation code") {
  CHECK(run_cli("optimize --config /nonexistent.json").exit_code == 2);

  const fs::path garbage = write_file("garbage.json", "{broken");
  CHECK(run_cli("optimize --config \"" + garbage.string() + "\"")
            .exit_code == 2);

  std::string with_typo = kMinimalConfig;
  with_typo.insert(with_typo.rfind('}'), R"(, "familly": "poisson")");
  const fs::path typo = write_file("typo.json", with_typo);
  const auto result = run_cli("optimize --config \"" + typo.string() + "\"");
  CHECK(result.exit_code == 2);
  CHECK_THAT(result.err, ContainsSubstring("familly"));
}

TEST_CASE("optimize exits with code 4 when the budget is too small") {
  std::string cfg = kMinimalConfig;
  cfg.insert(cfg.rfind('}'),
             R"(, "criterion": "tau", "optimizer": {"max_iterations": 1})");
  const fs::path path = write_file("tight_budget.json", cfg);
  const auto result = run_cli("optimize --config \"" + path.string() + "\"");
  CHECK(result.exit_code == 4);
  CHECK_THAT(result.err, ContainsSubstring("did not converge"));
}
