#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(DIMEST_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "dimest_cli_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("t0 subcommand") {
  const auto r = run("t0 --d 3 --L 0 --M 0 --kappa 0 --p 0.2387 --gamma 0.4 --eta 0.1");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  const auto binding = j["binding"].get<std::string>();
  CHECK((binding == "gaussian_tail" || binding == "tail_decay"));
  for (const char* term : {"volume_distortion", "curvature", "tail_decay", "density_variation", "gaussian_tail"}) {
    CHECK(j["terms"].contains(term));
  }
  CHECK(j["terms"]["curvature"] == "inf");
  // Gaussian tail term: (sqrt 2 (sqrt 3 + sqrt(2 log 100)))^{-10}
  const double beta = std::sqrt(2.0) * (std::sqrt(3.0) + std::sqrt(2 * std::log(100.0)));
  CHECK(j["terms"]["gaussian_tail"].get<double>() == doctest::Approx(std::pow(beta, -10.0)).epsilon(1e-12));
  CHECK(j["t0"].get<double>() <= j["terms"]["gaussian_tail"].get<double>());
}

TEST_CASE("sample and estimate") {
  const auto dir = scratch();
  const auto csv = (dir / "cloud.csv").string();
  REQUIRE(run("sample --manifold ball --d 3 --n 3000 --seed 5 --output " + csv).code == 0);

  auto r = run("estimate --input " + csv + " --point-index 0 --method gaussian --t auto");
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["method"] == "gaussian_curvature");
  CHECK(j.contains("d_hat"));
  CHECK(j["t_star"].get<double>() > 0);

  r = run("estimate --input " + csv + " --point-coords 0,0,0 --method gaussian --t 0.05");
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["method"] == "gaussian_fixed_t");
  CHECK(std::abs(j["d_hat"].get<double>() - 3.0) < 0.6);

  r = run("estimate --input " + csv + " --point-index 3 --method knn --k 10");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["k"] == 10);

  r = run("estimate --input " + csv + " --method global --t 0.01");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["method"] == "gaussian_global");

  CHECK(run("estimate --input " + csv + " --point-coords 0,0 --method gaussian").code == 2);
  CHECK(run("estimate --input " + csv + " --point-index 99999").code == 2);
  CHECK(run("estimate --input " + csv).code == 1);
  CHECK(run("estimate --input " + csv + " --point-index 0 --t banana").code == 1);
  CHECK(run("estimate --input " + (dir / "missing.csv").string() + " --point-index 0").code == 2);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run("").code == 1);
  CHECK(run("frobnicate").code == 1);
  CHECK(run("t0 --d 3 --p 0.2 --bogus 1").code == 1);
  CHECK(run("estimate --input x.csv --point-index 0 --method magic").code == 1);
  CHECK(run("--help").code == 0);
}

TEST_CASE("bounds subcommand") {
  auto r = run("bounds --d 3 --p 0.2387 --n 1000000 --gamma 0.26 --eps 0.5");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["upper_tail"].get<double>() <= 1.0);
  CHECK(j["P_t"].get<double>() > 0);
  CHECK(j.contains("remainder_scale"));
  CHECK(run("bounds --d 3 --p 0.2387 --n 1000 --t 0.5").code == 2);
  CHECK(run("bounds --d 3 --p 0.2387 --n 1000 --gamma 0.6").code == 2);
}

TEST_CASE("experiments are byte-identical across runs") {
  const auto dir = scratch();
  const auto cfg = dir / "c.json";
  {
    std::ofstream os(cfg);
    os << R"({"n": [100, 200], "trials": 6, "eps": [0.5, 1.0]})";
  }
  const auto a = dir / "run_a", b = dir / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  REQUIRE(run("experiment concentration --config " + cfg.string() + " --seed 42 --output-dir " + a.string()).code == 0);
  REQUIRE(run("experiment concentration --config " + cfg.string() + " --seed 42 --output-dir " + b.string() +
              " --threads 1")
              .code == 0);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    ++compared;
  }
  CHECK(compared == 4);
  CHECK(run("experiment concentration --config " + (dir / "nope.json").string()).code == 2);
  {
    std::ofstream os(cfg);
    os << R"({"n": [100], "trials": 2, "t": 0.5})";
  }
  CHECK(run("experiment concentration --config " + cfg.string() + " --output-dir " + a.string()).code == 2);
  fs::remove_all(dir);
}
