#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return std::getenv("CORRSETS_CLI"); }

int run(const std::string& args) {
  const std::string cmd =
      std::string("\"") + cli_path() + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "corrsets_cli_tests" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("cli exit codes and artifacts") {
  REQUIRE(cli_path() != nullptr);

  SUBCASE("success paths write the expected files") {
    const fs::path d = fresh_dir("ok");
    CHECK(run("bound --preset example1 --out-dir " + d.string()) == 0);
    CHECK(fs::exists(d / "bound.json"));
    CHECK(run("reach --preset example2 --out-dir " + d.string()) == 0);
    CHECK(fs::exists(d / "tube.csv"));
    CHECK(run("invariant --preset example2 --out-dir " + d.string()) == 0);
    CHECK(fs::exists(d / "rho_table.csv"));
    CHECK(run("simulate --preset example2 --seed 9 --jobs 2 --out-dir " + d.string()) == 0);
    CHECK(fs::exists(d / "violations.csv"));
    CHECK(fs::exists(d / "study.json"));
  }

  SUBCASE("config errors exit with 2") {
    CHECK(run("bound --preset nosuch") == 2);
    CHECK(run("bound") == 2);  // neither preset nor config
    CHECK(run("bound --config /nonexistent/path.json") == 2);
    const fs::path d = fresh_dir("badcfg");
    std::ofstream(d / "bad.json") << "{\"A\": [[0.5]]}";  // no model/generator
    CHECK(run("bound --config " + (d / "bad.json").string()) == 2);
  }

  SUBCASE("infeasible synthesis exits with 3") {
    const fs::path d = fresh_dir("infeasible");
    // One grid point at rho(A)^2 exactly: the contraction constraint has no
    // strictly feasible S, so every grid point fails.
    std::ofstream(d / "cfg.json") << R"({
      "A": [[0.25, 0.0], [0.1, 0.3]],
      "generator": {"type": "iid",
                    "gamma_tilde": [[7.8381, -2.3983], [-2.3983, 4.2422]]},
      "eta_grid_size": 1
    })";
    CHECK(run("bound --config " + (d / "cfg.json").string()) == 3);
  }

  SUBCASE("conservative and chebyshev flags change the levels") {
    const fs::path d1 = fresh_dir("flags1");
    const fs::path d2 = fresh_dir("flags2");
    CHECK(run("invariant --preset example2 --out-dir " + d1.string()) == 0);
    CHECK(run("invariant --preset example2 --chebyshev --conservative --out-dir " +
              d2.string()) == 0);
    std::ifstream f1(d1 / "invariant.json"), f2(d2 / "invariant.json");
    const std::string j1((std::istreambuf_iterator<char>(f1)),
                         std::istreambuf_iterator<char>());
    const std::string j2((std::istreambuf_iterator<char>(f2)),
                         std::istreambuf_iterator<char>());
    CHECK(j1 != j2);
  }
}
