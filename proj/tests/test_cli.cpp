#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfkd/benchmark.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return MFKD_CLI_PATH; }

struct CmdResult {
  int exit_code = -1;
  std::string out;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "mfkd_cli_tests";
  fs::create_directories(dir);
  return dir;
}

CmdResult run_cli(const std::string& args) {
  const fs::path out_file = scratch_dir() / "stdout.txt";
  const std::string cmd =
      std::string(cli_path()) + " " + args + " > " + out_file.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  CmdResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_file);
  return result;
}

void write_matrix_fixture(const fs::path& path, int rows, int cols,
                          const std::vector<double>& values, const std::string& role) {
  std::ofstream out(path);
  out << "{\"rows\":" << rows << ",\"cols\":" << cols << ",\"role\":\"" << role << "\"}\n";
  out.precision(17);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c > 0) out << ' ';
      out << values[static_cast<std::size_t>(r * cols + c)];
    }
    out << '\n';
  }
}

}  // namespace

TEST_CASE("cli usage errors exit with code 2") {
  CHECK(run_cli("").exit_code == 2);                       // missing subcommand
  CHECK(run_cli("search --synthetic tau=0.47,edges=2,ops=2").exit_code == 2);  // no --method
  CHECK(run_cli("search --method bogus --synthetic tau=0.47,edges=2,ops=2 --seed 1")
            .exit_code == 2);
  CHECK(run_cli("search --method mfkd --seed 1").exit_code == 2);  // no benchmark source
  CHECK(run_cli("compare --methods mfkd --synthetic tau=0.47,edges=2,ops=2 --seed 1")
            .exit_code == 2);  // fewer than two methods
}

TEST_CASE("cli runtime failures exit with code 1") {
  CHECK(run_cli("search --method mfkd --bench /nonexistent/table.jsonl --seed 1")
            .exit_code == 1);
}

TEST_CASE("cli --help exits with code 0") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("search --help").exit_code == 0);
}

TEST_CASE("synth is seed-deterministic and calibrated") {
  const fs::path a = scratch_dir() / "synth_a.jsonl";
  const fs::path b = scratch_dir() / "synth_b.jsonl";
  const std::string args =
      "synth --edges 3 --ops 3 --tau 0.47 --tau-logistic 0.17 --seed 99 --out ";
  REQUIRE(run_cli(args + a.string()).exit_code == 0);
  REQUIRE(run_cli(args + b.string()).exit_code == 0);
  const std::string bytes_a = slurp(a);
  CHECK(bytes_a == slurp(b));
  CHECK_FALSE(bytes_a.empty());

  const mfkd::Benchmark bench = mfkd::load_benchmark(a.string());
  CHECK(bench.rows.size() == 27);
  CHECK(std::abs(mfkd::correlate_fidelities(bench) - 0.47) <= 0.02);
  CHECK(std::abs(mfkd::correlate_fidelities_logistic(bench) - 0.17) <= 0.02);

  SUBCASE("correlate reads the file back") {
    const CmdResult res = run_cli("correlate --bench " + a.string());
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("val_acc_low vs val_acc_high") != std::string::npos);
  }
}

TEST_CASE("kd-eval reproduces hand-computed losses") {
  const fs::path dir = scratch_dir();
  const fs::path ft = dir / "ft.mat";
  const fs::path fs_file = dir / "fs.mat";
  const fs::path zs = dir / "zs.mat";
  const fs::path zt = dir / "zt.mat";
  const fs::path labels = dir / "labels.mat";

  write_matrix_fixture(ft, 1, 2, {1.0, 0.0}, "teacher-map");
  write_matrix_fixture(fs_file, 1, 2, {0.0, 1.0}, "student-map");
  write_matrix_fixture(zs, 1, 2, {0.0, 0.0}, "student-logits");
  write_matrix_fixture(zt, 1, 2, {std::log(4.0), 0.0}, "teacher-logits");
  write_matrix_fixture(labels, 1, 1, {0.0}, "labels");

  SUBCASE("orthogonal unit channels give mmd2 = 2") {
    const CmdResult res =
        run_cli("kd-eval --ft " + ft.string() + " --fs " + fs_file.string());
    REQUIRE(res.exit_code == 0);
    const auto obj = nlohmann::json::parse(res.out);
    CHECK(obj.at("mmd2").get<double>() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(obj.at("config").at("nst_beta").get<double>() == 12.5);
    CHECK(obj.at("config").at("kernel_b").get<int>() == 2);
  }

  SUBCASE("identical maps give mmd2 = 0") {
    const CmdResult res = run_cli("kd-eval --ft " + ft.string() + " --fs " + ft.string());
    REQUIRE(res.exit_code == 0);
    const auto obj = nlohmann::json::parse(res.out);
    CHECK(obj.at("mmd2").get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("full losses on the composite fixture") {
    const CmdResult res = run_cli(
        "kd-eval --student-logits " + zs.string() + " --teacher-logits " + zt.string() +
        " --labels " + labels.string() + " --ft " + ft.string() + " --fs " +
        fs_file.string() + " --tau 1.0 --lambda 0.5");
    REQUIRE(res.exit_code == 0);
    const auto obj = nlohmann::json::parse(res.out);
    CHECK(obj.at("kd_loss").get<double>() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(obj.at("nst_loss").get<double>() ==
          doctest::Approx(std::log(2.0) + 12.5 * 2.0).epsilon(1e-12));
  }

  SUBCASE("subset query") {
    const CmdResult res = run_cli("kd-eval --ft " + ft.string() + " --fs " +
                                  fs_file.string() + " --subset-t 0 --subset-s 0");
    REQUIRE(res.exit_code == 0);
    const auto obj = nlohmann::json::parse(res.out);
    CHECK(obj.at("mmd2_subset").get<double>() == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("no fixtures at all is a usage error") {
    CHECK(run_cli("kd-eval --tau 2.0").exit_code == 2);
  }
}

TEST_CASE("seeded search runs are byte-identical") {
  const fs::path out_a = scratch_dir() / "search_a";
  const fs::path out_b = scratch_dir() / "search_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  const std::string common =
      "search --method mfkd --synthetic tau=0.47,edges=3,ops=3 --n1 8 --n2 3 "
      "--pool 27 --budget 80 --seed 4242 --out ";
  REQUIRE(run_cli(common + out_a.string()).exit_code == 0);
  REQUIRE(run_cli(common + out_b.string()).exit_code == 0);

  for (const std::string name : {"results.json", "trajectory.csv", "curves.csv"}) {
    const std::string bytes = slurp(out_a / name);
    CHECK_FALSE(bytes.empty());
    CHECK(bytes == slurp(out_b / name));
  }

  const auto results = nlohmann::json::parse(slurp(out_a / "results.json"));
  CHECK(results.at("method") == "mfkd");
  CHECK(results.at("runs").size() == 1);
  CHECK(results.at("runs")[0].at("any_high").get<bool>());

  const auto manifest = nlohmann::json::parse(slurp(out_a / "manifest.json"));
  CHECK(manifest.at("seed").get<std::uint64_t>() == 4242);
  CHECK(manifest.at("config").at("method") == "mfkd");
}

TEST_CASE("compare writes aggregate results") {
  const fs::path out = scratch_dir() / "compare_out";
  fs::remove_all(out);
  const CmdResult res = run_cli(
      "compare --methods mfkd,random --runs 3 --synthetic tau=0.47,edges=3,ops=3 "
      "--n1 8 --n2 3 --pool 27 --budget 80 --seed 7 --parallel 2 --out " + out.string());
  REQUIRE(res.exit_code == 0);
  const auto results = nlohmann::json::parse(slurp(out / "results.json"));
  REQUIRE(results.at("methods").size() == 2);
  CHECK(results.at("methods")[0].at("name") == "mfkd");
  CHECK(results.at("methods")[0].at("runs").size() == 3);
  CHECK(results.contains("significance"));
  CHECK(results.at("significance").at("p_value").get<double>() <= 1.0);
  CHECK_FALSE(slurp(out / "curves.csv").empty());
}
