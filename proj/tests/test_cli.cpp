#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "l1cert/generator.hpp"
#include "l1cert/io.hpp"

using namespace l1cert;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_dir;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const fs::path out_file = g_dir / "stdout.txt";
  std::ostringstream cmd;
  cmd << '"' << g_cli << "\" " << args << " > \"" << out_file.string() << "\" 2> \""
      << (g_dir / "stderr.txt").string() << '"';
  const int status = std::system(cmd.str().c_str());
  RunResult res;
  res.exit_code = WEXITSTATUS(status);
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  res.out = ss.str();
  return res;
}

void write_example_files() {
  write_matrix_csv((g_dir / "A.csv").string(), testutil::example_matrix());
  write_vector_csv((g_dir / "b.csv").string(), testutil::example_datum());
  write_vector_csv((g_dir / "x.csv").string(), testutil::vec({0, 0.25, 0}));
  write_matrix_csv((g_dir / "I2.csv").string(), Matrix::Identity(2, 2));
  write_vector_csv((g_dir / "e1.csv").string(), testutil::vec({1, 0}));
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("solve: lasso reproduces the worked solution") {
  const RunResult res = run_cli("solve --model lasso --A " + q(g_dir / "A.csv") + " --b " +
                                q(g_dir / "b.csv") + " --lambda 1");
  REQUIRE(res.exit_code == 0);
  const json rep = json::parse(res.out);
  REQUIRE(rep.contains("x"));
  CHECK(std::abs(rep["x"][0].get<double>() - 0.0) < 1e-6);
  CHECK(std::abs(rep["x"][1].get<double>() - 0.25) < 1e-6);
  CHECK(std::abs(rep["x"][2].get<double>() - 0.0) < 1e-6);
}

TEST_CASE("solve: bp on the identity instance") {
  const RunResult res = run_cli("solve --model bp --A " + q(g_dir / "I2.csv") + " --b " +
                                q(g_dir / "e1.csv"));
  REQUIRE(res.exit_code == 0);
  const json rep = json::parse(res.out);
  CHECK(std::abs(rep["objective"].get<double>() - 1.0) < 1e-9);
  CHECK(std::abs(rep["x"][0].get<double>() - 1.0) < 1e-9);
}

TEST_CASE("solve: dimension mismatch exits 2 with a machine-readable error") {
  const RunResult res = run_cli("solve --model bp --A " + q(g_dir / "I2.csv") + " --b " +
                                q(g_dir / "x.csv"));
  CHECK(res.exit_code == 2);
  const json rep = json::parse(res.out);
  REQUIRE(rep.contains("error"));
  CHECK(rep["error"]["code"] == "input_error");
  CHECK(rep["error"]["message"].get<std::string>().find("dimension mismatch") !=
        std::string::npos);
}

TEST_CASE("check: worked lasso instance is unique with the expected report shape") {
  const RunResult res = run_cli("check --model lasso --A " + q(g_dir / "A.csv") + " --b " +
                                q(g_dir / "b.csv") + " --param 1 --x " + q(g_dir / "x.csv") +
                                " --with-oracle");
  REQUIRE(res.exit_code == 0);
  const json rep = json::parse(res.out);
  CHECK(rep["verdict"] == "unique");
  CHECK(std::abs(rep["eps_star"].get<double>() - 2.0 / 3) < 1e-8);
  CHECK(rep["support"] == json::array({1}));
  CHECK(rep["equicorrelation"]["indices"] == json::array({0, 1, 2}));
  CHECK(rep["oracle"]["unique"] == true);
  CHECK(rep["agreement"] == true);

  // Schema stability: exactly the documented field set, in sorted order.
  const std::vector<std::string> expected = {
      "active_set", "agreement",       "certificate", "command", "eps_star",
      "equicorrelation", "instance",   "oracle",      "reason",  "signs",
      "support",     "verdict",        "witness"};
  std::vector<std::string> got;
  for (auto it = rep.begin(); it != rep.end(); ++it) got.push_back(it.key());
  CHECK(got == expected);
}

TEST_CASE("check: non-unique point carries a witness") {
  write_vector_csv((g_dir / "x_flat.csv").string(), testutil::vec({1, 0.5, 0}));
  const RunResult res = run_cli("check --model bp --A " + q(g_dir / "A.csv") + " --b " +
                                q(g_dir / "b.csv") + " --x " + q(g_dir / "x_flat.csv"));
  REQUIRE(res.exit_code == 0);
  const json rep = json::parse(res.out);
  CHECK(rep["verdict"] == "not_unique");
  REQUIRE(rep["witness"].is_object());
  CHECK(rep["witness"]["kind"] == "second_point");
}

TEST_CASE("check: non-optimal point is indeterminate") {
  write_vector_csv((g_dir / "x_bad.csv").string(), testutil::vec({0.1, 0.2, 0}));
  const RunResult res = run_cli("check --model lasso --A " + q(g_dir / "A.csv") + " --b " +
                                q(g_dir / "b.csv") + " --param 1 --x " + q(g_dir / "x_bad.csv"));
  REQUIRE(res.exit_code == 0);
  const json rep = json::parse(res.out);
  CHECK(rep["verdict"] == "indeterminate");
  CHECK(rep["reason"] == "not optimal");
}

TEST_CASE("check: constrained models verify at a supplied point") {
  write_vector_csv((g_dir / "b3.csv").string(), testutil::vec({3, 0}));
  write_vector_csv((g_dir / "x2.csv").string(), testutil::vec({2, 0}));
  const RunResult res_con =
      run_cli("check --model res-con --A " + q(g_dir / "I2.csv") + " --b " + q(g_dir / "b3.csv") +
              " --param 0.5 --x " + q(g_dir / "x2.csv"));
  REQUIRE(res_con.exit_code == 0);
  CHECK(json::parse(res_con.out)["verdict"] == "unique");

  write_vector_csv((g_dir / "b2.csv").string(), testutil::vec({2, 0}));
  const RunResult l1_con =
      run_cli("check --model l1-con --A " + q(g_dir / "I2.csv") + " --b " + q(g_dir / "b2.csv") +
              " --param 1 --x " + q(g_dir / "e1.csv"));
  REQUIRE(l1_con.exit_code == 0);
  const json rep = json::parse(l1_con.out);
  CHECK(rep["verdict"] == "unique");
  CHECK(rep["active_set"]["kind"] == "l1-con");

  // Missing parameter is an input error.
  const RunResult missing =
      run_cli("check --model res-con --A " + q(g_dir / "I2.csv") + " --b " + q(g_dir / "b3.csv") +
              " --x " + q(g_dir / "x2.csv"));
  CHECK(missing.exit_code == 2);
}

TEST_CASE("certify on the worked patterns") {
  const std::string base = "certify --A " + q(g_dir / "A.csv");
  {
    const RunResult res = run_cli(base + " --support 1 --signs +1");
    REQUIRE(res.exit_code == 0);
    const json rep = json::parse(res.out);
    CHECK(std::abs(rep["eps_star"].get<double>() - 2.0 / 3) < 1e-8);
  }
  {
    const RunResult res = run_cli(base + " --support 0,1 --signs +1,+1");
    REQUIRE(res.exit_code == 0);
    const json rep = json::parse(res.out);
    CHECK(std::abs(rep["eps_star"].get<double>()) < 1e-8);
  }
  {
    const RunResult res =
        run_cli("certify --A " + q(g_dir / "I2.csv") + " --support 0 --signs +1");
    REQUIRE(res.exit_code == 0);
    const json rep = json::parse(res.out);
    CHECK(std::abs(rep["eps_star"].get<double>() - 1.0) < 1e-8);
  }
  {
    const RunResult res = run_cli(base + " --support 1 --signs +1 --engine admm");
    REQUIRE(res.exit_code == 0);
    const json rep = json::parse(res.out);
    CHECK(rep["status"] == "ok");
    CHECK(rep["iterations"].get<int>() > 0);
  }
}

TEST_CASE("generate round trip: the emitted instance re-checks as claimed") {
  const fs::path dir = g_dir / "gen_u";
  const RunResult gen = run_cli("generate --m 4 --n 8 --k 2 --delta 0.1 --seed 7 --out " + q(dir));
  REQUIRE(gen.exit_code == 0);
  const json rep = json::parse(gen.out);
  CHECK(rep["validation"]["uniqueness_condition"] == "holds");
  CHECK(rep["validation"]["oracle_unique"] == true);
  for (const char* f : {"A.csv", "b.csv", "xstar.csv", "instance.json"}) {
    CHECK(fs::exists(dir / f));
  }
  const RunResult chk = run_cli("check --model bp --A " + q(dir / "A.csv") + " --b " +
                                q(dir / "b.csv") + " --x " + q(dir / "xstar.csv") +
                                " --with-oracle");
  REQUIRE(chk.exit_code == 0);
  const json chk_rep = json::parse(chk.out);
  CHECK(chk_rep["verdict"] == "unique");
  CHECK(chk_rep["agreement"] == true);

  const fs::path dir2 = g_dir / "gen_nu";
  const RunResult gen2 =
      run_cli("generate --m 2 --n 3 --k 2 --delta 0.2 --seed 1 --nonunique --out " + q(dir2));
  REQUIRE(gen2.exit_code == 0);
  const RunResult chk2 = run_cli("check --model bp --A " + q(dir2 / "A.csv") + " --b " +
                                 q(dir2 / "b.csv") + " --x " + q(dir2 / "xstar.csv"));
  REQUIRE(chk2.exit_code == 0);
  CHECK(json::parse(chk2.out)["verdict"] == "not_unique");
}

TEST_CASE("reports are byte-identical across reruns") {
  const std::string cmd = "check --model lasso --A " + q(g_dir / "A.csv") + " --b " +
                          q(g_dir / "b.csv") + " --param 1 --x " + q(g_dir / "x.csv");
  const RunResult r1 = run_cli(cmd);
  const RunResult r2 = run_cli(cmd);
  REQUIRE(r1.exit_code == 0);
  CHECK(r1.out == r2.out);

  const RunResult g1 = run_cli("generate --m 3 --n 6 --k 2 --seed 5 --out " + q(g_dir / "d1"));
  const RunResult g2 = run_cli("generate --m 3 --n 6 --k 2 --seed 5 --out " + q(g_dir / "d2"));
  REQUIRE(g1.exit_code == 0);
  REQUIRE(g2.exit_code == 0);
  std::ifstream f1(g_dir / "d1" / "A.csv"), f2(g_dir / "d2" / "A.csv");
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
}

TEST_CASE("L1CERT_SEED overrides --seed") {
  const RunResult env_run =
      run_cli("generate --m 3 --n 6 --k 2 --seed 1 --out " + q(g_dir / "env"));
  REQUIRE(env_run.exit_code == 0);
  // Same command with the env var must reproduce seed 7, not seed 1.
  std::ostringstream cmd;
  cmd << "L1CERT_SEED=7 \"" << g_cli << "\" generate --m 3 --n 6 --k 2 --seed 1 --out \""
      << (g_dir / "env7").string() << "\" > \"" << (g_dir / "env_out.txt").string() << "\" 2>&1";
  REQUIRE(std::system(cmd.str().c_str()) == 0);
  const RunResult direct = run_cli("generate --m 3 --n 6 --k 2 --seed 7 --out " +
                                   q(g_dir / "seed7"));
  REQUIRE(direct.exit_code == 0);
  std::ifstream f1(g_dir / "env7" / "A.csv"), f2(g_dir / "seed7" / "A.csv");
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
}

TEST_CASE("csv round trip preserves every ulp") {
  SeededRng rng(99);
  Matrix a(6, 5);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      a(i, j) = rng.gaussian() * std::pow(10.0, rng.uniform(-12.0, 12.0));
    }
  }
  const fs::path p = g_dir / "roundtrip.csv";
  write_matrix_csv(p.string(), a);
  const Matrix back = read_matrix_csv(p.string());
  REQUIRE(back.rows() == a.rows());
  REQUIRE(back.cols() == a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) CHECK(back(i, j) == a(i, j));
  }
}

TEST_CASE("csv rejects malformed input") {
  {
    std::ofstream f(g_dir / "ragged.csv");
    f << "1,2\n3\n";
  }
  CHECK_THROWS_AS(read_matrix_csv((g_dir / "ragged.csv").string()), IOError);
  {
    std::ofstream f(g_dir / "nan.csv");
    f << "1,nan\n";
  }
  CHECK_THROWS_AS(read_matrix_csv((g_dir / "nan.csv").string()), IOError);
  CHECK_THROWS_AS(read_matrix_csv((g_dir / "missing.csv").string()), IOError);
}

int main(int argc, char** argv) {
  if (argc < 2 || argv[1][0] == '-') {
    std::fprintf(stderr, "usage: test_cli <path-to-l1cert-binary> [doctest args]\n");
    return 1;
  }
  g_cli = argv[1];
  g_dir = fs::temp_directory_path() / "l1cert_cli_test";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);
  write_example_files();

  doctest::Context ctx;
  ctx.applyCommandLine(argc - 1, argv + 1);
  const int rc = ctx.run();
  fs::remove_all(g_dir);
  return rc;
}
