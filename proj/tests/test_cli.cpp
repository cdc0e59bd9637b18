// Exercises the installed binary end to end (exit codes, JSON output,
// artifact determinism) plus the in-process experiment layer it wraps.
// Expects the binary path as the first program argument.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "forch/experiments.hpp"

using namespace forch;

namespace {

std::string g_binary;
std::string g_tmp;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << bytes;
}

struct CmdResult {
  int code = -1;
  std::string out, err;
};

CmdResult run_cmd(const std::string& args) {
  const std::string out_path = g_tmp + "/stdout.txt";
  const std::string err_path = g_tmp + "/stderr.txt";
  const std::string full = g_binary + " " + args + " > " + out_path + " 2> " + err_path;
  const int status = std::system(full.c_str());
  CmdResult res;
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  res.out = slurp(out_path);
  res.err = slurp(err_path);
  return res;
}

const char* kRunConfig = R"([experiment]
name = "cli-annulus"

[model]
name = "M0"

[flow]
n = 2
r0 = 1.0
c1 = 1.0
c2 = 1.0
s0 = 0.5

[steady]
r_end = 50.0

[solver]
r_out = 2.0
cells = 60
dt = 2e-3
t_final = 0.1
w0 = "bump"
w0_lo = 1.0
w0_hi = 2.0
)";

}  // namespace

TEST_CASE("binary: classify emits the case label with the config hash") {
  const std::string cfg = g_tmp + "/classify.toml";
  spit(cfg, kRunConfig);
  const CmdResult res = run_cmd("--config " + cfg + " classify");
  CHECK(res.code == 0);
  CHECK(res.out.find("\"global_case\"") != std::string::npos);
  CHECK(res.out.find("\"prediction\"") != std::string::npos);
  CHECK(res.out.find(fnv1a_hex(kRunConfig)) != std::string::npos);
}

TEST_CASE("binary: config errors exit with code 2 and name the problem") {
  const std::string cfg = g_tmp + "/nomodel.toml";
  spit(cfg, "[flow]\nn = 2\n");
  const CmdResult missing = run_cmd("--config " + cfg + " classify");
  CHECK(missing.code == 2);
  CHECK(missing.err.find("missing [model] table") != std::string::npos);

  spit(cfg, "[model]\nname = \"M0\"\n[flow]\nc1 = oops\n");
  const CmdResult parse = run_cmd("--config " + cfg + " classify");
  CHECK(parse.code == 2);
  CHECK(parse.err.find(":4:") != std::string::npos);  // line:col of the bad value

  CHECK(run_cmd("classify").code == 2);       // no config at all
  CHECK(run_cmd("frobnicate").code == 2);     // unknown subcommand
  CHECK(run_cmd("--help").code == 0);
}

TEST_CASE("binary: simulate produces verifiable, byte-stable artifacts") {
  const std::string cfg = g_tmp + "/run.toml";
  spit(cfg, kRunConfig);
  const std::string dir1 = g_tmp + "/run1";
  const std::string dir2 = g_tmp + "/run2";

  const CmdResult sim = run_cmd("--config " + cfg + " --out " + dir1 + " simulate");
  CHECK(sim.code == 0);
  CHECK(sim.out.find("\"failures\": 0") != std::string::npos);
  for (const char* f : {"config.toml", "field.csv", "report.json", "meta.json"})
    CHECK(std::filesystem::exists(dir1 + "/" + f));

  const CmdResult ver = run_cmd("verify --run " + dir1);
  CHECK(ver.code == 0);
  CHECK(ver.out.find("\"envelope_ok\": true") != std::string::npos);

  CHECK(run_cmd("--config " + cfg + " --out " + dir2 + " simulate").code == 0);
  CHECK(slurp(dir1 + "/field.csv") == slurp(dir2 + "/field.csv"));
  CHECK(slurp(dir1 + "/report.json") == slurp(dir2 + "/report.json"));

  SUBCASE("config tampering is refused with exit code 2") {
    const std::string dir3 = g_tmp + "/run_tampered";
    std::filesystem::copy(dir1, dir3, std::filesystem::copy_options::recursive);
    std::string cfg_text = slurp(dir3 + "/config.toml");
    cfg_text.replace(cfg_text.find("s0 = 0.5"), 8, "s0 = 0.6");
    spit(dir3 + "/config.toml", cfg_text);
    const CmdResult bad = run_cmd("verify --run " + dir3);
    CHECK(bad.code == 2);
    CHECK(bad.err.find("hash mismatch") != std::string::npos);
  }
}

TEST_CASE("binary: steady, coeffs, constants, barriers round trips") {
  const std::string cfg = g_tmp + "/aux.toml";
  spit(cfg, kRunConfig);
  const std::string dir = g_tmp + "/aux";

  const CmdResult steady = run_cmd("--config " + cfg + " --out " + dir + " steady");
  CHECK(steady.code == 0);
  CHECK(std::filesystem::exists(dir + "/profile.csv"));
  CHECK(steady.out.find("\"finite_exit\": false") != std::string::npos);

  const CmdResult coeffs =
      run_cmd("--config " + cfg + " --out " + dir + " coeffs --samples 50");
  CHECK(coeffs.code == 0);
  const std::string csv = slurp(dir + "/coeffs.csv");
  CHECK(csv.find("r,s,beta,gamma,phi,lambda,phi_prime,Lambda,f0") != std::string::npos);

  const CmdResult constants = run_cmd("--config " + cfg + " constants");
  CHECK(constants.code == 0);
  CHECK(constants.out.find("\"kappa0\"") != std::string::npos);
  CHECK(constants.out.find("\"eta1\"") != std::string::npos);

  const CmdResult barriers = run_cmd("--config " + cfg + " barriers --samples 400");
  CHECK(barriers.code == 0);
  CHECK(barriers.out.find("\"all_passed\": true") != std::string::npos);
}

TEST_CASE("binary: sweep writes per-tuple rows and a summary") {
  const std::string cfg = g_tmp + "/sweep.toml";
  spit(cfg, std::string(kRunConfig) + "\n[sweep]\nc1 = [0.5, 1.0]\ns0 = [0.3, 0.6]\n");
  const std::string dir = g_tmp + "/sweep_out";
  // Tail extrapolation needs r_end >= 1e3 r0; patch the window up.
  std::string text = slurp(cfg);
  text.replace(text.find("r_end = 50.0"), 12, "r_end = 2e3 ");
  spit(cfg, text);

  const CmdResult res = run_cmd("--config " + cfg + " --out " + dir + " --threads 2 sweep");
  CHECK(res.code == 0);
  CHECK(res.out.find("\"tuples\": 4") != std::string::npos);
  CHECK(res.out.find("\"failures\": 0") != std::string::npos);
  const std::string csv = slurp(dir + "/sweep.csv");
  CHECK(csv.find("index,c1,c2,s0") != std::string::npos);
  CHECK(std::filesystem::exists(dir + "/sweep.json"));
}

TEST_CASE("experiments: data tampering fails the stored-envelope re-check") {
  const ExperimentConfig cfg = parse_config(kRunConfig, "mem.toml");
  const std::string dir = g_tmp + "/inproc";
  const RunSummary sum = simulate_run(cfg, dir);
  CHECK(sum.failures == 0);
  CHECK(sum.has_sigma);
  CHECK(sum.decay.envelope_all_ok);
  CHECK(sum.sigma.all_ok);
  CHECK(sum.max_principle.ok);
  CHECK(verify_run_dir(dir).failures == 0);

  // Blow up one interior w sample at a positive time; the hash still matches
  // (it covers the config, not the data), so the violation must be caught by
  // the re-derived envelope, not by provenance.
  std::string csv = slurp(dir + "/field.csv");
  std::istringstream in(csv);
  std::ostringstream patched;
  std::string line;
  int data_rows = 0;
  bool done = false;
  while (std::getline(in, line)) {
    if (!done && !line.empty() && line[0] != '#' && line[0] != 'm') {
      ++data_rows;
      if (data_rows > 200) {  // some row well past t = 0
        std::size_t c1 = line.find(',');
        std::size_t c2 = line.find(',', c1 + 1);
        std::size_t c3 = line.find(',', c2 + 1);
        std::size_t c4 = line.find(',', c3 + 1);
        line = line.substr(0, c3 + 1) + "999" + line.substr(c4);
        done = true;
      }
    }
    patched << line << "\n";
  }
  REQUIRE(done);
  spit(dir + "/field.csv", patched.str());
  const VerifyReport rep = verify_run_dir(dir);
  CHECK(rep.failures > 0);
  CHECK_FALSE(rep.envelope_ok);
}

TEST_CASE("experiments: sweep rows are bitwise identical across thread counts") {
  std::string text(kRunConfig);
  text.replace(text.find("r_end = 50.0"), 12, "r_end = 2e3 ");
  text += "\n[sweep]\nc1 = [0.5, 1.5]\nc2 = [0.5, 1.5]\ns0 = [0.25, 0.75]\n";
  const ExperimentConfig base = parse_config(text, "sw.toml");
  const TomlDocument doc = parse_toml(text, "sw.toml");

  const SweepResult serial = run_sweep(base, doc, 1);
  const SweepResult parallel = run_sweep(base, doc, 3);
  REQUIRE(serial.rows.size() == 8);
  REQUIRE(parallel.rows.size() == 8);
  CHECK(serial.failures == 0);
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].s_infty == parallel.rows[i].s_infty);  // bitwise
    CHECK(serial.rows[i].r_detect == parallel.rows[i].r_detect);
    CHECK(serial.rows[i].global_case == parallel.rows[i].global_case);
    CHECK(serial.rows[i].prediction == parallel.rows[i].prediction);
    CHECK(serial.rows[i].ok == parallel.rows[i].ok);
  }
  // Row order follows the cartesian product, outermost axis first.
  CHECK(serial.rows[0].c1 == 0.5);
  CHECK(serial.rows[0].c2 == 0.5);
  CHECK(serial.rows[0].s0 == 0.25);
  CHECK(serial.rows[7].c1 == 1.5);
  CHECK(serial.rows[7].c2 == 1.5);
  CHECK(serial.rows[7].s0 == 0.75);
}

TEST_CASE("experiments: sweep records per-tuple failures without aborting") {
  std::string text(kRunConfig);
  text.replace(text.find("r_end = 50.0"), 12, "r_end = 2e3 ");
  text += "\n[sweep]\ns0 = [0.5, 2.0]\n";  // second tuple violates s0 in (0,1)
  const ExperimentConfig base = parse_config(text, "bad.toml");
  const TomlDocument doc = parse_toml(text, "bad.toml");
  const SweepResult res = run_sweep(base, doc, 1);
  REQUIRE(res.rows.size() == 2);
  CHECK(res.rows[0].error.empty());
  CHECK_FALSE(res.rows[1].ok);
  CHECK_FALSE(res.rows[1].error.empty());
  CHECK(res.failures == 1);
}

int run_all(int argc, char** argv) {
  doctest::Context ctx;
  ctx.applyCommandLine(1, argv);
  return ctx.run();
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-forch-binary>\n");
    return 1;
  }
  g_binary = argv[1];
  g_tmp = "/tmp/forch_cli_tests";
  std::filesystem::remove_all(g_tmp);
  std::filesystem::create_directories(g_tmp);
  return run_all(argc, argv);
}
