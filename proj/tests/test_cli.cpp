// End-to-end tests of the overlapdetect command-line tool: exit codes,
// strict config parsing, output files, and run-to-run determinism.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "ovd/json_io.hpp"

namespace fs = std::filesystem;
using ovd::Json;

namespace {

const fs::path kBase = fs::temp_directory_path() / "ovd_cli_tests";

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

CliResult run_cli(const std::string& args, const std::string& tag) {
  fs::create_directories(kBase);
  const fs::path out = kBase / (tag + ".out");
  const fs::path err = kBase / (tag + ".err");
  const std::string cmd = std::string(OVD_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kBase);
  const fs::path p = kBase / name;
  std::ofstream f(p, std::ios::binary);
  f << text;
  return p;
}

std::string uniform_identity_analyze(const std::string& extra) {
  return std::string("{\n  \"model\": {\"type\": \"memoryless\", \"probs\": [0.5, 0.5]},\n") +
         "  \"channel\": {\"type\": \"identity\"}" + extra + "\n}\n";
}

}  // namespace

TEST_CASE("cli: analyze reports noiseless analytics") {
  fs::remove_all(kBase);
  const fs::path cfg = write_config(
      "analyze_id.json", uniform_identity_analyze(",\n  \"n\": 1048615,\n  \"ell\": 20"));
  const fs::path out = kBase / "analyze_id_out";
  CliResult r = run_cli("analyze --config " + cfg.string() + " --out " + out.string(),
                        "analyze_id");
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists(out / "analysis.json"));
  const Json j = ovd::parse_json_text(slurp(out / "analysis.json"));
  CHECK(j["n"].get<std::int64_t>() == 1048615);
  CHECK(j["ell"].get<int>() == 20);
  CHECK(j["n_ell"].get<std::int64_t>() == 1048576);
  CHECK(j["source"]["entropy_rate"]["base_alphabet"].get<double>() == doctest::Approx(1.0));
  CHECK(j["pair_stats"]["mutual_info"]["base_alphabet"].get<double>() ==
        doctest::Approx(1.0));
  CHECK(j["t_mdo"].get<double>() == doctest::Approx(20.0));
  CHECK(j["theory_phi"].get<double>() == doctest::Approx(2.0));
  CHECK(j["exponents"]["e_plus"]["base_alphabet"].get<double>() == doctest::Approx(1.0));
  CHECK(j["theta_star"]["base_alphabet"].get<double>() == doctest::Approx(1.0001));
  // sigma2 = 0 makes the sqrt-scaled tail constant undefined for noiseless.
  CHECK(j["type1_bound_constant"].is_null());
  // The same JSON goes to stdout.
  CHECK(r.out.find("\"theory_phi\"") != std::string::npos);
}

TEST_CASE("cli: analyze reports noisy exponents and bounds") {
  const fs::path cfg = write_config(
      "analyze_bsc.json",
      "{\n  \"model\": {\"type\": \"memoryless\", \"probs\": [0.5, 0.5]},\n"
      "  \"channel\": {\"type\": \"bsc\", \"flip_prob\": 0.1},\n  \"n\": 1048576\n}\n");
  CliResult r = run_cli("analyze --config " + cfg.string(), "analyze_bsc");
  REQUIRE(r.code == 0);
  const Json j = ovd::parse_json_text(r.out);
  CHECK(j["pair_stats"]["mutual_info"]["base_alphabet"].get<double>() ==
        doctest::Approx(0.3199229542717203).epsilon(1e-10));
  CHECK(j["pair_stats"]["sigma2_nats"].get<double>() ==
        doctest::Approx(0.33937811297650483).epsilon(1e-10));
  CHECK(j["t_star"].get<double>() == doctest::Approx(62.51505161775104).epsilon(1e-9));
  CHECK(j["exponents"]["e_plus"]["nats"].get<double>() ==
        doctest::Approx(0.061661901374485184).epsilon(1e-7));
  CHECK(j["exponents"]["e_minus_0"]["nats"].get<double>() ==
        doctest::Approx(0.061661901374485184).epsilon(1e-7));
  CHECK(j["exponents"]["e_minus_t1"]["t"].get<int>() == 63);
  CHECK(j["theta_star"]["base_alphabet"].get<double>() ==
        doctest::Approx(3.181020741157677).epsilon(1e-5));
  CHECK(j["type1_bound_constant"].get<double>() ==
        doctest::Approx(44.97785094577902).epsilon(1e-7));
  CHECK(j["warnings"].empty());
}

TEST_CASE("cli: an uninformative channel warns and reports no exponents") {
  const fs::path cfg = write_config(
      "analyze_flat.json",
      "{\n  \"model\": {\"type\": \"memoryless\", \"probs\": [0.5, 0.5]},\n"
      "  \"channel\": {\"type\": \"bsc\", \"flip_prob\": 0.5},\n  \"beta\": 1.5\n}\n");
  CliResult r = run_cli("analyze --config " + cfg.string(), "analyze_flat");
  REQUIRE(r.code == 0);
  const Json j = ovd::parse_json_text(r.out);
  bool warned = false;
  for (const auto& w : j["warnings"])
    if (w.get<std::string>() == "detection impossible: I = 0") warned = true;
  CHECK(warned);
  CHECK(j["exponents"].is_null());
  CHECK(j["theta_star"].is_null());
  CHECK(j["t_star"].get<std::string>() == "inf");
  CHECK(j["theory_phi"].get<double>() == doctest::Approx(3.0));
}

TEST_CASE("cli: malformed JSON exits 2 with a line number and no outputs") {
  const fs::path cfg = write_config("broken.json", "{\n  \"model\": {\n    \"type\": oops\n");
  const fs::path out = kBase / "broken_out";
  CliResult r = run_cli("analyze --config " + cfg.string() + " --out " + out.string(),
                        "broken");
  CHECK(r.code == 2);
  CHECK(r.err.find("JSON parse error at line 3") != std::string::npos);
  CHECK(!fs::exists(out));
}

TEST_CASE("cli: unknown keys are rejected with their path") {
  const fs::path cfg = write_config(
      "unknown.json", uniform_identity_analyze(",\n  \"bogus\": 1"));
  CliResult r = run_cli("analyze --config " + cfg.string(), "unknown");
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown key 'bogus'") != std::string::npos);
  const fs::path cfg2 = write_config(
      "unknown2.json",
      "{\n  \"model\": {\"type\": \"memoryless\", \"probs\": [0.5, 0.5], \"extra\": 3},\n"
      "  \"channel\": {\"type\": \"identity\"}\n}\n");
  CliResult r2 = run_cli("analyze --config " + cfg2.string(), "unknown2");
  CHECK(r2.code == 2);
  CHECK(r2.err.find("/model") != std::string::npos);
  CHECK(r2.err.find("unknown key 'extra'") != std::string::npos);
}

TEST_CASE("cli: a missing config file exits 3") {
  CliResult r = run_cli("analyze --config " + (kBase / "nope.json").string(), "missing");
  CHECK(r.code == 3);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("cli: bad invocations exit 2") {
  CliResult none = run_cli("", "noargs");
  CHECK(none.code == 2);
  CliResult unknown = run_cli("frobnicate --config x.json", "badcmd");
  CHECK(unknown.code == 2);
  CliResult noconf = run_cli("analyze", "noconf");
  CHECK(noconf.code == 2);
}

TEST_CASE("cli: simulate writes reports and repeats byte for byte") {
  // beta = 2 keeps several strata genuinely stochastic, so distinct seeds
  // cannot collide on the whole report.
  const std::string sim_cfg =
      "{\n  \"model\": {\"type\": \"memoryless\", \"probs\": [0.5, 0.5]},\n"
      "  \"channel\": {\"type\": \"bsc\", \"flip_prob\": 0.1},\n"
      "  \"beta\": 2.0,\n  \"n_grid\": [64],\n"
      "  \"trials_per_stratum\": 400,\n  \"trials_t0\": 400,\n  \"seed\": 1\n}\n";
  const fs::path cfg = write_config("sim.json", sim_cfg);
  const fs::path out1 = kBase / "sim1";
  const fs::path out2 = kBase / "sim2";
  CliResult r1 = run_cli("simulate --config " + cfg.string() + " --seed 9 --out " +
                             out1.string(),
                         "sim1");
  CliResult r2 = run_cli("simulate --config " + cfg.string() + " --seed 9 --out " +
                             out2.string(),
                         "sim2");
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  const std::string csv1 = slurp(out1 / "report.csv");
  REQUIRE(!csv1.empty());
  CHECK(csv1 == slurp(out2 / "report.csv"));
  CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
  // Header, the t = 0 row, then one row per overlap stratum (ell = 12).
  CHECK(csv1.rfind("n,ell,stratum_t,trials,errors,estimate,ci_lo,ci_hi,phi_hat,theory_phi",
                   0) == 0);
  int lines = 0;
  for (char c : csv1)
    if (c == '\n') ++lines;
  CHECK(lines == 1 + 1 + (2 * 12 - 1));
  // The seed override is recorded in the echoed config.
  const Json j = ovd::parse_json_text(slurp(out1 / "report.json"));
  CHECK(j["config"]["seed"].get<std::uint64_t>() == 9);
  CHECK(j["report"]["records"][0]["ell"].get<int>() == 12);
  // A different seed changes the CSV.
  const fs::path out3 = kBase / "sim3";
  run_cli("simulate --config " + cfg.string() + " --seed 10 --out " + out3.string(), "sim3");
  CHECK(slurp(out3 / "report.csv") != csv1);
}

TEST_CASE("cli: sweep needs three grid points and emits verdicts") {
  const std::string base_cfg =
      "{\n  \"model\": {\"type\": \"memoryless\", \"probs\": [0.5, 0.5]},\n"
      "  \"channel\": {\"type\": \"identity\"},\n  \"beta\": 1.0,\n"
      "  \"n_grid\": [GRID],\n  \"trials_per_stratum\": 300,\n"
      "  \"trials_t0\": 300,\n  \"seed\": 3\n}\n";
  auto with_grid = [&](const std::string& grid) {
    std::string s = base_cfg;
    s.replace(s.find("GRID"), 4, grid);
    return s;
  };
  const fs::path two = write_config("sweep2.json", with_grid("256, 512"));
  CliResult r2 = run_cli("sweep --config " + two.string(), "sweep2");
  CHECK(r2.code == 2);
  const fs::path three = write_config("sweep3.json", with_grid("256, 512, 1024"));
  const fs::path out = kBase / "sweep_out";
  CliResult r3 = run_cli("sweep --config " + three.string() + " --out " + out.string(),
                         "sweep3");
  REQUIRE(r3.code == 0);
  REQUIRE(fs::exists(out / "sweep.json"));
  REQUIRE(fs::exists(out / "sweep.csv"));
  const Json j = ovd::parse_json_text(slurp(out / "sweep.json"));
  CHECK(j["verdicts"]["phi_trend"]["values"].size() == 3);
  CHECK(j["verdicts"]["phi_trend"].contains("decreasing_toward_theory"));
  CHECK(j["verdicts"]["type1_scaling"]["values"].size() == 3);
  CHECK(j["verdicts"]["type1_scaling"].contains("bounded"));
  CHECK(j["verdicts"]["profile"].contains("ok"));
  CHECK(j["report"]["records"].size() == 3);
}

TEST_CASE("cli: oracle-check matches the posterior on random instances") {
  const fs::path cfg = write_config(
      "oracle.json",
      "{\n  \"model\": {\"type\": \"memoryless\", \"probs\": [0.5, 0.5]},\n"
      "  \"channel\": {\"type\": \"identity\"},\n  \"n\": 16,\n  \"ell\": 4,\n"
      "  \"instances\": 10000\n}\n");
  CliResult r = run_cli("oracle-check --config " + cfg.string() + " --seed 7", "oracle");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("10000 instances") != std::string::npos);
  CHECK(r.out.find("match") != std::string::npos);
}

TEST_CASE("cli: oracle-check handles noisy channels and fixtures") {
  const fs::path noisy = write_config(
      "oracle_noisy.json",
      "{\n  \"model\": {\"type\": \"memoryless\", \"probs\": [0.5, 0.5]},\n"
      "  \"channel\": {\"type\": \"bsc\", \"flip_prob\": 0.25},\n  \"n\": 16,\n"
      "  \"ell\": 4,\n  \"instances\": 300\n}\n");
  CliResult r = run_cli("oracle-check --config " + noisy.string() + " --seed 11",
                        "oracle_noisy");
  REQUIRE(r.code == 0);

  const fs::path fix = write_config(
      "oracle_fix.json",
      "{\n  \"model\": {\"type\": \"memoryless\", \"probs\": [0.5, 0.5]},\n"
      "  \"channel\": {\"type\": \"identity\"},\n  \"n\": 16,\n  \"ell\": 4,\n"
      "  \"fixtures\": [\n"
      "    {\"read1\": [0,1,0,1], \"read2\": [0,1,0,1], \"i1\": 2, \"i2\": 2, \"t\": 4},\n"
      "    {\"read1\": [0,0,1,1], \"read2\": [1,0,1,0], \"i1\": 0, \"i2\": 9, \"t\": -3}\n"
      "  ]\n}\n");
  const fs::path out = kBase / "oracle_fix_out";
  CliResult rf = run_cli("oracle-check --config " + fix.string() + " --scores --out " +
                             out.string(),
                         "oracle_fix");
  REQUIRE(rf.code == 0);
  const Json dec = ovd::parse_json_text(slurp(out / "decisions.json"));
  REQUIRE(dec.size() == 2);
  CHECK(dec[0]["match"].get<bool>());
  CHECK(dec[0]["t_hat"].get<int>() == 4);
  CHECK(dec[0]["posterior_map"].get<int>() == 4);
  REQUIRE(dec[0].contains("scores"));
  CHECK(dec[0]["scores"].size() == 8);  // t in -3..4
  CHECK(dec[0]["scores"][0]["t"].get<int>() == -3);
  CHECK(dec[0]["scores"].back()["t"].get<int>() == 4);
  CHECK(dec[1]["match"].get<bool>());
  // Without --scores the vectors are omitted.
  const fs::path out2 = kBase / "oracle_fix_out2";
  run_cli("oracle-check --config " + fix.string() + " --out " + out2.string(), "oracle_fix2");
  const Json dec2 = ovd::parse_json_text(slurp(out2 / "decisions.json"));
  CHECK(!dec2[0].contains("scores"));
}

TEST_CASE("cli: experiment configs are validated strictly") {
  const fs::path bad = write_config(
      "sim_bad.json",
      "{\n  \"model\": {\"type\": \"memoryless\", \"probs\": [0.5, 0.5]},\n"
      "  \"channel\": {\"type\": \"identity\"},\n  \"beta\": -1.0,\n"
      "  \"n_grid\": [256]\n}\n");
  CliResult r = run_cli("simulate --config " + bad.string(), "sim_bad");
  CHECK(r.code == 2);
  const fs::path bsc3 = write_config(
      "sim_bsc3.json",
      "{\n  \"model\": {\"type\": \"memoryless\", \"probs\": [0.25, 0.5, 0.25]},\n"
      "  \"channel\": {\"type\": \"bsc\", \"flip_prob\": 0.1},\n"
      "  \"n_grid\": [256]\n}\n");
  CliResult r2 = run_cli("simulate --config " + bsc3.string(), "sim_bsc3");
  CHECK(r2.code == 2);
  CHECK(r2.err.find("bsc requires a binary source") != std::string::npos);
}
