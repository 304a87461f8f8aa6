// Command-line front end: analyze | simulate | sweep | oracle-check.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ovd/channel.hpp"
#include "ovd/common.hpp"
#include "ovd/detector.hpp"
#include "ovd/json_io.hpp"
#include "ovd/montecarlo.hpp"
#include "ovd/oracle.hpp"
#include "ovd/rng.hpp"
#include "ovd/sampler.hpp"

namespace {

using ovd::Json;

// Exit codes: 0 ok, 2 config/schema, 3 I/O, 4 oracle mismatch.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitMismatch = 4;

void ensure_out_dir(const std::string& out_dir) {
  if (out_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ovd::IoError("cannot create output directory '" + out_dir + "'");
}

Json log_value_json(double nats, double ln_k) {
  Json j;
  j["base_alphabet"] = ovd::json_real(nats / ln_k);
  j["nats"] = ovd::json_real(nats);
  return j;
}

Json build_analysis(const ovd::AnalyzeConfig& cfg) {
  const double ln_k = std::log(static_cast<double>(cfg.model.alphabet_size()));
  ovd::ExperimentConfig geometry(cfg.model, cfg.channel);
  geometry.beta = cfg.beta;
  const int ell = cfg.ell ? *cfg.ell : geometry.ell_for(cfg.n);
  const ovd::OverlapPrior prior(cfg.n, ell);

  Json rep;
  Json warnings = Json::array();
  rep["model"] = ovd::model_to_json(cfg.model);
  rep["channel"] = ovd::channel_to_json(cfg.channel);
  rep["n"] = cfg.n;
  rep["ell"] = ell;
  rep["n_ell"] = prior.n_ell;
  rep["beta"] = cfg.beta;

  Json source;
  const double h1 = cfg.model.entropy_rate();
  source["entropy_rate"] = log_value_json(h1 * ln_k, ln_k);
  Json renyi = Json::array();
  for (double alpha : cfg.renyi_alphas) {
    const ovd::RenyiRate r = cfg.model.renyi_entropy_rate(alpha);
    Json item;
    item["alpha"] = alpha;
    item["base_alphabet"] = r.value;
    item["nats"] = r.value * ln_k;
    item["approximate"] = r.approximate;
    item["block_length"] = r.block_length;
    renyi.push_back(std::move(item));
  }
  source["renyi_rates"] = std::move(renyi);
  const ovd::RenyiRate hmin = cfg.model.renyi_entropy_rate(-ovd::kPosInf);
  source["h_minus_inf"] = log_value_json(hmin.value * ln_k, ln_k);
  source["h_minus_inf"]["approximate"] = hmin.approximate;
  source["h_minus_inf"]["block_length"] = hmin.block_length;
  Json mixing = Json::array();
  for (std::uint64_t s : cfg.mixing_s) {
    Json item;
    item["s"] = s;
    item["bound"] = cfg.model.mixing_coefficient_bound(s);
    mixing.push_back(std::move(item));
  }
  source["mixing_bounds"] = std::move(mixing);
  Json recurrence = Json::array();
  for (std::uint64_t s : cfg.recurrence_s) {
    Json item;
    item["s"] = s;
    item["probability"] = cfg.model.recurrence_probability(s);
    recurrence.push_back(std::move(item));
  }
  source["recurrence"] = std::move(recurrence);
  rep["source"] = std::move(source);

  const ovd::PairStats stats = ovd::pair_statistics(cfg.model, cfg.channel);
  Json ch;
  ch["mutual_info"] = log_value_json(stats.mutual_info_nats, ln_k);
  ch["lambda_min"] = stats.lambda_min;
  ch["lambda_max"] = stats.lambda_max;
  ch["sigma2_nats"] = stats.sigma2;
  ch["m3_nats"] = stats.m3;
  rep["pair_stats"] = std::move(ch);

  const bool informative = stats.mutual_info_nats > 0.0;
  if (!informative) warnings.push_back("detection impossible: I = 0");

  const double rate = stats.mutual_info;  // base-|X|; equals H1 for identity
  rep["t_star"] =
      ovd::json_real(rate > 0.0 ? std::log(static_cast<double>(cfg.n)) / ln_k / rate
                                : ovd::kPosInf);
  if (cfg.channel.is_identity()) {
    rep["t_mdo"] =
        ovd::min_detectable_overlap_noiseless(cfg.model, cfg.n, ell, cfg.mu);
  } else {
    rep["t_mdo"] = ovd::json_real(
        ovd::min_detectable_overlap_noisy(stats.lambda_max, cfg.n, ell, cfg.mu));
  }
  const double inv_rate = rate > 0.0 ? 1.0 / rate : ovd::kPosInf;
  rep["theory_phi"] = ovd::json_real(2.0 * std::min(cfg.beta, inv_rate));

  if (informative) {
    const int t1 = std::max(
        1, static_cast<int>(std::ceil(std::log(static_cast<double>(cfg.n)) / ln_k / rate)));
    const ovd::ChernoffExponents ex =
        ovd::chernoff_exponents(stats, static_cast<double>(prior.n_ell), t1);
    Json exj;
    if (ex.e_minus_0_infinite) {
      exj["e_minus_0"] = "inf";
    } else {
      exj["e_minus_0"] = log_value_json(ex.e_minus_0.nats, ln_k);
    }
    exj["e_plus"] = log_value_json(ex.e_plus.nats, ln_k);
    exj["e_minus_t1"] = log_value_json(ex.e_minus_t1.nats, ln_k);
    exj["e_minus_t1"]["t"] = t1;
    rep["exponents"] = std::move(exj);
    Json theta;
    theta["eps"] = cfg.theta_eps;
    const double th = ovd::theta_star(stats, cfg.theta_eps);
    theta["base_alphabet"] = th;
    theta["nats"] = th / ln_k;
    rep["theta_star"] = std::move(theta);
  } else {
    rep["exponents"] = nullptr;
    rep["theta_star"] = nullptr;
  }
  try {
    rep["type1_bound_constant"] = ovd::type1_mgf_bound(stats, 0.0);
  } catch (const ovd::BoundUndefined&) {
    rep["type1_bound_constant"] = nullptr;
    warnings.push_back("type-1 tail bound undefined: Var[ln lambda] = 0");
  }
  rep["warnings"] = std::move(warnings);
  return rep;
}

int run_analyze(const std::string& config_path, const std::string& out_dir) {
  const ovd::AnalyzeConfig cfg = ovd::analyze_config_from_json(ovd::read_json_file(config_path));
  const Json rep = build_analysis(cfg);
  const std::string text = rep.dump(2) + "\n";
  ensure_out_dir(out_dir);
  if (!out_dir.empty()) ovd::write_file_atomic(out_dir + "/analysis.json", text);
  std::cout << text;
  return kExitOk;
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::optional<std::uint64_t>& seed, bool is_sweep) {
  ovd::ExperimentConfig cfg =
      ovd::experiment_config_from_json(ovd::read_json_file(config_path));
  if (seed) cfg.seed = *seed;
  ensure_out_dir(out_dir);

  Json out;
  out["config"] = ovd::experiment_config_to_json(cfg);
  std::string csv;
  if (is_sweep) {
    const ovd::SweepResult res = ovd::sweep(cfg);
    out["report"] = ovd::report_to_json(res.report);
    out["verdicts"] = ovd::verdicts_to_json(res.verdicts);
    csv = ovd::report_to_csv(res.report);
  } else {
    const ovd::ExperimentReport rep = ovd::run_experiment(cfg);
    out["report"] = ovd::report_to_json(rep);
    csv = ovd::report_to_csv(rep);
  }
  const std::string text = out.dump(2) + "\n";
  if (!out_dir.empty()) {
    const std::string base = is_sweep ? "sweep" : "report";
    ovd::write_file_atomic(out_dir + "/" + base + ".json", text);
    ovd::write_file_atomic(out_dir + "/" + base + ".csv", csv);
    std::cout << (is_sweep ? "sweep" : "simulate") << ": wrote " << out_dir << "/" << base
              << ".json and ." << "csv\n";
  } else {
    std::cout << text;
  }
  return kExitOk;
}

int run_oracle_check(const std::string& config_path, const std::string& out_dir,
                     const std::optional<std::uint64_t>& seed, bool with_scores) {
  const ovd::OracleCheckConfig cfg =
      ovd::oracle_check_config_from_json(ovd::read_json_file(config_path));
  const ovd::OverlapPrior prior(cfg.n, cfg.ell);
  (void)prior;
  const bool noiseless = cfg.channel.is_identity();
  ovd::PairStats stats;
  if (!noiseless) stats = ovd::pair_statistics(cfg.model, cfg.channel);
  const std::uint64_t master = seed.value_or(0);
  ensure_out_dir(out_dir);

  const bool use_fixtures = !cfg.fixtures.empty();
  const std::uint64_t count =
      use_fixtures ? cfg.fixtures.size() : cfg.instances;
  Json decisions = Json::array();

  for (std::uint64_t i = 0; i < count; ++i) {
    ovd::ReadPair rp;
    if (use_fixtures) {
      rp = cfg.fixtures[static_cast<std::size_t>(i)];
    } else {
      ovd::Philox g(ovd::derive_key(master, i), 0);
      rp = ovd::sample_pair(cfg.model, cfg.channel, cfg.n, cfg.ell, g);
    }
    const ovd::Decision d =
        noiseless ? ovd::detect_noiseless(rp.read1, rp.read2, cfg.model, cfg.n)
                  : ovd::detect_noisy(rp.read1, rp.read2, stats, cfg.n);
    const ovd::PosteriorTable post =
        ovd::exact_posterior(rp.read1, rp.read2, cfg.model, cfg.channel, cfg.n);
    const bool match = post.map_t() == d.t_hat;

    Json record;
    record["pair"] = ovd::read_pair_to_json(rp);
    record["t_hat"] = d.t_hat;
    record["posterior_map"] = post.map_t();
    record["match"] = match;
    if (with_scores) {
      Json sc = Json::array();
      for (int t = -(d.ell - 1); t <= d.ell; ++t) {
        Json e;
        e["t"] = t;
        e["score"] = ovd::json_real(t == 0 ? d.threshold_log : d.score(t));
        sc.push_back(std::move(e));
      }
      record["scores"] = std::move(sc);
    }
    decisions.push_back(std::move(record));

    if (!match) {
      std::cerr << "oracle mismatch on instance " << i << ": detector " << d.t_hat
                << ", posterior " << post.map_t() << "\nfixture: "
                << ovd::read_pair_to_json(rp).dump() << "\n";
      if (!out_dir.empty())
        ovd::write_file_atomic(out_dir + "/decisions.json", decisions.dump(2) + "\n");
      return kExitMismatch;
    }
  }
  if (!out_dir.empty())
    ovd::write_file_atomic(out_dir + "/decisions.json", decisions.dump(2) + "\n");
  std::cout << "oracle-check: " << count << " instances, all detector decisions match the "
            << "exhaustive posterior\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal overlap detection of shotgun reads: analytics, simulation, oracles"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_value = 0;
  bool with_scores = false;

  CLI::App* analyze = app.add_subcommand("analyze", "Report source/channel analytics");
  CLI::App* simulate = app.add_subcommand("simulate", "Run the stratified experiment grid");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run an n-sweep with trend verdicts");
  CLI::App* oracle = app.add_subcommand("oracle-check",
                                        "Compare detectors against the exhaustive posterior");
  for (CLI::App* sub : {analyze, simulate, sweep_cmd, oracle}) {
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed_value, "Master seed override");
  }
  oracle->add_flag("--scores", with_scores, "Include full score vectors in decisions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::optional<std::uint64_t> seed;
  for (CLI::App* sub : {analyze, simulate, sweep_cmd, oracle}) {
    if (sub->parsed() && sub->count("--seed") > 0) seed = seed_value;
  }

  try {
    if (analyze->parsed()) return run_analyze(config_path, out_dir);
    if (simulate->parsed()) return run_simulate(config_path, out_dir, seed, false);
    if (sweep_cmd->parsed()) return run_simulate(config_path, out_dir, seed, true);
    if (oracle->parsed()) return run_oracle_check(config_path, out_dir, seed, with_scores);
  } catch (const ovd::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ovd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
