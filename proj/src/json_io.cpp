// Strict JSON parsing, canonical serialization, CSV output, atomic writes.
#include "ovd/json_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace ovd {
namespace {

void check_keys(const Json& j, const std::string& where,
                std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw InvalidArgument(where + ": expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known) throw InvalidArgument(where + ": unknown key '" + item.key() + "'");
  }
}

const Json& require(const Json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw InvalidArgument(where + ": missing key '" + key + "'");
  return *it;
}

double get_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw InvalidArgument(where + ": expected a number");
  return j.get<double>();
}

std::int64_t get_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw InvalidArgument(where + ": expected an integer");
  return j.get<std::int64_t>();
}

std::uint64_t get_uint(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw InvalidArgument(where + ": expected a nonnegative integer");
  if (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)
    throw InvalidArgument(where + ": expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

bool get_bool(const Json& j, const std::string& where) {
  if (!j.is_boolean()) throw InvalidArgument(where + ": expected a boolean");
  return j.get<bool>();
}

std::string get_string(const Json& j, const std::string& where) {
  if (!j.is_string()) throw InvalidArgument(where + ": expected a string");
  return j.get<std::string>();
}

std::vector<double> get_number_vector(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidArgument(where + ": expected an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v.push_back(get_number(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

std::vector<std::vector<double>> get_matrix(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidArgument(where + ": expected an array of rows");
  std::vector<std::vector<double>> rows;
  rows.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    rows.push_back(get_number_vector(j[i], where + "[" + std::to_string(i) + "]"));
  return rows;
}

Seq get_seq(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidArgument(where + ": expected an array of symbols");
  Seq s;
  s.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::int64_t v = get_int(j[i], where + "[" + std::to_string(i) + "]");
    if (v < 0 || v > 255)
      throw InvalidArgument(where + "[" + std::to_string(i) + "]: symbol out of range");
    s.push_back(static_cast<Symbol>(v));
  }
  return s;
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

Json json_real(double v) {
  if (std::isinf(v)) return Json(v > 0 ? "inf" : "-inf");
  return Json(v);
}

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t byte = e.byte > 0 ? static_cast<std::size_t>(e.byte) - 1 : 0;
    byte = std::min(byte, text.size());
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte; ++i)
      if (text[i] == '\n') ++line;
    throw InvalidArgument("JSON parse error at line " + std::to_string(line) + ": " + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  return ss.str();
}

Json read_json_file(const std::string& path) { return parse_json_text(read_text_file(path)); }

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw IoError("write failure on '" + tmp + "'");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

SourceModel model_from_json(const Json& j, const std::string& where) {
  check_keys(j, where, {"type", "probs", "rows"});
  const std::string type = get_string(require(j, "type", where), where + "/type");
  if (type == "memoryless") {
    if (j.contains("rows")) throw InvalidArgument(where + ": 'rows' is not a memoryless key");
    return SourceModel::memoryless(
        Pmf(get_number_vector(require(j, "probs", where), where + "/probs")));
  }
  if (type == "markov") {
    if (j.contains("probs")) throw InvalidArgument(where + ": 'probs' is not a markov key");
    return SourceModel::markov(
        MarkovKernel(get_matrix(require(j, "rows", where), where + "/rows")));
  }
  throw InvalidArgument(where + "/type: expected 'memoryless' or 'markov'");
}

Json model_to_json(const SourceModel& model) {
  Json j;
  if (model.is_memoryless()) {
    j["type"] = "memoryless";
    j["probs"] = model.pmf().probs();
  } else {
    j["type"] = "markov";
    const std::size_t k = model.alphabet_size();
    const Matrix& m = model.kernel().matrix();
    Json rows = Json::array();
    for (std::size_t a = 0; a < k; ++a) {
      Json row = Json::array();
      for (std::size_t b = 0; b < k; ++b) row.push_back(m[a * k + b]);
      rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
  }
  return j;
}

Channel channel_from_json(const Json& j, std::size_t source_alphabet, const std::string& where) {
  check_keys(j, where, {"type", "flip_prob", "rows"});
  const std::string type = get_string(require(j, "type", where), where + "/type");
  if (type == "identity") {
    if (j.size() != 1) throw InvalidArgument(where + ": identity takes no further keys");
    return Channel::identity(source_alphabet);
  }
  if (type == "bsc") {
    if (source_alphabet != 2)
      throw InvalidArgument(where + ": bsc requires a binary source");
    return Channel::binary_symmetric(
        get_number(require(j, "flip_prob", where), where + "/flip_prob"));
  }
  if (type == "rows")
    return Channel(get_matrix(require(j, "rows", where), where + "/rows"));
  throw InvalidArgument(where + "/type: expected 'identity', 'bsc', or 'rows'");
}

Json channel_to_json(const Channel& channel) {
  Json j;
  j["type"] = "rows";
  Json rows = Json::array();
  for (std::size_t x = 0; x < channel.in_size(); ++x) {
    Json row = Json::array();
    for (std::size_t y = 0; y < channel.out_size(); ++y)
      row.push_back(channel.prob(static_cast<Symbol>(x), static_cast<Symbol>(y)));
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

ReadPair read_pair_from_json(const Json& j, const std::string& where) {
  check_keys(j, where, {"read1", "read2", "i1", "i2", "t"});
  ReadPair rp;
  rp.read1 = get_seq(require(j, "read1", where), where + "/read1");
  rp.read2 = get_seq(require(j, "read2", where), where + "/read2");
  rp.i1 = get_int(require(j, "i1", where), where + "/i1");
  rp.i2 = get_int(require(j, "i2", where), where + "/i2");
  rp.t = static_cast<int>(get_int(require(j, "t", where), where + "/t"));
  return rp;
}

Json read_pair_to_json(const ReadPair& pair) {
  Json j;
  j["read1"] = Json::array();
  for (Symbol s : pair.read1) j["read1"].push_back(static_cast<int>(s));
  j["read2"] = Json::array();
  for (Symbol s : pair.read2) j["read2"].push_back(static_cast<int>(s));
  j["i1"] = pair.i1;
  j["i2"] = pair.i2;
  j["t"] = pair.t;
  return j;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  check_keys(j, "/", {"model", "channel", "beta", "n_grid", "trials_per_stratum", "trials_t0",
                      "mu", "truncation_cutoff", "one_sided", "seed", "threads"});
  SourceModel model = model_from_json(require(j, "model", "/"), "/model");
  Channel channel =
      channel_from_json(require(j, "channel", "/"), model.alphabet_size(), "/channel");
  ExperimentConfig cfg(std::move(model), std::move(channel));
  cfg.beta = get_number(require(j, "beta", "/"), "/beta");
  const Json& grid = require(j, "n_grid", "/");
  if (!grid.is_array() || grid.empty())
    throw InvalidArgument("/n_grid: expected a nonempty array of integers");
  for (std::size_t i = 0; i < grid.size(); ++i)
    cfg.n_grid.push_back(get_int(grid[i], "/n_grid[" + std::to_string(i) + "]"));
  if (j.contains("trials_per_stratum"))
    cfg.trials_per_stratum = get_uint(j["trials_per_stratum"], "/trials_per_stratum");
  if (j.contains("trials_t0")) cfg.trials_t0 = get_uint(j["trials_t0"], "/trials_t0");
  if (j.contains("mu")) cfg.detector.mu = get_number(j["mu"], "/mu");
  if (j.contains("truncation_cutoff"))
    cfg.detector.truncation_cutoff =
        static_cast<int>(get_int(j["truncation_cutoff"], "/truncation_cutoff"));
  if (j.contains("one_sided")) cfg.one_sided = get_bool(j["one_sided"], "/one_sided");
  if (j.contains("seed")) cfg.seed = get_uint(j["seed"], "/seed");
  if (j.contains("threads")) cfg.threads = static_cast<int>(get_int(j["threads"], "/threads"));
  cfg.validate();
  return cfg;
}

Json experiment_config_to_json(const ExperimentConfig& config) {
  Json j;
  j["model"] = model_to_json(config.model);
  j["channel"] = channel_to_json(config.channel);
  j["beta"] = config.beta;
  j["n_grid"] = config.n_grid;
  j["trials_per_stratum"] = config.trials_per_stratum;
  j["trials_t0"] = config.trials_t0;
  if (config.detector.mu) j["mu"] = *config.detector.mu;
  if (config.detector.truncation_cutoff)
    j["truncation_cutoff"] = *config.detector.truncation_cutoff;
  j["one_sided"] = config.one_sided;
  j["seed"] = config.seed;
  j["threads"] = config.threads;
  return j;
}

Json stratum_to_json(const StratumEstimate& s) {
  Json j;
  j["t"] = s.t;
  j["trials"] = s.trials;
  j["errors"] = s.errors;
  j["estimate"] = s.estimate;
  j["ci_lo"] = s.ci_lo;
  j["ci_hi"] = s.ci_hi;
  return j;
}

Json record_to_json(const ExperimentRecord& r) {
  Json j;
  j["n"] = r.n;
  j["ell"] = r.ell;
  j["p1"] = stratum_to_json(r.p1);
  Json p2 = Json::array();
  for (const StratumEstimate& s : r.p2) p2.push_back(stratum_to_json(s));
  j["p2"] = std::move(p2);
  j["p_error_hat"] = r.p_error_hat;
  j["phi_hat"] = r.phi_hat;
  j["phi_hat_nats"] = r.phi_hat_nats;
  j["theory_phi"] = r.theory_phi;
  j["t_star"] = json_real(r.t_star);
  j["t_mdo"] = json_real(r.t_mdo);
  return j;
}

Json report_to_json(const ExperimentReport& r) {
  Json j;
  Json records = Json::array();
  for (const ExperimentRecord& rec : r.records) records.push_back(record_to_json(rec));
  j["records"] = std::move(records);
  return j;
}

Json verdicts_to_json(const SweepVerdicts& v) {
  Json j;
  j["phi_trend"]["values"] = v.phi_values;
  j["phi_trend"]["decreasing_toward_theory"] = v.phi_decreasing;
  j["type1_scaling"]["values"] = v.type1_scaled;
  j["type1_scaling"]["bounded"] = v.type1_bounded;
  j["profile"]["ok"] = v.profile_ok;
  return j;
}

std::string report_to_csv(const ExperimentReport& r) {
  std::string out = "n,ell,stratum_t,trials,errors,estimate,ci_lo,ci_hi,phi_hat,theory_phi\n";
  auto row = [&out](std::int64_t n, int ell, const StratumEstimate& s, double phi_hat,
                    double theory) {
    out += std::to_string(n);
    out += ',';
    out += std::to_string(ell);
    out += ',';
    out += std::to_string(s.t);
    out += ',';
    out += std::to_string(s.trials);
    out += ',';
    out += std::to_string(s.errors);
    out += ',';
    out += format_double(s.estimate);
    out += ',';
    out += format_double(s.ci_lo);
    out += ',';
    out += format_double(s.ci_hi);
    out += ',';
    out += format_double(phi_hat);
    out += ',';
    out += format_double(theory);
    out += '\n';
  };
  for (const ExperimentRecord& rec : r.records) {
    row(rec.n, rec.ell, rec.p1, rec.phi_hat, rec.theory_phi);
    for (const StratumEstimate& s : rec.p2) row(rec.n, rec.ell, s, rec.phi_hat, rec.theory_phi);
  }
  return out;
}

AnalyzeConfig::AnalyzeConfig(SourceModel m, Channel c)
    : model(std::move(m)), channel(std::move(c)) {}

AnalyzeConfig analyze_config_from_json(const Json& j) {
  check_keys(j, "/", {"model", "channel", "n", "beta", "ell", "mu", "theta_eps",
                      "renyi_alphas", "mixing_s", "recurrence_s"});
  SourceModel model = model_from_json(require(j, "model", "/"), "/model");
  Channel channel =
      channel_from_json(require(j, "channel", "/"), model.alphabet_size(), "/channel");
  AnalyzeConfig cfg(std::move(model), std::move(channel));
  if (j.contains("n")) cfg.n = get_int(j["n"], "/n");
  if (j.contains("beta")) cfg.beta = get_number(j["beta"], "/beta");
  if (j.contains("ell")) cfg.ell = static_cast<int>(get_int(j["ell"], "/ell"));
  if (j.contains("mu")) cfg.mu = get_number(j["mu"], "/mu");
  if (j.contains("theta_eps")) cfg.theta_eps = get_number(j["theta_eps"], "/theta_eps");
  if (j.contains("renyi_alphas"))
    cfg.renyi_alphas = get_number_vector(j["renyi_alphas"], "/renyi_alphas");
  if (j.contains("mixing_s")) {
    cfg.mixing_s.clear();
    const Json& arr = j["mixing_s"];
    if (!arr.is_array()) throw InvalidArgument("/mixing_s: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      cfg.mixing_s.push_back(get_uint(arr[i], "/mixing_s[" + std::to_string(i) + "]"));
  }
  if (j.contains("recurrence_s")) {
    cfg.recurrence_s.clear();
    const Json& arr = j["recurrence_s"];
    if (!arr.is_array()) throw InvalidArgument("/recurrence_s: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      cfg.recurrence_s.push_back(get_uint(arr[i], "/recurrence_s[" + std::to_string(i) + "]"));
  }
  if (cfg.n < 4) throw InvalidArgument("/n: must be at least 4");
  if (!std::isfinite(cfg.beta) || cfg.beta <= 0.0)
    throw InvalidArgument("/beta: must be positive");
  return cfg;
}

OracleCheckConfig::OracleCheckConfig(SourceModel m, Channel c)
    : model(std::move(m)), channel(std::move(c)) {}

OracleCheckConfig oracle_check_config_from_json(const Json& j) {
  check_keys(j, "/", {"model", "channel", "n", "ell", "instances", "fixtures"});
  SourceModel model = model_from_json(require(j, "model", "/"), "/model");
  Channel channel =
      channel_from_json(require(j, "channel", "/"), model.alphabet_size(), "/channel");
  OracleCheckConfig cfg(std::move(model), std::move(channel));
  if (j.contains("n")) cfg.n = get_int(j["n"], "/n");
  if (j.contains("ell")) cfg.ell = static_cast<int>(get_int(j["ell"], "/ell"));
  if (j.contains("instances")) cfg.instances = get_uint(j["instances"], "/instances");
  if (j.contains("fixtures")) {
    const Json& arr = j["fixtures"];
    if (!arr.is_array()) throw InvalidArgument("/fixtures: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      cfg.fixtures.push_back(
          read_pair_from_json(arr[i], "/fixtures[" + std::to_string(i) + "]"));
  }
  if (cfg.instances == 0 && cfg.fixtures.empty())
    throw InvalidArgument("/instances: must be positive");
  return cfg;
}

}  // namespace ovd
