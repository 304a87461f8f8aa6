// JSON configuration parsing (strict: unknown keys rejected, errors carry
// line numbers or JSON paths), report serialization, CSV emission, and
// atomic file writes.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ovd/channel.hpp"
#include "ovd/common.hpp"
#include "ovd/montecarlo.hpp"
#include "ovd/sampler.hpp"
#include "ovd/source_model.hpp"

namespace ovd {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal form of a double ("inf" / "-inf" at infinity).
std::string format_double(double v);

// Finite values stay numbers; infinities become the strings "inf" / "-inf"
// (JSON has no infinity literal).
Json json_real(double v);

// Parse text as JSON; parse failures raise InvalidArgument with a 1-based
// line number.
Json parse_json_text(const std::string& text);

std::string read_text_file(const std::string& path);   // IoError on failure
Json read_json_file(const std::string& path);

// Write via a temporary file in the same directory plus rename, so readers
// never observe a partial file.  IoError on failure.
void write_file_atomic(const std::string& path, const std::string& content);

SourceModel model_from_json(const Json& j, const std::string& where);
Json model_to_json(const SourceModel& model);

// `source_alphabet` sizes the "identity" shorthand.
Channel channel_from_json(const Json& j, std::size_t source_alphabet, const std::string& where);
Json channel_to_json(const Channel& channel);

ReadPair read_pair_from_json(const Json& j, const std::string& where);
Json read_pair_to_json(const ReadPair& pair);

ExperimentConfig experiment_config_from_json(const Json& j);
Json experiment_config_to_json(const ExperimentConfig& config);

Json stratum_to_json(const StratumEstimate& s);
Json record_to_json(const ExperimentRecord& r);
Json report_to_json(const ExperimentReport& r);
Json verdicts_to_json(const SweepVerdicts& v);

// Columns: n, ell, stratum_t, trials, errors, estimate, ci_lo, ci_hi,
// phi_hat, theory_phi.  One row per stratum, the t = 0 stratum first.
std::string report_to_csv(const ExperimentReport& r);

// Inputs of the `analyze` subcommand.
struct AnalyzeConfig {
  SourceModel model;
  Channel channel;
  std::int64_t n = 1048576;
  double beta = 1.0;
  std::optional<int> ell;  // overrides ceil(beta * log_|X| n)
  std::optional<double> mu;
  double theta_eps = 1e-4;
  std::vector<double> renyi_alphas = {0.5, 2.0};
  std::vector<std::uint64_t> mixing_s = {1, 10, 50};
  std::vector<std::uint64_t> recurrence_s = {1, 2, 3};

  AnalyzeConfig(SourceModel m, Channel c);
};

AnalyzeConfig analyze_config_from_json(const Json& j);

// Inputs of the `oracle-check` subcommand.  With explicit fixtures the
// random-instance generation is skipped.
struct OracleCheckConfig {
  SourceModel model;
  Channel channel;
  std::int64_t n = 16;
  int ell = 4;
  std::uint64_t instances = 10000;
  std::vector<ReadPair> fixtures;

  OracleCheckConfig(SourceModel m, Channel c);
};

OracleCheckConfig oracle_check_config_from_json(const Json& j);

}  // namespace ovd
