#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embz/embezzlement.hpp"
#include "embz/models.hpp"
#include "embz/oracle.hpp"

namespace embz::cli {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"vdh-table", "kappa-convergence", "xx-chain", "oracle-certify",
                                              "witness"};
  return names;
}

struct OracleInstances {
  std::size_t pure = 200;
  std::size_t mixed = 200;
  std::size_t implication = 100;
};

/// Validated experiment configuration with all defaults filled in.
struct ExperimentConfig {
  std::string experiment;
  std::optional<EmbezzlerFamily> family;  // size parameter comes from size_list
  std::vector<unsigned> d_list;
  std::vector<std::uint64_t> size_list;
  std::vector<std::size_t> k_schedule;
  double tail_cap = 1e-4;
  std::uint64_t seed = oracle::kDefaultSeed;
  std::optional<std::string> output_path;
  SearchConfig search;
  OracleInstances instances;
  double tol = 1e-6;
};

/// Strict parse: unknown keys, wrong types and out-of-range values raise
/// ConfigError. `experiment` overrides (and must agree with) the "experiment" key.
ExperimentConfig parse_config(const nlohmann::json& j, const std::optional<std::string>& experiment = std::nullopt);

/// Normalized config (defaults filled, output_path dropped). Object keys are
/// sorted, so the dump is independent of input key order.
nlohmann::json canonical_json(const ExperimentConfig& config);

/// Hex SHA-256 of the canonical config dump and the artifact version.
std::string config_hash(const ExperimentConfig& config);

std::string sha256_hex(const std::string& data);

struct ResultRow {
  std::uint64_t size = 0;
  unsigned d = 0;
  Interval value;
  std::optional<double> bound;
  std::vector<double> argmax_phi;
  std::vector<double> argmax_psi;
  std::size_t truncation_K = 0;
  std::uint64_t search_evals = 0;
  double runtime_ms = 0.0;
  bool nonmonotone = false;
};

struct ResultRecord {
  std::string experiment;
  std::string config_hash;
  std::string version = kVersion;
  nlohmann::json config;
  std::vector<ResultRow> rows;  // sorted by (size, d)
  std::vector<oracle::OracleReport> reports;
  std::optional<double> reference;  // 2(1 − √λ)/(1 + √λ) for constant-λ kappa runs
  bool cache_hit = false;

  [[nodiscard]] bool passed() const;
};

void to_json(nlohmann::json& j, const ResultRecord& r);
void from_json(const nlohmann::json& j, ResultRecord& r);

/// Runs the experiment pipeline without touching the filesystem.
ResultRecord compute(const ExperimentConfig& config, unsigned threads = 0);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> cache_dir;  // default: $EMBZ_CACHE_DIR, else <out>/.embz-cache
  bool force = false;
  unsigned threads = 0;
};

/// Locks the output directory, consults the cache, computes on a miss, and
/// writes results.csv and results.meta.json.
ResultRecord run(const ExperimentConfig& config, const RunOptions& options);

/// Fixed-format number: 17 significant digits, '.' decimal point.
std::string format_double(double x);

std::string results_csv(const ResultRecord& record);
void write_results(const ResultRecord& record, const std::filesystem::path& out_dir);

/// Writes plot/*.csv curves. Throws ConfigError on an empty record.
void emit_plotdata(const ResultRecord& record, const std::filesystem::path& out_dir);

/// Process exit code for an exception escaping the pipeline.
int exit_code_for(const std::exception& e);

}  // namespace embz::cli
