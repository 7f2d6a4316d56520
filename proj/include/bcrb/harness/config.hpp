#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcrb/estimators.hpp"
#include "bcrb/train.hpp"

namespace bcrb::harness {

// Invalid configuration; the CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { mixture_denoise, phase_offset };

struct ProblemConfig {
  ProblemKind kind = ProblemKind::mixture_denoise;
  std::string preset = "paper-mixture-denoise";
  int dim = 10;
  std::uint64_t mixture_seed = kDefaultMixtureSeed;
  double snr_db = 30.0;  // denoising experiments
  double tau_w = 0.2;    // phase prior increment std
  double tau_n2 = 0.2;   // phase noise variance
  long m_likelihood = 10;
};

struct ExperimentSettings {
  std::vector<long> n_values;
  std::vector<double> snr_values_db;
  std::vector<double> tau_n2_values;
  std::vector<std::uint64_t> seeds;
  long oracle_n = 1000000;
  long oracle_phase_n = 200000;  // sample budget for the phase reference J_D
  long n_fixed = 10000;
  long rmse_pairs = 2000;
  bool save_checkpoints = false;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 20240501;
  std::string scale = "desk";  // "desk" or "paper"
  std::string output_dir = "out";
  int threads = 1;
  bool timing = false;  // fill wall_time_s (breaks byte determinism of reruns)
  ProblemConfig problem;
  std::string train_preset = "desk";
  nlohmann::json train_overrides;  // raw JSON fields, applied after the preset
  ExperimentSettings experiment;
};

// Parses + validates a config document, applying scale-dependent defaults.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);

// Canonical resolved-config JSON and its hash (stable across reruns).
nlohmann::json resolved_config_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

// Concrete problem objects from the problem block. For denoising, tau comes
// from the given SNR via the prior's analytic E||x||^2.
Problem build_problem(const ProblemConfig& pc);
Problem build_denoise_problem(const ProblemConfig& pc, double snr_db);
Problem build_phase_problem(const ProblemConfig& pc, double tau_n2);

struct TrainSettings {
  ArchSpec arch;
  TrainConfig config;
};

// Preset resolution ("paper" uses the published per-N hyperparameters; "desk"
// is the small-width fast profile), then field-level overrides.
TrainSettings resolve_train(const std::string& preset, const nlohmann::json& overrides,
                            ProblemKind kind, long n, std::uint64_t run_seed);

}  // namespace bcrb::harness
