#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "singlab/error.hpp"
#include "singlab/path_io.hpp"

namespace singlab::cli {

enum class Experiment { Integrate, Minimize, Sundman, Averaging, Assumptions, Reduce };

/// Subcommand spelling ("simulate", "sundman-fit", ...).
std::string_view subcommand_name(Experiment kind);
/// Name of the config section holding the experiment settings ("integrate", "sundman", ...).
std::string_view section_name(Experiment kind);
std::optional<Experiment> experiment_from_subcommand(std::string_view name);

struct ExperimentConfig {
  Experiment kind = Experiment::Integrate;
  int version = 1;
  nlohmann::json potential;   ///< null when the experiment does not need one
  nlohmann::json settings;    ///< the experiment section, validated
  std::uint64_t seed = 1;
  std::filesystem::path base_dir;  ///< relative file names resolve here
};

/// Validates the document against the experiment's schema. Unknown keys, a
/// missing or unsupported version and wrongly typed values raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc, Experiment kind, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& file, Experiment kind);

struct Artifacts {
  nlohmann::json summary;
  nlohmann::json events;   ///< written as events.json unless null
  std::vector<std::pair<std::string, Series>> series;  ///< series/<name>.csv
  int exit_code = 0;
};

using Logger = std::function<void(const std::string&)>;

Artifacts run_experiment(const ExperimentConfig& config, const Logger& log = {});

/// Writes into a sibling staging directory and renames it to `out`, so a
/// failure leaves nothing behind. `out` must not exist or be an empty directory.
void write_artifacts(const Artifacts& artifacts, const std::filesystem::path& out);

/// 1 for configuration and I/O errors, 2 for assumption violations, 3 for
/// numerical failures.
int exit_code_for(ErrorCode code);

/// Load, run and write; errors go to `err` and map to the exit code.
int run(Experiment kind, const std::filesystem::path& config, const std::filesystem::path& out,
        std::optional<std::uint64_t> seed, bool verbose, std::ostream& err);

}  // namespace singlab::cli
