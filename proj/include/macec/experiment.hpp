#ifndef MACEC_EXPERIMENT_HPP
#define MACEC_EXPERIMENT_HPP

#include "macec/channel_model.hpp"
#include "macec/eh_simulator.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace macec {

inline constexpr const char* kVersion = "macec 0.1.0";

enum class ExperimentKind { Region, Convergence, Shortage };

enum class RateUnits { Nats, Bits };

std::string to_string(ExperimentKind kind);

/// Raw-unit harvest distribution as written in a config file.
struct HarvestSpec {
    std::string kind;  ///< "uniform" | "constant" | "bernoulli"
    double a = 0.0;    ///< uniform lo / constant value / bernoulli probability
    double b = 0.0;    ///< uniform hi / bernoulli amount

    HarvestProcess to_process() const;
};

/// Fully resolved experiment description; defaults are filled in by
/// validate() so a resolved config serializes without loss.
struct ExperimentConfig {
    std::optional<ExperimentKind> kind;
    RawMacParams instance;
    std::vector<HarvestSpec> harvest;
    int num_directions = 64;
    std::vector<std::int64_t> n_list;
    std::int64_t region_sim_n = 1000000;
    std::int64_t trials = 10;
    std::uint64_t seed = 0;
    EpsilonMode epsilon_mode = EpsilonMode::Vanishing;
    double fixed_epsilon_fraction = 0.05;
    double vanishing_scale = 14.0;
    std::string output_dir = "out";

    nlohmann::json to_json() const;
};

struct ConfigError {
    std::string field;
    std::string message;
};

struct ValidationResult {
    std::optional<ExperimentConfig> config;  ///< set iff errors is empty
    std::vector<ConfigError> errors;         ///< every violated constraint

    bool ok() const { return errors.empty(); }
};

/// Parses and checks a JSON config. Reports every violated constraint,
/// not just the first; a syntax error is reported with line and column.
/// When `expected_kind` is set (the CLI subcommand), kind-dependent
/// constraints are checked against it and a conflicting `kind` field is
/// an error.
ValidationResult validate(const std::string& config_text,
                          std::optional<ExperimentKind> expected_kind = {});

struct ExperimentReport {
    nlohmann::json resolved_config;
    nlohmann::json normalized_instance;
    std::vector<std::string> output_files;  ///< absolute paths written
    nlohmann::json tables;                  ///< per-table provenance
    double wall_ms = 0.0;
    std::string version;
    std::string units;

    nlohmann::json to_json() const;
};

/// Runs one experiment and writes its CSV plus report.json under the
/// config's output directory. All content is computed before anything
/// is written, and files land via write-then-rename, so a failed run
/// leaves no partial outputs. Identical config + seed produces
/// byte-identical CSVs.
ExperimentReport run(const ExperimentConfig& config, ExperimentKind kind,
                     RateUnits units = RateUnits::Nats);

}  // namespace macec

#endif
