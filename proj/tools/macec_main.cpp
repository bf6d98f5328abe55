#include "macec/experiment.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json errors_to_json(const std::vector<macec::ConfigError>& errors) {
    json list = json::array();
    for (const auto& e : errors) {
        list.push_back({{"field", e.field}, {"message", e.message}});
    }
    return {{"error", {{"kind", "invalid-config"}, {"violations", list}}}};
}

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string units = "nats";
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config,-c", flags.config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--out", flags.out_dir, "output directory")
        ->envname("MACEC_OUT_DIR");
    cmd->add_option("--units", flags.units, "rate units in CSV output")
        ->check(CLI::IsMember({"nats", "bits"}));
}

/// Applies --seed / --out on top of the raw config text, leaving the
/// text untouched when it does not parse (validate() then reports the
/// syntax error itself).
std::string apply_overrides(const std::string& text, const CommonFlags& flags) {
    if (!flags.seed.has_value() && flags.out_dir.empty()) return text;
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded() || !root.is_object()) return text;
    if (flags.seed.has_value()) root["seed"] = *flags.seed;
    if (!flags.out_dir.empty()) root["output_dir"] = flags.out_dir;
    return root.dump();
}

int run_experiment(const CommonFlags& flags, macec::ExperimentKind kind) {
    const std::string text = apply_overrides(read_file(flags.config_path), flags);
    const macec::ValidationResult vr = macec::validate(text, kind);
    if (!vr.ok()) {
        std::cout << errors_to_json(vr.errors).dump(2) << "\n";
        return 1;
    }
    const macec::RateUnits units =
        flags.units == "bits" ? macec::RateUnits::Bits : macec::RateUnits::Nats;
    const macec::ExperimentReport report = macec::run(*vr.config, kind, units);
    json summary = {{"experiment", macec::to_string(kind)},
                    {"output_files", report.output_files},
                    {"wall_ms", report.wall_ms}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_validate(const CommonFlags& flags) {
    const std::string text = apply_overrides(read_file(flags.config_path), flags);
    const macec::ValidationResult vr = macec::validate(text);
    if (!vr.ok()) {
        std::cout << errors_to_json(vr.errors).dump(2) << "\n";
        return 1;
    }
    std::cout << vr.config->to_json().dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian MAC capacity regions with energy cooperation and "
                 "energy-harvesting save-and-transmit simulation"};
    app.require_subcommand(1);

    CommonFlags flags;
    CLI::App* region =
        app.add_subcommand("region", "trace analytic and simulated region boundaries");
    CLI::App* converge =
        app.add_subcommand("converge", "sum-rate convergence sweep over N");
    CLI::App* shortage =
        app.add_subcommand("shortage", "energy-shortage probability sweep over N");
    CLI::App* validate = app.add_subcommand("validate", "check a config and print it resolved");
    for (CLI::App* cmd : {region, converge, shortage, validate}) {
        add_common(cmd, flags);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (region->parsed()) return run_experiment(flags, macec::ExperimentKind::Region);
        if (converge->parsed()) {
            return run_experiment(flags, macec::ExperimentKind::Convergence);
        }
        if (shortage->parsed()) {
            return run_experiment(flags, macec::ExperimentKind::Shortage);
        }
        return run_validate(flags);
    } catch (const std::exception& e) {
        std::cout << nlohmann::json{{"error", {{"kind", "runtime"}, {"message", e.what()}}}}
                         .dump(2)
                  << "\n";
        return 1;
    }
}
