#include "macec/experiment.hpp"

#include "macec/capacity_region.hpp"
#include "parallel.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

namespace macec {

using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string format_int(std::int64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    return buf;
}

struct LineCol {
    std::size_t line = 1;
    std::size_t col = 1;
};

LineCol locate(const std::string& text, std::size_t byte) {
    LineCol lc;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++lc.line;
            lc.col = 1;
        } else {
            ++lc.col;
        }
    }
    return lc;
}

class FieldReader {
  public:
    explicit FieldReader(std::vector<ConfigError>& errors) : errors_(errors) {}

    void error(const std::string& field, const std::string& message) {
        errors_.push_back({field, message});
    }

    bool require_object(const json& j, const std::string& field) {
        if (!j.is_object()) {
            error(field, "must be an object");
            return false;
        }
        return true;
    }

    std::optional<double> number(const json& j, const std::string& field) {
        if (!j.is_number()) {
            error(field, "must be a number");
            return std::nullopt;
        }
        return j.get<double>();
    }

    std::optional<std::int64_t> integer(const json& j, const std::string& field) {
        if (!j.is_number_integer()) {
            error(field, "must be an integer");
            return std::nullopt;
        }
        return j.get<std::int64_t>();
    }

  private:
    std::vector<ConfigError>& errors_;
};

std::optional<ExperimentKind> parse_kind(const std::string& s) {
    if (s == "region") return ExperimentKind::Region;
    if (s == "convergence") return ExperimentKind::Convergence;
    if (s == "shortage") return ExperimentKind::Shortage;
    return std::nullopt;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Region: return "region";
        case ExperimentKind::Convergence: return "convergence";
        case ExperimentKind::Shortage: return "shortage";
    }
    return "?";
}

HarvestProcess HarvestSpec::to_process() const {
    if (kind == "uniform") return HarvestProcess::uniform(a, b);
    if (kind == "constant") return HarvestProcess::constant(a);
    if (kind == "bernoulli") return HarvestProcess::bernoulli(a, b);
    throw InvalidParameter("HarvestSpec: unknown kind '" + kind + "'");
}

json ExperimentConfig::to_json() const {
    json j;
    if (kind.has_value()) j["kind"] = to_string(*kind);
    json inst;
    inst["h"] = std::vector<double>(instance.gains.begin(), instance.gains.end());
    inst["sigma2"] = instance.noise_var;
    inst["T"] = instance.slot_seconds;
    json alpha = json::array();
    for (int r = 0; r < instance.alpha_direct.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < instance.alpha_direct.cols(); ++c) {
            row.push_back(instance.alpha_direct(r, c));
        }
        alpha.push_back(row);
    }
    inst["alpha"] = alpha;
    inst["ebar"] =
        std::vector<double>(instance.harvest_rate.begin(), instance.harvest_rate.end());
    j["instance"] = inst;

    json harv = json::array();
    for (const HarvestSpec& spec : harvest) {
        json h;
        h["kind"] = spec.kind;
        if (spec.kind == "uniform") {
            h["a"] = spec.a;
            h["b"] = spec.b;
        } else if (spec.kind == "constant") {
            h["value"] = spec.a;
        } else {
            h["p"] = spec.a;
            h["amount"] = spec.b;
        }
        harv.push_back(h);
    }
    j["harvest"] = harv;
    j["num_directions"] = num_directions;
    j["N_list"] = n_list;
    j["region_sim_N"] = region_sim_n;
    j["trials"] = trials;
    j["seed"] = seed;
    j["epsilon_mode"] = epsilon_mode == EpsilonMode::Fixed ? "fixed" : "vanishing";
    j["fixed_epsilon_fraction"] = fixed_epsilon_fraction;
    j["vanishing_scale"] = vanishing_scale;
    j["output_dir"] = output_dir;
    return j;
}

ValidationResult validate(const std::string& config_text,
                          std::optional<ExperimentKind> expected_kind) {
    ValidationResult result;
    FieldReader reader(result.errors);

    json root;
    try {
        root = json::parse(config_text);
    } catch (const json::parse_error& e) {
        const LineCol lc = locate(config_text, e.byte > 0 ? e.byte - 1 : 0);
        reader.error("(syntax)", "parse error at line " + std::to_string(lc.line) +
                                     " column " + std::to_string(lc.col) + ": " +
                                     e.what());
        return result;
    }
    if (!root.is_object()) {
        reader.error("(root)", "config must be a JSON object");
        return result;
    }

    ExperimentConfig cfg;

    // kind
    std::optional<ExperimentKind> effective_kind = expected_kind;
    if (root.contains("kind")) {
        if (!root["kind"].is_string()) {
            reader.error("kind", "must be a string");
        } else {
            cfg.kind = parse_kind(root["kind"].get<std::string>());
            if (!cfg.kind.has_value()) {
                reader.error("kind", "must be one of region | convergence | shortage");
            } else if (expected_kind.has_value() && *cfg.kind != *expected_kind) {
                reader.error("kind", "config says '" + to_string(*cfg.kind) +
                                         "' but the requested experiment is '" +
                                         to_string(*expected_kind) + "'");
            } else {
                effective_kind = cfg.kind;
            }
        }
    }

    // instance
    int users = 0;
    if (!root.contains("instance")) {
        reader.error("instance", "is required");
    } else if (reader.require_object(root["instance"], "instance")) {
        const json& inst = root["instance"];
        if (!inst.contains("h") || !inst["h"].is_array() || inst["h"].empty()) {
            reader.error("instance.h", "must be a nonempty array of channel gains");
        } else {
            users = static_cast<int>(inst["h"].size());
            if (users > kMaxUsers) {
                reader.error("instance.h", "at most 16 users are supported");
                users = 0;
            }
        }
        if (users > 0) {
            cfg.instance.gains.resize(users);
            for (int i = 0; i < users; ++i) {
                const auto v = reader.number(inst["h"][i], "instance.h[" + std::to_string(i) + "]");
                cfg.instance.gains[i] = v.value_or(1.0);
                if (v.has_value() && !(*v > 0.0)) {
                    reader.error("instance.h[" + std::to_string(i) + "]",
                                 "channel gain must be > 0");
                }
            }
        }
        if (!inst.contains("sigma2")) {
            reader.error("instance.sigma2", "is required");
        } else if (const auto v = reader.number(inst["sigma2"], "instance.sigma2")) {
            cfg.instance.noise_var = *v;
            if (!(*v > 0.0)) reader.error("instance.sigma2", "noise variance must be > 0");
        }
        cfg.instance.slot_seconds = 1.0;
        if (inst.contains("T")) {
            if (const auto v = reader.number(inst["T"], "instance.T")) {
                cfg.instance.slot_seconds = *v;
                if (!(*v > 0.0)) reader.error("instance.T", "slot length must be > 0");
            }
        }
        if (users > 0) {
            cfg.instance.alpha_direct = Mat::Zero(users, users);
            if (!inst.contains("alpha") || !inst["alpha"].is_array() ||
                static_cast<int>(inst["alpha"].size()) != users) {
                reader.error("instance.alpha", "must be a K x K matrix");
            } else {
                for (int r = 0; r < users; ++r) {
                    const json& row = inst["alpha"][r];
                    if (!row.is_array() || static_cast<int>(row.size()) != users) {
                        reader.error("instance.alpha[" + std::to_string(r) + "]",
                                     "must have K entries");
                        continue;
                    }
                    for (int c = 0; c < users; ++c) {
                        const std::string field = "instance.alpha[" + std::to_string(r) +
                                                  "][" + std::to_string(c) + "]";
                        if (const auto v = reader.number(row[c], field)) {
                            cfg.instance.alpha_direct(r, c) = *v;
                            if (r == c && *v != 0.0) {
                                reader.error(field, "diagonal must be zero");
                            } else if (r != c && (*v < 0.0 || *v >= 1.0)) {
                                reader.error(field, "must lie in [0, 1)");
                            }
                        }
                    }
                }
            }
            cfg.instance.harvest_rate = Vec::Zero(users);
            if (!inst.contains("ebar") || !inst["ebar"].is_array() ||
                static_cast<int>(inst["ebar"].size()) != users) {
                reader.error("instance.ebar", "must be an array of K harvest rates");
            } else {
                for (int i = 0; i < users; ++i) {
                    const std::string field = "instance.ebar[" + std::to_string(i) + "]";
                    if (const auto v = reader.number(inst["ebar"][i], field)) {
                        cfg.instance.harvest_rate[i] = *v;
                        if (*v < 0.0) reader.error(field, "must be >= 0");
                    }
                }
            }
        }
    }

    // harvest (defaults to uniform(0, 2 * ebar_k), which has mean ebar_k)
    if (root.contains("harvest")) {
        if (!root["harvest"].is_array() ||
            (users > 0 && static_cast<int>(root["harvest"].size()) != users)) {
            reader.error("harvest", "must list one process per user");
        } else {
            for (std::size_t i = 0; i < root["harvest"].size(); ++i) {
                const std::string field = "harvest[" + std::to_string(i) + "]";
                const json& h = root["harvest"][i];
                HarvestSpec spec;
                if (!h.is_object() || !h.contains("kind") || !h["kind"].is_string()) {
                    reader.error(field, "must be an object with a 'kind' string");
                    cfg.harvest.push_back(spec);
                    continue;
                }
                spec.kind = h["kind"].get<std::string>();
                if (spec.kind == "uniform") {
                    if (h.contains("a")) spec.a = reader.number(h["a"], field + ".a").value_or(0.0);
                    if (h.contains("b")) spec.b = reader.number(h["b"], field + ".b").value_or(0.0);
                    if (spec.a < 0.0 || spec.b < spec.a) {
                        reader.error(field, "uniform needs 0 <= a <= b");
                    }
                } else if (spec.kind == "constant") {
                    spec.a = h.contains("value")
                                 ? reader.number(h["value"], field + ".value").value_or(0.0)
                                 : 0.0;
                    spec.b = spec.a;
                    if (spec.a < 0.0) reader.error(field, "constant value must be >= 0");
                } else if (spec.kind == "bernoulli") {
                    if (h.contains("p")) spec.a = reader.number(h["p"], field + ".p").value_or(0.0);
                    if (h.contains("amount")) {
                        spec.b = reader.number(h["amount"], field + ".amount").value_or(0.0);
                    }
                    if (spec.a < 0.0 || spec.a > 1.0 || spec.b < 0.0) {
                        reader.error(field, "bernoulli needs p in [0, 1] and amount >= 0");
                    }
                } else {
                    reader.error(field + ".kind",
                                 "must be one of uniform | constant | bernoulli");
                }
                cfg.harvest.push_back(spec);
            }
        }
    } else if (users > 0) {
        for (int i = 0; i < users; ++i) {
            HarvestSpec spec;
            spec.kind = "uniform";
            spec.a = 0.0;
            spec.b = 2.0 * cfg.instance.harvest_rate[i];
            cfg.harvest.push_back(spec);
        }
    }
    // Harvest means must reproduce the configured recharge rates; the
    // capacity region is determined by them.
    if (users > 0 && static_cast<int>(cfg.harvest.size()) == users) {
        for (int i = 0; i < users; ++i) {
            const HarvestSpec& spec = cfg.harvest[i];
            double mean = 0.0;
            if (spec.kind == "uniform") mean = 0.5 * (spec.a + spec.b);
            else if (spec.kind == "constant") mean = spec.a;
            else if (spec.kind == "bernoulli") mean = spec.a * spec.b;
            else continue;
            const double want = cfg.instance.harvest_rate[i];
            if (std::abs(mean - want) > 1e-9 * std::max(1.0, std::abs(want))) {
                reader.error("harvest[" + std::to_string(i) + "]",
                             "mean " + format_double(mean) +
                                 " does not match instance.ebar[" + std::to_string(i) +
                                 "] = " + format_double(want));
            }
        }
    }

    // scalars
    if (root.contains("num_directions")) {
        if (const auto v = reader.integer(root["num_directions"], "num_directions")) {
            cfg.num_directions = static_cast<int>(*v);
            if (*v < 2) reader.error("num_directions", "must be >= 2");
        }
    }
    if (root.contains("N_list")) {
        if (!root["N_list"].is_array()) {
            reader.error("N_list", "must be an array of slot counts");
        } else {
            for (std::size_t i = 0; i < root["N_list"].size(); ++i) {
                const std::string field = "N_list[" + std::to_string(i) + "]";
                if (const auto v = reader.integer(root["N_list"][i], field)) {
                    cfg.n_list.push_back(*v);
                    if (*v < 2) reader.error(field, "must be >= 2");
                }
            }
        }
    }
    if (effective_kind.has_value() && *effective_kind != ExperimentKind::Region &&
        cfg.n_list.empty()) {
        reader.error("N_list", "must be nonempty for " + to_string(*effective_kind) +
                                   " experiments");
    }
    if (root.contains("region_sim_N")) {
        if (const auto v = reader.integer(root["region_sim_N"], "region_sim_N")) {
            cfg.region_sim_n = *v;
            if (*v < 2) reader.error("region_sim_N", "must be >= 2");
        }
    }
    if (root.contains("trials")) {
        if (const auto v = reader.integer(root["trials"], "trials")) {
            cfg.trials = *v;
            if (*v < 1) reader.error("trials", "must be >= 1");
        }
    }
    if (!root.contains("seed")) {
        reader.error("seed", "is required (reproducibility is not optional)");
    } else if (!root["seed"].is_number_integer() || root["seed"].get<std::int64_t>() < 0) {
        reader.error("seed", "must be a nonnegative integer");
    } else {
        cfg.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("epsilon_mode")) {
        const json& m = root["epsilon_mode"];
        if (!m.is_string() ||
            (m.get<std::string>() != "fixed" && m.get<std::string>() != "vanishing")) {
            reader.error("epsilon_mode", "must be 'fixed' or 'vanishing'");
        } else {
            cfg.epsilon_mode = m.get<std::string>() == "fixed" ? EpsilonMode::Fixed
                                                               : EpsilonMode::Vanishing;
        }
    }
    if (root.contains("fixed_epsilon_fraction")) {
        if (const auto v = reader.number(root["fixed_epsilon_fraction"],
                                         "fixed_epsilon_fraction")) {
            cfg.fixed_epsilon_fraction = *v;
            if (!(*v >= 0.0) || !(*v < 1.0)) {
                reader.error("fixed_epsilon_fraction", "must lie in [0, 1)");
            }
        }
    }
    if (root.contains("vanishing_scale")) {
        if (const auto v = reader.number(root["vanishing_scale"], "vanishing_scale")) {
            cfg.vanishing_scale = *v;
            if (!(*v > 0.0)) reader.error("vanishing_scale", "must be > 0");
        }
    }
    if (root.contains("output_dir")) {
        if (!root["output_dir"].is_string() || root["output_dir"].get<std::string>().empty()) {
            reader.error("output_dir", "must be a nonempty string");
        } else {
            cfg.output_dir = root["output_dir"].get<std::string>();
        }
    }

    if (result.errors.empty()) result.config = std::move(cfg);
    return result;
}

namespace {

struct CsvTable {
    std::string name;
    std::string bytes;
    json provenance;
};

double unit_factor(RateUnits units) {
    return units == RateUnits::Bits ? 1.0 / std::numbers::ln2_v<double> : 1.0;
}

std::vector<HarvestProcess> normalized_processes(const ExperimentConfig& cfg) {
    std::vector<HarvestProcess> procs;
    procs.reserve(cfg.harvest.size());
    for (std::size_t k = 0; k < cfg.harvest.size(); ++k) {
        const double scale = cfg.instance.gains[static_cast<int>(k)] / cfg.instance.noise_var;
        procs.push_back(cfg.harvest[k].to_process().scaled(scale));
    }
    return procs;
}

double direction_angle(const Vec& mu, int index) {
    if (mu.size() == 2) return std::atan2(mu[1], mu[0]);
    return static_cast<double>(index);
}

CsvTable region_table(const ExperimentConfig& cfg, const NormalizedMac& instance,
                      RateUnits units) {
    const double uf = unit_factor(units);
    const int k = instance.users;

    const std::vector<BoundarySample> coop =
        trace_boundary(instance, cfg.num_directions);

    const std::vector<HarvestProcess> procs = normalized_processes(cfg);
    std::vector<SimOutcome> sims(coop.size());
    detail::parallel_for(static_cast<std::int64_t>(coop.size()), [&](std::int64_t i) {
        EquivalenceOptions opts;
        opts.mode = cfg.epsilon_mode;
        opts.fixed_epsilon_fraction = cfg.fixed_epsilon_fraction;
        opts.vanishing_scale = cfg.vanishing_scale;
        opts.direction = coop[i].mu;
        sims[i] = run_equivalence_experiment(instance, procs, cfg.region_sim_n,
                                             cfg.seed + static_cast<std::uint64_t>(i),
                                             opts);
    });

    std::string csv = "curve_id,mu_angle";
    for (int c = 0; c < k; ++c) csv += ",R" + std::to_string(c + 1);
    csv += "\n";

    auto append_row = [&](const char* curve, double angle, const Vec& rates) {
        csv += curve;
        csv += ",";
        csv += format_double(angle);
        for (int c = 0; c < k; ++c) {
            csv += ",";
            csv += format_double(uf * rates[c]);
        }
        csv += "\n";
    };

    for (std::size_t i = 0; i < coop.size(); ++i) {
        const double angle = direction_angle(coop[i].mu, static_cast<int>(i));
        const Vec nc = corner_point(instance.p_budget, decode_order(coop[i].mu));
        append_row("analytic_nocoop", angle, nc);
    }
    for (std::size_t i = 0; i < coop.size(); ++i) {
        append_row("analytic_coop", direction_angle(coop[i].mu, static_cast<int>(i)),
                   coop[i].rates);
    }
    for (std::size_t i = 0; i < coop.size(); ++i) {
        append_row("simulated_eh", direction_angle(coop[i].mu, static_cast<int>(i)),
                   sims[i].achieved_rates);
    }

    CsvTable table;
    table.name = "region.csv";
    table.bytes = std::move(csv);
    table.provenance = {
        {"analytic_nocoop", "analytic"},
        {"analytic_coop", "analytic"},
        {"simulated_eh",
         {{"kind", "simulated"}, {"seed", cfg.seed}, {"trials_per_direction", 1},
          {"N", cfg.region_sim_n}}}};
    return table;
}

CsvTable convergence_table(const ExperimentConfig& cfg, const NormalizedMac& instance,
                           RateUnits units) {
    const double uf = unit_factor(units);
    const double analytic = sum_capacity(instance).value;
    const std::vector<HarvestProcess> procs = normalized_processes(cfg);

    std::string csv = "N,analytic,simulated_mean,ci_low,ci_high,trials,seed\n";
    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
        const std::int64_t n_slots = cfg.n_list[ni];
        std::vector<double> achieved(cfg.trials, 0.0);
        detail::parallel_for(cfg.trials, [&](std::int64_t t) {
            EquivalenceOptions opts;
            opts.mode = cfg.epsilon_mode;
            opts.fixed_epsilon_fraction = cfg.fixed_epsilon_fraction;
            opts.vanishing_scale = cfg.vanishing_scale;
            const std::uint64_t run_seed =
                cfg.seed + static_cast<std::uint64_t>(ni) *
                               static_cast<std::uint64_t>(cfg.trials) +
                static_cast<std::uint64_t>(t);
            achieved[t] =
                run_equivalence_experiment(instance, procs, n_slots, run_seed, opts)
                    .achieved_weighted;
        });
        double mean = 0.0;
        for (double a : achieved) mean += a;
        mean /= static_cast<double>(cfg.trials);
        double var = 0.0;
        for (double a : achieved) var += (a - mean) * (a - mean);
        var = cfg.trials > 1 ? var / static_cast<double>(cfg.trials - 1) : 0.0;
        const double half =
            1.959963984540054 * std::sqrt(var / static_cast<double>(cfg.trials));

        csv += format_int(n_slots);
        csv += "," + format_double(uf * analytic);
        csv += "," + format_double(uf * mean);
        csv += "," + format_double(uf * (mean - half));
        csv += "," + format_double(uf * (mean + half));
        csv += "," + format_int(cfg.trials);
        csv += "," + format_int(static_cast<std::int64_t>(cfg.seed));
        csv += "\n";
    }

    CsvTable table;
    table.name = "convergence.csv";
    table.bytes = std::move(csv);
    table.provenance = {{"analytic", "analytic"},
                        {"simulated_mean",
                         {{"kind", "simulated"}, {"seed", cfg.seed},
                          {"trials", cfg.trials}}}};
    return table;
}

CsvTable shortage_table(const ExperimentConfig& cfg, const NormalizedMac& instance) {
    const std::vector<HarvestProcess> procs = normalized_processes(cfg);
    const double eps = cfg.fixed_epsilon_fraction * instance.p_budget.minCoeff();

    std::string csv = "N,h_slots,epsilon,estimate,ci_low,ci_high,trials,seed\n";
    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
        const std::int64_t n_slots = cfg.n_list[ni];
        const std::int64_t h = (n_slots + 9999) / 10000;
        const std::uint64_t base_seed =
            cfg.seed + static_cast<std::uint64_t>(ni) *
                           static_cast<std::uint64_t>(cfg.trials);
        const ShortageEstimate est = estimate_shortage_probability(
            instance, procs, n_slots, h, eps, cfg.trials, base_seed);
        csv += format_int(n_slots);
        csv += "," + format_int(h);
        csv += "," + format_double(eps);
        csv += "," + format_double(est.estimate);
        csv += "," + format_double(est.ci_low);
        csv += "," + format_double(est.ci_high);
        csv += "," + format_int(est.trials);
        csv += "," + format_int(static_cast<std::int64_t>(cfg.seed));
        csv += "\n";
    }

    CsvTable table;
    table.name = "shortage.csv";
    table.bytes = std::move(csv);
    table.provenance = {
        {"estimate",
         {{"kind", "simulated"}, {"seed", cfg.seed}, {"trials", cfg.trials}}}};
    return table;
}

void write_atomically(const std::filesystem::path& path, const std::string& bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

json ExperimentReport::to_json() const {
    json j;
    j["config"] = resolved_config;
    j["normalized_instance"] = normalized_instance;
    j["output_files"] = output_files;
    j["tables"] = tables;
    j["wall_ms"] = wall_ms;
    j["version"] = version;
    j["units"] = units;
    return j;
}

ExperimentReport run(const ExperimentConfig& config, ExperimentKind kind,
                     RateUnits units) {
    const auto t0 = std::chrono::steady_clock::now();
    if (config.kind.has_value() && *config.kind != kind) {
        throw InvalidParameter("run: config kind conflicts with requested experiment");
    }
    if (kind != ExperimentKind::Region && config.n_list.empty()) {
        throw InvalidParameter("run: N_list must be nonempty for this experiment");
    }

    const NormalizedMac instance = normalize(config.instance);

    CsvTable table;
    switch (kind) {
        case ExperimentKind::Region:
            table = region_table(config, instance, units);
            break;
        case ExperimentKind::Convergence:
            table = convergence_table(config, instance, units);
            break;
        case ExperimentKind::Shortage:
            table = shortage_table(config, instance);
            break;
    }

    ExperimentReport report;
    report.resolved_config = config.to_json();
    report.normalized_instance = {
        {"K", instance.users},
        {"p_budget",
         std::vector<double>(instance.p_budget.begin(), instance.p_budget.end())},
        {"T", instance.slot_seconds}};
    json alpha = json::array();
    for (int r = 0; r < instance.users; ++r) {
        json row = json::array();
        for (int c = 0; c < instance.users; ++c) row.push_back(instance.alpha_eff(r, c));
        alpha.push_back(row);
    }
    report.normalized_instance["alpha_eff"] = alpha;
    report.tables[table.name] = table.provenance;
    report.version = kVersion;
    report.units = units == RateUnits::Bits ? "bits" : "nats";

    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);

    const std::filesystem::path csv_path = dir / table.name;
    write_atomically(csv_path, table.bytes);
    report.output_files.push_back(std::filesystem::absolute(csv_path).string());

    report.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    const std::filesystem::path report_path = dir / "report.json";
    write_atomically(report_path, report.to_json().dump(2) + "\n");
    report.output_files.push_back(std::filesystem::absolute(report_path).string());
    return report;
}

}  // namespace macec
