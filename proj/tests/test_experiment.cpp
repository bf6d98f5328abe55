#include "macec/experiment.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace macec;
using nlohmann::json;

namespace {

const char* kPaperConfig = R"({
  "instance": {
    "h": [0.8, 1.5],
    "sigma2": 1.0,
    "T": 1.0,
    "alpha": [[0.0, 0.8], [0.5, 0.0]],
    "ebar": [1.0, 2.0]
  },
  "seed": 7
})";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path fresh_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("macec_test_" + tag);
    std::filesystem::remove_all(dir);
    return dir;
}

bool has_error_for(const ValidationResult& vr, const std::string& field_prefix) {
    for (const auto& e : vr.errors) {
        if (e.field.rfind(field_prefix, 0) == 0) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("a minimal config resolves with documented defaults") {
    const ValidationResult vr = validate(kPaperConfig);
    REQUIRE(vr.ok());
    const ExperimentConfig& cfg = *vr.config;
    CHECK(cfg.num_directions == 64);
    CHECK(cfg.trials == 10);
    CHECK(cfg.seed == 7);
    CHECK(cfg.epsilon_mode == EpsilonMode::Vanishing);
    CHECK(cfg.output_dir == "out");
    REQUIRE(cfg.harvest.size() == 2);
    CHECK(cfg.harvest[0].kind == "uniform");
    CHECK(cfg.harvest[0].b == 2.0);  // mean ebar_0
    CHECK(cfg.harvest[1].b == 4.0);
}

TEST_CASE("syntax errors come back with line and column") {
    const ValidationResult vr = validate("{\n  \"instance\": [,\n}");
    REQUIRE_FALSE(vr.ok());
    REQUIRE(vr.errors.size() == 1);
    CHECK(vr.errors[0].field == "(syntax)");
    CHECK(vr.errors[0].message.find("line 2") != std::string::npos);
}

TEST_CASE("every violated constraint is reported, not just the first") {
    json bad = json::parse(kPaperConfig);
    bad["instance"]["h"][0] = 0.0;            // gain must be > 0
    bad["instance"]["sigma2"] = -1.0;         // noise must be > 0
    bad["trials"] = 0;                        // must be >= 1
    bad.erase("seed");                        // required
    const ValidationResult vr = validate(bad.dump());
    REQUIRE_FALSE(vr.ok());
    CHECK(vr.errors.size() >= 4);
    CHECK(has_error_for(vr, "instance.h[0]"));
    CHECK(has_error_for(vr, "instance.sigma2"));
    CHECK(has_error_for(vr, "trials"));
    CHECK(has_error_for(vr, "seed"));
}

TEST_CASE("kind-specific constraints") {
    json cfg = json::parse(kPaperConfig);
    cfg["kind"] = "convergence";
    const ValidationResult vr = validate(cfg.dump());
    REQUIRE_FALSE(vr.ok());
    CHECK(has_error_for(vr, "N_list"));

    cfg["N_list"] = {1000, 10000};
    CHECK(validate(cfg.dump()).ok());

    // Subcommand / kind conflicts are caught.
    const ValidationResult conflict =
        validate(cfg.dump(), ExperimentKind::Region);
    REQUIRE_FALSE(conflict.ok());
    CHECK(has_error_for(conflict, "kind"));
}

TEST_CASE("harvest means must match the configured recharge rates") {
    json cfg = json::parse(kPaperConfig);
    cfg["harvest"] = {{{"kind", "uniform"}, {"a", 0.0}, {"b", 2.0}},
                      {{"kind", "constant"}, {"value", 1.5}}};
    const ValidationResult vr = validate(cfg.dump());
    REQUIRE_FALSE(vr.ok());
    CHECK(has_error_for(vr, "harvest[1]"));
}

TEST_CASE("a resolved config round-trips through its serialization") {
    json cfg = json::parse(kPaperConfig);
    cfg["kind"] = "region";
    cfg["N_list"] = {5000};
    cfg["epsilon_mode"] = "fixed";
    const ValidationResult vr = validate(cfg.dump());
    REQUIRE(vr.ok());
    const json first = vr.config->to_json();
    const ValidationResult again = validate(first.dump());
    REQUIRE(again.ok());
    CHECK(again.config->to_json() == first);
}

TEST_CASE("region experiment with no links collapses both curves") {
    json cfg = json::parse(kPaperConfig);
    cfg["instance"]["alpha"] = {{0.0, 0.0}, {0.0, 0.0}};
    cfg["num_directions"] = 9;
    cfg["region_sim_N"] = 4000;
    cfg["output_dir"] = fresh_dir("nocoop").string();
    const ValidationResult vr = validate(cfg.dump(), ExperimentKind::Region);
    REQUIRE(vr.ok());
    const ExperimentReport report = run(*vr.config, ExperimentKind::Region);

    const std::string csv = slurp(vr.config->output_dir + "/region.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "curve_id,mu_angle,R1,R2");
    std::vector<std::string> nocoop;
    std::vector<std::string> coop;
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind("analytic_nocoop,", 0) == 0) {
            nocoop.push_back(line.substr(std::string("analytic_nocoop,").size()));
        } else if (line.rfind("analytic_coop,", 0) == 0) {
            coop.push_back(line.substr(std::string("analytic_coop,").size()));
        }
    }
    REQUIRE(nocoop.size() == 9);
    REQUIRE(coop.size() == 9);
    CHECK(nocoop == coop);  // identical rows, not merely close
    CHECK(report.output_files.size() == 2);
}

TEST_CASE("cooperation strictly enlarges the paper instance region") {
    json cfg = json::parse(kPaperConfig);
    cfg["num_directions"] = 9;
    cfg["region_sim_N"] = 4000;
    cfg["output_dir"] = fresh_dir("coopgain").string();
    const ValidationResult vr = validate(cfg.dump(), ExperimentKind::Region);
    REQUIRE(vr.ok());
    run(*vr.config, ExperimentKind::Region);

    const std::string csv = slurp(vr.config->output_dir + "/region.csv");
    std::istringstream lines(csv);
    std::string line;
    double best_gain = 0.0;
    std::vector<double> coop_r1, coop_r2, nc_r1, nc_r2;
    while (std::getline(lines, line)) {
        std::istringstream row(line);
        std::string curve, angle, r1, r2;
        std::getline(row, curve, ',');
        std::getline(row, angle, ',');
        std::getline(row, r1, ',');
        std::getline(row, r2, ',');
        if (curve == "analytic_coop") {
            coop_r1.push_back(std::stod(r1));
            coop_r2.push_back(std::stod(r2));
        } else if (curve == "analytic_nocoop") {
            nc_r1.push_back(std::stod(r1));
            nc_r2.push_back(std::stod(r2));
        }
    }
    REQUIRE(coop_r1.size() == nc_r1.size());
    for (std::size_t i = 0; i < coop_r1.size(); ++i) {
        best_gain = std::max(best_gain, (coop_r1[i] + coop_r2[i]) -
                                            (nc_r1[i] + nc_r2[i]));
    }
    CHECK(best_gain > 1e-3);
}

TEST_CASE("convergence gaps shrink with N and runs are byte-identical") {
    json cfg = json::parse(kPaperConfig);
    cfg["N_list"] = {2000, 50000};
    cfg["trials"] = 3;
    cfg["output_dir"] = fresh_dir("conv_a").string();
    const ValidationResult vr = validate(cfg.dump(), ExperimentKind::Convergence);
    REQUIRE(vr.ok());
    run(*vr.config, ExperimentKind::Convergence);
    const std::string first = slurp(vr.config->output_dir + "/convergence.csv");

    cfg["output_dir"] = fresh_dir("conv_b").string();
    const ValidationResult vr2 = validate(cfg.dump(), ExperimentKind::Convergence);
    REQUIRE(vr2.ok());
    run(*vr2.config, ExperimentKind::Convergence);
    const std::string second = slurp(vr2.config->output_dir + "/convergence.csv");
    CHECK(first == second);

    // The gap between analytic and simulated mean shrinks with N.
    std::istringstream lines(first);
    std::string line;
    std::getline(lines, line);  // header
    std::vector<double> gaps;
    while (std::getline(lines, line)) {
        std::istringstream row(line);
        std::string n, analytic, mean;
        std::getline(row, n, ',');
        std::getline(row, analytic, ',');
        std::getline(row, mean, ',');
        gaps.push_back(std::stod(analytic) - std::stod(mean));
    }
    REQUIRE(gaps.size() == 2);
    CHECK(gaps[1] < gaps[0]);
}

TEST_CASE("bits units scale every rate column") {
    json cfg = json::parse(kPaperConfig);
    cfg["N_list"] = {2000};
    cfg["trials"] = 2;
    cfg["output_dir"] = fresh_dir("units_nats").string();
    const ValidationResult vr = validate(cfg.dump(), ExperimentKind::Convergence);
    REQUIRE(vr.ok());
    run(*vr.config, ExperimentKind::Convergence, RateUnits::Nats);
    const std::string nats = slurp(vr.config->output_dir + "/convergence.csv");

    cfg["output_dir"] = fresh_dir("units_bits").string();
    const ValidationResult vr2 = validate(cfg.dump(), ExperimentKind::Convergence);
    REQUIRE(vr2.ok());
    run(*vr2.config, ExperimentKind::Convergence, RateUnits::Bits);
    const std::string bits = slurp(vr2.config->output_dir + "/convergence.csv");

    auto second_field = [](const std::string& csv) {
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line);
        std::getline(lines, line);
        std::istringstream row(line);
        std::string n, analytic;
        std::getline(row, n, ',');
        std::getline(row, analytic, ',');
        return std::stod(analytic);
    };
    // Both sides round-trip through 12-significant-digit CSV text.
    CHECK(second_field(bits) ==
          doctest::Approx(second_field(nats) / std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("shortage experiment emits one row per N") {
    json cfg = json::parse(kPaperConfig);
    cfg["N_list"] = {1000, 5000};
    cfg["trials"] = 20;
    cfg["output_dir"] = fresh_dir("shortage").string();
    const ValidationResult vr = validate(cfg.dump(), ExperimentKind::Shortage);
    REQUIRE(vr.ok());
    run(*vr.config, ExperimentKind::Shortage);
    const std::string csv = slurp(vr.config->output_dir + "/shortage.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "N,h_slots,epsilon,estimate,ci_low,ci_high,trials,seed");
    int rows = 0;
    while (std::getline(lines, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 2);
}

TEST_CASE("no stray temp files survive a run") {
    json cfg = json::parse(kPaperConfig);
    cfg["N_list"] = {1000};
    cfg["trials"] = 2;
    cfg["output_dir"] = fresh_dir("clean").string();
    const ValidationResult vr = validate(cfg.dump(), ExperimentKind::Convergence);
    REQUIRE(vr.ok());
    run(*vr.config, ExperimentKind::Convergence);
    for (const auto& entry :
         std::filesystem::directory_iterator(vr.config->output_dir)) {
        CHECK(entry.path().extension() != ".tmp");
    }
}

TEST_CASE("run refuses a config meant for a different experiment") {
    json cfg = json::parse(kPaperConfig);
    cfg["kind"] = "region";
    const ValidationResult vr = validate(cfg.dump());
    REQUIRE(vr.ok());
    CHECK_THROWS_AS(run(*vr.config, ExperimentKind::Convergence), InvalidParameter);
}
