#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdde/conditions.hpp"
#include "sdde/config.hpp"
#include "sdde/memory_state.hpp"

#include <filesystem>
#include <fstream>

using namespace sdde;

namespace {

nlohmann::json minimal_doc() {
    return nlohmann::json::parse(R"({
      "r": 1.0,
      "drift": {"preset": "zero"},
      "levy": {"kind": "symmetric-atoms", "atoms": [{"z": [0.4], "mass": 1.0}]},
      "initial": {"kind": "constant", "value": [0.2]}
    })");
}

std::filesystem::path shipped() {
    return std::filesystem::path(SDDE_CONFIG_DIR) / "paper_cubic.cfg";
}

}  // namespace

TEST_CASE("minimal config loads with defaults filled") {
    const ScenarioConfig cfg = ScenarioConfig::from_json(minimal_doc());
    CHECK(cfg.build_integrator().dt == 1e-3);
    CHECK(cfg.resolve_delta(0.5) == doctest::Approx(0.005));
    CHECK(cfg.document()["initial"]["theta_min"].get<double>() == -1.0);
    CHECK(cfg.seed() == 0);
    CHECK(cfg.out_dir() == "out");
    CHECK(cfg.build_initial().head()[0] == 0.2);
    CHECK(cfg.build_levy().kind() == LevyMeasureModel::Kind::SymmetricAtoms);
}

TEST_CASE("validation collects every violation") {
    nlohmann::json doc = minimal_doc();
    doc.erase("r");
    doc["mu1"] = nlohmann::json::array(
        {{{"weight", 0.4}, {"kind", "atom"}, {"theta0", -0.3}},
         {{"weight", 0.5}, {"kind", "atom"}, {"theta0", -0.6}}});  // sums to 0.9
    doc["integrator"] = {{"dt", -1.0}};
    bool threw = false;
    try {
        ScenarioConfig::from_json(doc);
    } catch (const ConfigError& e) {
        threw = true;
        CHECK(e.issues().size() >= 3);
        const std::string all = e.what();
        CHECK(all.find("r must be present") != std::string::npos);
        CHECK(all.find("normalized") != std::string::npos);
        CHECK(all.find("dt must be positive") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("the shipped scenario loads and its constants pass") {
    const ScenarioConfig cfg = load_config(shipped());
    CHECK(cfg.has_constants());
    const ConditionReport rep = check_dissipativity_constants(cfg.build_constants());
    CHECK(rep.pass);
    CHECK(rep.slack1 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rep.slack2 == doctest::Approx(2.0 - std::exp(0.6)).epsilon(1e-14));
}

TEST_CASE("round trip: load, serialize, reload is the identity") {
    const ScenarioConfig a = load_config(shipped());
    const ScenarioConfig b = ScenarioConfig::from_json(a.to_json());
    CHECK(a.to_json().dump() == b.to_json().dump());

    const ScenarioConfig c = ScenarioConfig::from_json(minimal_doc());
    const ScenarioConfig d = ScenarioConfig::from_json(c.to_json());
    CHECK(c.to_json().dump() == d.to_json().dump());
}

TEST_CASE("overrides win over the file") {
    ScenarioConfig cfg = load_config(shipped());
    cfg.override_seed(777);
    cfg.override_trials(1234);
    cfg.override_out_dir("elsewhere");
    CHECK(cfg.seed() == 777);
    CHECK(cfg.out_dir() == "elsewhere");
    CHECK(cfg.probe_block("irreducibility")["trials"].get<long>() == 1234);
    CHECK(cfg.probe_block("first_jump")["samples"].get<long>() == 1234);
    // structural knobs are untouched
    CHECK(cfg.probe_block("irreducibility")["bound_search_trials"].get<long>() == 500);
}

TEST_CASE("unknown probe selections are rejected") {
    const ScenarioConfig cfg = ScenarioConfig::from_json(minimal_doc());
    CHECK_THROWS_AS(run_scenario(cfg, {"nonsense"}, false), std::invalid_argument);
    CHECK_THROWS_AS(run_scenario(cfg, {"decay"}, false), std::invalid_argument);  // no block
}

TEST_CASE("a scenario run produces reports and respects verdict-based status") {
    nlohmann::json doc = minimal_doc();
    doc["levy"]["atoms"] = nlohmann::json::array({{{"z", {1.0}}, {"mass", 0.7}}});
    doc["probes"] = {{"first_jump", {{"eps", 0.5}, {"samples", 2000}}}};
    doc["seed"] = 99;
    const auto dir = std::filesystem::temp_directory_path() / "sdde_run_scenario_test";
    std::filesystem::remove_all(dir);
    doc["out"] = dir.string();
    const ScenarioConfig cfg = ScenarioConfig::from_json(doc);
    const RunOutcome outcome = run_scenario(cfg, {}, true);
    CHECK(outcome.all_pass);
    REQUIRE(outcome.reports.size() == 1);
    CHECK(outcome.reports[0].name() == "first_jump");
    CHECK(std::filesystem::exists(dir / "first_jump_report.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("seeded reruns reproduce report files byte for byte") {
    nlohmann::json doc = minimal_doc();
    doc["levy"]["atoms"] = nlohmann::json::array({{{"z", {1.0}}, {"mass", 0.7}}});
    doc["probes"] = {{"first_jump", {{"eps", 0.5}, {"samples", 2000}}}};
    doc["seed"] = 4242;
    const auto base = std::filesystem::temp_directory_path() / "sdde_repro_test";
    std::filesystem::remove_all(base);
    std::string dumps[2];
    for (int round = 0; round < 2; ++round) {
        nlohmann::json d = doc;
        d["out"] = (base / std::to_string(round)).string();
        run_scenario(ScenarioConfig::from_json(d), {}, true);
        std::ifstream is(base / std::to_string(round) / "first_jump_report.json");
        dumps[round].assign(std::istreambuf_iterator<char>(is), {});
        CHECK(!dumps[round].empty());
    }
    CHECK(dumps[0] == dumps[1]);
    std::filesystem::remove_all(base);
}

TEST_CASE("a blow-up in a probe is reported with the probe name") {
    nlohmann::json doc = minimal_doc();
    doc["drift"] = {{"preset", "custom"}, {"local", {0.0, 0.0, 0.0, 1.0}}};
    doc["initial"]["value"] = {1.0};
    doc["probes"] = {{"decay", {{"T_list", {5.0}}}}};
    const ScenarioConfig cfg = ScenarioConfig::from_json(doc);
    bool threw = false;
    try {
        run_scenario(cfg, {}, false);
    } catch (const std::runtime_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("probe 'decay'") != std::string::npos);
        CHECK(std::string(e.what()).find("bound") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("pure-tail and piecewise initial segments build") {
    nlohmann::json doc = minimal_doc();
    doc["initial"] = {{"kind", "pure-tail"}, {"v", {0.7}}};
    const HistorySegment tail = ScenarioConfig::from_json(doc).build_initial();
    CHECK(tail.theta_min() == 0.0);
    CHECK(fading_norm(tail) == doctest::Approx(0.7));

    doc["initial"] = {{"kind", "piecewise"},
                      {"rows", {{-2.0, 0.1}, {-1.0, 0.4}, {0.0, 0.2}}}};
    const HistorySegment pw = ScenarioConfig::from_json(doc).build_initial();
    CHECK(pw.node_count() == 3);
    CHECK(pw.head()[0] == 0.2);
    CHECK(pw.value(-1.5)[0] == doctest::Approx(0.25));
}

TEST_CASE("parse errors carry the position") {
    const auto path = std::filesystem::temp_directory_path() / "sdde_broken.cfg";
    {
        std::ofstream os(path);
        os << "{\"r\": nonsense";
    }
    bool threw = false;
    try {
        load_config(path);
    } catch (const ConfigError& e) {
        threw = true;
        CHECK(std::string(e.what()).find("parse error") != std::string::npos);
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
    CHECK(threw);
    std::filesystem::remove(path);
}

TEST_CASE("atom lists must be given one half only") {
    nlohmann::json doc = minimal_doc();
    doc["levy"]["atoms"] =
        nlohmann::json::array({{{"z", {0.4}}, {"mass", 1.0}}, {{"z", {-0.4}}, {"mass", 1.0}}});
    CHECK_THROWS_AS(ScenarioConfig::from_json(doc), ConfigError);
}
