#pragma once

#include "sdde/conditions.hpp"
#include "sdde/dynamics.hpp"
#include "sdde/levy_noise.hpp"
#include "sdde/memory_state.hpp"
#include "sdde/probes.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sdde {

/// A validated scenario: the normalized JSON document (defaults filled,
/// canonical key order) plus typed builders for every block. Validation
/// collects every violation before failing, and a round trip through
/// to_json() reproduces the document exactly.
class ScenarioConfig {
public:
    /// Parses and validates; throws ConfigError listing all violations.
    static ScenarioConfig from_json(const nlohmann::json& doc);

    double fading_rate() const;
    int dimension() const;
    std::uint64_t seed() const;
    int threads() const;
    std::string out_dir() const;

    DriftSpec build_drift() const;
    LevyMeasureModel build_levy() const;
    DelayMeasure build_mu1() const;
    DelayMeasure build_mu2() const;
    HistorySegment build_initial() const;
    IntegratorOptions build_integrator() const;
    bool has_constants() const;
    DissipativityConstants build_constants() const;

    /// Inner cutoff: configured value, or eps / 100 when left unset.
    double resolve_delta(double eps) const;

    bool has_probe(const std::string& name) const;
    nlohmann::json probe_block(const std::string& name) const;

    const nlohmann::json& document() const { return doc_; }
    nlohmann::json to_json() const { return doc_; }

    /// Overrides applied after loading (flags win over the file).
    void override_seed(std::uint64_t seed);
    void override_trials(long trials);
    void override_out_dir(const std::string& out);

private:
    ScenarioConfig() = default;
    nlohmann::json doc_;
};

ScenarioConfig load_config(const std::filesystem::path& path);

/// Names of the probes `run` understands, in execution order.
const std::vector<std::string>& probe_names();

struct RunOutcome {
    std::vector<ProbeReport> reports;
    bool all_pass = true;
};

/// Executes the selected probes (empty selection: every probe block present
/// in the config) in declared order, writing report and CSV files into the
/// output directory. Exit-style status: true iff every verdict passed.
RunOutcome run_scenario(const ScenarioConfig& config, std::vector<std::string> selection,
                        bool write_files = true);

}  // namespace sdde
