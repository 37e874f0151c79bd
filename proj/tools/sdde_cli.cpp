#include "sdde/conditions.hpp"
#include "sdde/config.hpp"
#include "sdde/probes.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>

namespace {

int cmd_check(const std::string& path) {
    sdde::ScenarioConfig cfg = sdde::load_config(path);
    if (!cfg.has_constants()) {
        std::cerr << "error: the configuration has no constants block to check\n";
        return 2;
    }
    const sdde::ConditionReport rep = sdde::check_dissipativity_constants(cfg.build_constants());
    std::printf("slack1 (lambda2 - 2r - lambda1 mu2^(2r))  = %.12g\n", rep.slack1);
    std::printf("slack2 (K2 - K1 mu1^(2r))                 = %.12g\n", rep.slack2);
    std::printf("mu1^(2r) = %.12g, mu2^(2r) = %.12g\n", rep.mu1_moment_2r, rep.mu2_moment_2r);
    std::printf("mu1 in M_{(2 v q1) r} (kappa = %g): %s\n", rep.mu1_required_kappa,
                rep.mu1_in_class ? "yes" : "no");
    std::printf("mu2 in M_{2r}: %s\n", rep.mu2_in_class ? "yes" : "no");
    std::printf("result: %s\n", rep.pass ? "PASS" : ("FAIL - " + rep.failure_reason).c_str());
    return rep.pass ? 0 : 1;
}

int cmd_run(const std::string& path, const std::vector<std::string>& probes,
            const std::optional<std::uint64_t>& seed, const std::optional<long>& trials,
            std::optional<std::string> out) {
    sdde::ScenarioConfig cfg = sdde::load_config(path);
    // precedence: flag > environment > file
    if (!out) {
        if (const char* env = std::getenv("SDDE_OUT")) out = std::string(env);
    }
    if (seed) cfg.override_seed(*seed);
    if (trials) cfg.override_trials(*trials);
    if (out) cfg.override_out_dir(*out);

    const sdde::RunOutcome outcome = sdde::run_scenario(cfg, probes, true);
    std::printf("%-16s %-8s %s\n", "probe", "verdicts", "status");
    for (const auto& rep : outcome.reports) {
        long passed = 0;
        for (const auto& [k, v] : rep.verdicts())
            if (v.pass) ++passed;
        std::printf("%-16s %ld/%zu    %s\n", rep.name().c_str(), passed, rep.verdicts().size(),
                    rep.all_pass() ? "pass" : "FAIL");
        for (const auto& [k, v] : rep.verdicts())
            if (!v.pass) std::printf("    failed: %s (%s)\n", k.c_str(), v.detail.c_str());
        for (const auto& [k, note] : rep.flags())
            std::printf("    flag: %s - %s\n", k.c_str(), note.c_str());
    }
    std::printf("reports written to %s\n", cfg.out_dir().c_str());
    return outcome.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification harness for delay equations with fading memory "
                 "driven by symmetric pure-jump noise"};
    app.require_subcommand(1);

    std::string check_path;
    CLI::App* check = app.add_subcommand("check", "evaluate the moment/slack conditions only");
    check->add_option("config", check_path, "scenario configuration file")->required();

    std::string run_path;
    std::vector<std::string> probes;
    std::optional<std::uint64_t> seed;
    std::optional<long> trials;
    std::optional<std::string> out;
    CLI::App* run = app.add_subcommand("run", "run the selected probes and write reports");
    run->add_option("config", run_path, "scenario configuration file")->required();
    run->add_option("--probe", probes, "probe selection (repeatable); default: all configured");
    run->add_option("--seed", seed, "override the master seed");
    run->add_option("--trials", trials, "override every probe's trial/sample count");
    run->add_option("--out", out, "override the output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return cmd_check(check_path);
        return cmd_run(run_path, probes, seed, trials, out);
    } catch (const sdde::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
