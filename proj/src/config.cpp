#include "sdde/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace sdde {

namespace {

using nlohmann::json;

const json kIntegratorDefaults = {
    {"dt", 1e-3}, {"scheme", "euler"}, {"delta", nullptr}, {"blow_up_bound", 1e8}};

const json kProbeDefaults = {
    {"decay", {{"T_list", {10.0, 50.0, 100.0}}, {"decay_tol", 1e-3}, {"bounded_tol", 1e-6}}},
    {"convergence",
     {{"eps_ladder", {0.5, 0.25, 0.1}}, {"T", 1.0}, {"q", 0.25}, {"p", 0.5}, {"trials", 10000}}},
    {"first_jump", {{"eps", 1.0}, {"samples", 10000}}},
    {"irreducibility",
     {{"kappa_list", {0.5, 1.0}},
      {"T", 30.0},
      {"trials", 10000},
      {"eps_grid", {1.0, 0.5, 0.25, 0.1}},
      {"bound_search_trials", 500}}},
    {"resolvent",
     {{"kappa", 1.0}, {"lambda", 1.0}, {"t_max", 30.0}, {"grid_dt", 0.1}, {"trials", 2000}}}};

void merge_defaults(json& block, const json& defaults) {
    for (auto it = defaults.begin(); it != defaults.end(); ++it)
        if (!block.contains(it.key())) block[it.key()] = it.value();
}

double num(const json& j, const char* key, std::vector<std::string>& issues, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) {
        issues.push_back(std::string(key) + " must be a number");
        return fallback;
    }
    return j[key].get<double>();
}

std::vector<DelayMeasure::Component> parse_measure_components(const json& arr,
                                                              const std::string& name,
                                                              std::vector<std::string>& issues) {
    std::vector<DelayMeasure::Component> out;
    if (!arr.is_array() || arr.empty()) {
        issues.push_back(name + " must be a nonempty array of components");
        return out;
    }
    for (const auto& e : arr) {
        DelayMeasure::Component c;
        c.weight = e.value("weight", 1.0);
        const std::string kind = e.value("kind", "atom");
        if (kind == "atom") {
            c.kind = DelayMeasure::Component::Kind::Atom;
            c.theta0 = e.value("theta0", 0.0);
        } else if (kind == "exp") {
            c.kind = DelayMeasure::Component::Kind::Exponential;
            c.lambda = e.value("lambda", 1.0);
        } else {
            issues.push_back(name + ": unknown component kind '" + kind + "'");
        }
        out.push_back(c);
    }
    return out;
}

DelayMeasure build_measure(const json& arr, const std::string& name) {
    std::vector<std::string> scratch;
    auto comps = parse_measure_components(arr, name, scratch);
    return DelayMeasure::mixture(std::move(comps));
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const json& input) {
    std::vector<std::string> issues;
    json doc = input;
    if (!doc.is_object()) {
        throw ConfigError({"configuration root must be an object"});
    }

    // defaults
    if (!doc.contains("dimension")) doc["dimension"] = 1;
    if (!doc.contains("seed")) doc["seed"] = 0;
    if (!doc.contains("threads")) doc["threads"] = 0;
    if (!doc.contains("out")) doc["out"] = "out";
    if (!doc.contains("mu2")) doc["mu2"] = json::array({{{"weight", 1.0}, {"kind", "atom"}, {"theta0", 0.0}}});
    if (!doc.contains("integrator")) doc["integrator"] = json::object();
    merge_defaults(doc["integrator"], kIntegratorDefaults);
    if (doc.contains("probes")) {
        for (auto& [name, block] : doc["probes"].items()) {
            if (!kProbeDefaults.contains(name)) {
                issues.push_back("unknown probe '" + name + "'");
                continue;
            }
            merge_defaults(block, kProbeDefaults[name]);
        }
    } else {
        doc["probes"] = json::object();
    }

    const double r = num(doc, "r", issues, 0.0);
    if (!(r > 0.0)) issues.push_back("r must be present and positive");
    const int dim = doc["dimension"].is_number_integer() ? doc["dimension"].get<int>() : 0;
    if (dim < 1) issues.push_back("dimension must be a positive integer");
    if (!doc["seed"].is_number_integer() ||
        (!doc["seed"].is_number_unsigned() && doc["seed"].get<long long>() < 0))
        issues.push_back("seed must be a nonnegative integer");
    if (!doc["threads"].is_number_integer()) issues.push_back("threads must be an integer");

    // drift
    if (!doc.contains("drift") || !doc["drift"].is_object() || !doc["drift"].contains("preset")) {
        issues.push_back("drift.preset is required (zero | linear | cubic_example | custom)");
    } else {
        const std::string preset = doc["drift"]["preset"].get<std::string>();
        static const std::set<std::string> known{"zero", "linear", "cubic_example", "custom"};
        if (!known.count(preset)) issues.push_back("unknown drift preset '" + preset + "'");
        if (preset == "cubic_example") {
            if (dim >= 1 && dim != 1) issues.push_back("cubic_example is one-dimensional");
            if (!doc.contains("mu1")) issues.push_back("cubic_example requires a mu1 table");
        }
        if (preset == "linear" && !doc["drift"].contains("a")) doc["drift"]["a"] = -1.0;
        if (preset == "custom") {
            if (dim != 1) issues.push_back("custom drift is one-dimensional");
            if (!doc["drift"].contains("local")) doc["drift"]["local"] = json::array({0.0});
            for (const auto& part : doc["drift"].value("delay_parts", json::array())) {
                const std::string m = part.value("measure", "");
                if (m != "mu1" && m != "mu2")
                    issues.push_back("custom drift delay part must reference mu1 or mu2");
            }
        }
    }

    // measures
    for (const char* name : {"mu1", "mu2"}) {
        if (!doc.contains(name)) continue;
        auto comps = parse_measure_components(doc[name], name, issues);
        if (!comps.empty()) {
            try {
                DelayMeasure::mixture(comps);
            } catch (const std::exception& e) {
                issues.push_back(std::string(name) + ": " + e.what() +
                                 " (measure not normalized?)");
            }
        }
    }

    // levy
    if (!doc.contains("levy") || !doc["levy"].is_object() || !doc["levy"].contains("kind")) {
        issues.push_back("levy.kind is required (symmetric-atoms | radial-density | compound-poisson)");
    } else {
        const std::string kind = doc["levy"]["kind"].get<std::string>();
        if (kind == "symmetric-atoms") {
            if (!doc["levy"].contains("atoms") || !doc["levy"]["atoms"].is_array() ||
                doc["levy"]["atoms"].empty()) {
                issues.push_back("symmetric-atoms requires a nonempty atoms array (one half only)");
            }
        } else if (kind == "radial-density") {
            if (dim >= 1 && dim != 1) issues.push_back("radial-density is one-dimensional");
            if (!doc["levy"].contains("c") || !doc["levy"].contains("alpha"))
                issues.push_back("radial-density requires c and alpha");
        } else if (kind == "compound-poisson") {
            if (!doc["levy"].contains("mass") || !doc["levy"].contains("profile"))
                issues.push_back("compound-poisson requires mass and profile");
        } else {
            issues.push_back("unknown levy kind '" + kind + "'");
        }
    }

    // initial segment
    if (!doc.contains("initial") || !doc["initial"].is_object() ||
        !doc["initial"].contains("kind")) {
        issues.push_back("initial.kind is required (constant | pure-tail | piecewise)");
    } else {
        const std::string kind = doc["initial"]["kind"].get<std::string>();
        if (kind == "constant") {
            if (!doc["initial"].contains("value")) issues.push_back("initial constant needs value");
            if (!doc["initial"].contains("theta_min")) doc["initial"]["theta_min"] = -1.0;
        } else if (kind == "pure-tail") {
            if (!doc["initial"].contains("v")) issues.push_back("initial pure-tail needs v");
        } else if (kind == "piecewise") {
            if (!doc["initial"].contains("rows") || !doc["initial"]["rows"].is_array() ||
                doc["initial"]["rows"].empty())
                issues.push_back("initial piecewise needs nonempty rows");
        } else {
            issues.push_back("unknown initial kind '" + kind + "'");
        }
    }

    // integrator
    const json& integ = doc["integrator"];
    const double dt = num(integ, "dt", issues, 0.0);
    if (!(dt > 0.0)) issues.push_back("integrator.dt must be positive");
    const std::string scheme = integ.value("scheme", "euler");
    if (scheme != "euler" && scheme != "heun")
        issues.push_back("integrator.scheme must be euler or heun");
    if (!integ["delta"].is_null()) {
        const double delta = integ["delta"].get<double>();
        if (!(delta > 0.0 && delta < 1.0))
            issues.push_back("integrator.delta must satisfy 0 < delta < 1");
        if (doc["probes"].contains("convergence")) {
            const auto ladder = doc["probes"]["convergence"]["eps_ladder"];
            for (const auto& e : ladder)
                if (!(delta < e.get<double>()))
                    issues.push_back("integrator.delta must be below every convergence eps");
        }
    }
    if (doc["probes"].contains("convergence")) {
        auto ladder = doc["probes"]["convergence"]["eps_ladder"];
        for (const auto& e : ladder) {
            const double eps = e.get<double>();
            if (!(eps > 0.0 && eps <= 1.0))
                issues.push_back("convergence eps values must satisfy 0 < eps <= 1");
        }
        const double q = doc["probes"]["convergence"]["q"].get<double>();
        const double p = doc["probes"]["convergence"]["p"].get<double>();
        if (!(0.0 < q && q < p && p < 1.0))
            issues.push_back("convergence requires 0 < q < p < 1");
    }

    if (doc.contains("constants")) {
        const std::string hname = doc["constants"].value("H", "example_H");
        if (hname != "example_H") issues.push_back("unknown H preset '" + hname + "'");
        merge_defaults(doc["constants"],
                       {{"lambda1", 0.0}, {"lambda2", 0.0}, {"K1", 0.0}, {"K2", 0.0},
                        {"q1", 4.0}, {"q2", 4.0}, {"K", 12.0}, {"H", "example_H"}});
    }

    if (!issues.empty()) throw ConfigError(std::move(issues));

    ScenarioConfig cfg;
    cfg.doc_ = std::move(doc);

    // construction dry run: model invariants (atom symmetry, moment classes)
    // surface here as one aggregated error
    std::vector<std::string> build_issues;
    try {
        cfg.build_levy();
    } catch (const std::exception& e) {
        build_issues.push_back(std::string("levy: ") + e.what());
    }
    try {
        if (cfg.doc_.contains("mu1")) cfg.build_mu1();
        cfg.build_mu2();
    } catch (const std::exception& e) {
        build_issues.push_back(std::string("measures: ") + e.what());
    }
    try {
        const DriftSpec drift = cfg.build_drift();
        const auto moment = drift.moment_issues(cfg.fading_rate());
        build_issues.insert(build_issues.end(), moment.begin(), moment.end());
    } catch (const std::exception& e) {
        build_issues.push_back(std::string("drift: ") + e.what());
    }
    try {
        cfg.build_initial();
    } catch (const std::exception& e) {
        build_issues.push_back(std::string("initial: ") + e.what());
    }
    if (!build_issues.empty()) throw ConfigError(std::move(build_issues));
    return cfg;
}

double ScenarioConfig::fading_rate() const { return doc_["r"].get<double>(); }
int ScenarioConfig::dimension() const { return doc_["dimension"].get<int>(); }
std::uint64_t ScenarioConfig::seed() const { return doc_["seed"].get<std::uint64_t>(); }
int ScenarioConfig::threads() const { return doc_["threads"].get<int>(); }
std::string ScenarioConfig::out_dir() const { return doc_["out"].get<std::string>(); }

DriftSpec ScenarioConfig::build_drift() const {
    const json& d = doc_["drift"];
    const std::string preset = d["preset"].get<std::string>();
    if (preset == "zero") return DriftSpec::zero(dimension());
    if (preset == "linear") return DriftSpec::linear(d.value("a", -1.0), dimension());
    if (preset == "cubic_example") return DriftSpec::cubic_example(build_mu1());
    std::vector<double> local = d["local"].get<std::vector<double>>();
    std::vector<DriftSpec::DelayPart> parts;
    for (const auto& part : d.value("delay_parts", json::array())) {
        const auto coeffs = part["coeffs"].get<std::vector<double>>();
        const std::string m = part["measure"].get<std::string>();
        parts.push_back({PointwiseMap::polynomial(coeffs), m == "mu1" ? build_mu1() : build_mu2()});
    }
    return DriftSpec::custom(std::move(local), std::move(parts));
}

LevyMeasureModel ScenarioConfig::build_levy() const {
    const json& l = doc_["levy"];
    const std::string kind = l["kind"].get<std::string>();
    if (kind == "symmetric-atoms") {
        std::vector<std::pair<Vector, double>> half;
        for (const auto& a : l["atoms"]) {
            const auto z = a["z"].get<std::vector<double>>();
            Vector v(static_cast<Eigen::Index>(z.size()));
            for (std::size_t i = 0; i < z.size(); ++i) v[static_cast<Eigen::Index>(i)] = z[i];
            half.emplace_back(std::move(v), a["mass"].get<double>());
        }
        return LevyMeasureModel::symmetric_atoms(dimension(), std::move(half));
    }
    if (kind == "radial-density") {
        const double cutoff = l.contains("cutoff") && !l["cutoff"].is_null()
                                  ? l["cutoff"].get<double>()
                                  : std::numeric_limits<double>::infinity();
        return LevyMeasureModel::radial_density(l["c"].get<double>(), l["alpha"].get<double>(),
                                                cutoff);
    }
    MarkRadialProfile prof;
    const std::string pk = l["profile"].value("kind", "exponential");
    prof.kind = pk == "uniform" ? MarkRadialProfile::Kind::Uniform
                                : MarkRadialProfile::Kind::Exponential;
    prof.parameter = l["profile"].value("parameter", 1.0);
    return LevyMeasureModel::compound_poisson(dimension(), l["mass"].get<double>(), prof);
}

DelayMeasure ScenarioConfig::build_mu1() const { return build_measure(doc_.at("mu1"), "mu1"); }
DelayMeasure ScenarioConfig::build_mu2() const { return build_measure(doc_.at("mu2"), "mu2"); }

HistorySegment ScenarioConfig::build_initial() const {
    const json& ini = doc_["initial"];
    const std::string kind = ini["kind"].get<std::string>();
    const double r = fading_rate();
    if (kind == "constant") {
        const auto vals = ini["value"].get<std::vector<double>>();
        Vector c(static_cast<Eigen::Index>(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i) c[static_cast<Eigen::Index>(i)] = vals[i];
        return HistorySegment::constant(r, c, ini["theta_min"].get<double>());
    }
    if (kind == "pure-tail") {
        const auto vals = ini["v"].get<std::vector<double>>();
        Vector v(static_cast<Eigen::Index>(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
        return HistorySegment::pure_tail(r, v);
    }
    std::vector<std::pair<double, Vector>> grid;
    for (const auto& row : ini["rows"]) {
        const auto vals = row.get<std::vector<double>>();
        if (vals.size() < 2) throw std::invalid_argument("piecewise rows need [theta, values...]");
        Vector v(static_cast<Eigen::Index>(vals.size()) - 1);
        for (std::size_t i = 1; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i - 1)] = vals[i];
        grid.emplace_back(vals[0], std::move(v));
    }
    Vector anchor = grid.front().second;
    return HistorySegment(r, std::move(grid), std::move(anchor));
}

IntegratorOptions ScenarioConfig::build_integrator() const {
    IntegratorOptions opts;
    const json& integ = doc_["integrator"];
    opts.dt = integ["dt"].get<double>();
    opts.scheme = integ["scheme"].get<std::string>() == "heun" ? Scheme::Heun : Scheme::Euler;
    opts.blow_up_bound = integ["blow_up_bound"].get<double>();
    return opts;
}

bool ScenarioConfig::has_constants() const { return doc_.contains("constants"); }

DissipativityConstants ScenarioConfig::build_constants() const {
    if (!has_constants()) throw std::runtime_error("configuration has no constants block");
    const json& c = doc_["constants"];
    DissipativityConstants k;
    k.lambda1 = c["lambda1"].get<double>();
    k.lambda2 = c["lambda2"].get<double>();
    k.K1 = c["K1"].get<double>();
    k.K2 = c["K2"].get<double>();
    k.q1 = c["q1"].get<double>();
    k.q2 = c["q2"].get<double>();
    k.growth_K = c["K"].get<double>();
    k.r = fading_rate();
    k.H = DissipativityConstants::example_H();
    k.mu1 = doc_.contains("mu1") ? build_mu1() : DelayMeasure::atom(0.0);
    k.mu2 = build_mu2();
    return k;
}

double ScenarioConfig::resolve_delta(double eps) const {
    const json& d = doc_["integrator"]["delta"];
    return d.is_null() ? eps / 100.0 : d.get<double>();
}

bool ScenarioConfig::has_probe(const std::string& name) const {
    return doc_["probes"].contains(name);
}

nlohmann::json ScenarioConfig::probe_block(const std::string& name) const {
    return doc_["probes"].at(name);
}

void ScenarioConfig::override_seed(std::uint64_t seed) { doc_["seed"] = seed; }

void ScenarioConfig::override_trials(long trials) {
    for (auto& [name, block] : doc_["probes"].items()) {
        if (block.contains("trials")) block["trials"] = trials;
        if (block.contains("samples")) block["samples"] = trials;
    }
}

void ScenarioConfig::override_out_dir(const std::string& out) { doc_["out"] = out; }

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError({"cannot open " + path.string()});
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("parse error: ") + e.what()});
    }
    return ScenarioConfig::from_json(doc);
}

const std::vector<std::string>& probe_names() {
    static const std::vector<std::string> names{"decay", "convergence", "first_jump",
                                                "irreducibility", "resolvent"};
    return names;
}

RunOutcome run_scenario(const ScenarioConfig& config, std::vector<std::string> selection,
                        bool write_files) {
    if (selection.empty()) {
        for (const auto& name : probe_names())
            if (config.has_probe(name)) selection.push_back(name);
    }
    for (const auto& name : selection) {
        if (std::find(probe_names().begin(), probe_names().end(), name) == probe_names().end())
            throw std::invalid_argument("unknown probe '" + name + "'");
        if (!config.has_probe(name))
            throw std::invalid_argument("probe '" + name + "' has no block in the configuration");
    }

    const DriftSpec drift = config.build_drift();
    const LevyMeasureModel levy = config.build_levy();
    const HistorySegment xi = config.build_initial();
    const IntegratorOptions options = config.build_integrator();

    ProbeContext ctx;
    ctx.seed = config.seed();
    ctx.threads = config.threads();
    ctx.out_dir = config.out_dir();
    ctx.write_files = write_files;

    RunOutcome outcome;
    for (const auto& name : probe_names()) {
        if (std::find(selection.begin(), selection.end(), name) == selection.end()) continue;
        const nlohmann::json block = config.probe_block(name);
        try {
            if (name == "decay") {
                DecayParams params;
                params.decay_tol = block["decay_tol"].get<double>();
                params.bounded_tol = block["bounded_tol"].get<double>();
                if (config.has_constants())
                    params.conditions_pass =
                        check_dissipativity_constants(config.build_constants()).pass;
                outcome.reports.push_back(decay_probe(
                    drift, xi, block["T_list"].get<std::vector<double>>(), options, params, ctx));
            } else if (name == "convergence") {
                const auto ladder = block["eps_ladder"].get<std::vector<double>>();
                const double delta = config.resolve_delta(ladder.back());
                outcome.reports.push_back(
                    convergence_probe(drift, xi, levy, ladder, delta, block["T"].get<double>(),
                                      options, block["q"].get<double>(), block["p"].get<double>(),
                                      block["trials"].get<long>(), ctx)
                        .report);
            } else if (name == "first_jump") {
                outcome.reports.push_back(first_jump_probe(levy, block["eps"].get<double>(),
                                                           block["samples"].get<long>(), ctx));
            } else if (name == "irreducibility") {
                IrreducibilityParams params;
                params.eps_grid = block["eps_grid"].get<std::vector<double>>();
                params.bound_search_trials = block["bound_search_trials"].get<long>();
                outcome.reports.push_back(irreducibility_probe(
                    drift, {xi}, levy, block["kappa_list"].get<std::vector<double>>(),
                    block["T"].get<double>(), options, config.resolve_delta(1.0),
                    block["trials"].get<long>(), params, ctx));
            } else if (name == "resolvent") {
                outcome.reports.push_back(resolvent_probe(
                    drift, xi, levy, block["kappa"].get<double>(), block["lambda"].get<double>(),
                    block["t_max"].get<double>(), block["grid_dt"].get<double>(), options,
                    config.resolve_delta(1.0), block["trials"].get<long>(), ctx));
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("probe '" + name + "': " + e.what());
        }
        outcome.all_pass = outcome.all_pass && outcome.reports.back().all_pass();
    }
    return outcome;
}

}  // namespace sdde
