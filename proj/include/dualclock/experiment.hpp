// Scenario configs, end-to-end runs, and Monte-Carlo sweeps, with JSON
// report serialization. Config and report formats are the stable external
// interface of the toolkit.
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clocks.hpp"
#include "csv.hpp"
#include "estimators.hpp"
#include "identifiability.hpp"
#include "protocol.hpp"
#include "rng.hpp"

namespace dualclock {

using json = nlohmann::json;

enum class Generator { corrected, chin_chen };

struct ScenarioConfig {
    double f_m = 1.0;
    double theta_m = 0.0;
    double f_s = 1.0;
    std::optional<double> theta_s1;   // exclusive with simultaneous_start
    bool simultaneous_start = false;  // theta_s1 = 2 * theta_s2
    double theta_s2 = 0.0;
    double d_m2s = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    std::uint64_t seed = 0;
    int n = 1;
    double t_m_start = 0.0;
    double interval = 1.0;
    Generator generator = Generator::corrected;
    double chin_chen_theta = 0.0; // common offset fed to the chin_chen generator
    bool pooling = false;         // pool slave-1 data in estimate_corrected

    void validate() const {
        if (f_m <= 0.0) throw std::invalid_argument("config: f_m must be > 0");
        if (f_s <= 0.0) throw std::invalid_argument("config: f_s must be > 0");
        if (n < 1) throw std::invalid_argument("config: n must be >= 1");
        if (interval <= 0.0) throw std::invalid_argument("config: interval must be > 0");
        if (sigma1 < 0.0) throw std::invalid_argument("config: sigma1 must be >= 0");
        if (sigma2 < 0.0) throw std::invalid_argument("config: sigma2 must be >= 0");
        if (d_m2s < 0.0) throw std::invalid_argument("config: d_m2s must be >= 0");
        if (theta_s1.has_value() == simultaneous_start)
            throw std::invalid_argument(
                "config: provide exactly one of theta_s1 and simultaneous_start");
    }

    ClockScenario to_scenario() const {
        validate();
        ClockScenario s;
        s.master = MasterClock(f_m, theta_m);
        s.slave = simultaneous_start ? dualclock::simultaneous_start(f_s, theta_s2)
                                     : DualSlaveClock(f_s, *theta_s1, theta_s2);
        s.path = PathModel(d_m2s);
        s.jitter = JitterModel(sigma1, sigma2, seed);
        s.schedule = SyncSchedule(n, t_m_start, interval);
        return s;
    }
};

inline ScenarioConfig parse_config(const json& j) {
    ScenarioConfig c;
    if (!j.contains("scenario") || !j["scenario"].is_object())
        throw std::invalid_argument("config: missing 'scenario' object");
    const json& s = j["scenario"];
    auto get = [&s](const char* key, double fallback) {
        return s.contains(key) ? s.at(key).get<double>() : fallback;
    };
    c.f_m = get("f_m", 1.0);
    c.theta_m = get("theta_m", 0.0);
    c.f_s = get("f_s", 1.0);
    c.theta_s2 = get("theta_s2", 0.0);
    if (s.contains("theta_s1")) c.theta_s1 = s.at("theta_s1").get<double>();
    if (s.contains("simultaneous_start"))
        c.simultaneous_start = s.at("simultaneous_start").get<bool>();
    c.d_m2s = get("d_m2s", 0.0);
    c.sigma1 = get("sigma1", 0.0);
    c.sigma2 = get("sigma2", 0.0);
    if (s.contains("seed")) c.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("n")) c.n = s.at("n").get<int>();
    c.t_m_start = get("t_m_start", 0.0);
    c.interval = get("interval", 1.0);

    if (j.contains("generator")) {
        const std::string g = j.at("generator").get<std::string>();
        if (g == "corrected") c.generator = Generator::corrected;
        else if (g == "chin_chen") c.generator = Generator::chin_chen;
        else throw std::invalid_argument("config: generator must be 'corrected' or 'chin_chen'");
    }
    if (j.contains("chin_chen_theta"))
        c.chin_chen_theta = j.at("chin_chen_theta").get<double>();
    if (j.contains("pooling")) c.pooling = j.at("pooling").get<bool>();
    c.validate();
    return c;
}

inline json config_to_json(const ScenarioConfig& c) {
    json s;
    s["f_m"] = c.f_m;
    s["theta_m"] = c.theta_m;
    s["f_s"] = c.f_s;
    if (c.theta_s1) s["theta_s1"] = *c.theta_s1;
    s["simultaneous_start"] = c.simultaneous_start;
    s["theta_s2"] = c.theta_s2;
    s["d_m2s"] = c.d_m2s;
    s["sigma1"] = c.sigma1;
    s["sigma2"] = c.sigma2;
    s["seed"] = c.seed;
    s["n"] = c.n;
    s["t_m_start"] = c.t_m_start;
    s["interval"] = c.interval;
    json j;
    j["scenario"] = s;
    j["generator"] = c.generator == Generator::corrected ? "corrected" : "chin_chen";
    j["chin_chen_theta"] = c.chin_chen_theta;
    j["pooling"] = c.pooling;
    return j;
}

struct EstimateReport {
    ScenarioConfig config;
    GroundTruth truth;
    ChinChenEstimate chin_chen;
    CorrectedEstimate corrected;
    BaselineEstimate baseline;
    double theta_bias;           // theta_hat_chinchen - true theta
    double delay_bias;           // d_hat_chinchen - true d_master
    double predicted_delay_bias; // theta/(1+eps), where the offset reappears
    RankReport rank;
};

inline std::vector<SyncRecord> generate_dataset(const ScenarioConfig& c) {
    const ClockScenario s = c.to_scenario();
    return c.generator == Generator::corrected
               ? generate_corrected(s)
               : generate_chin_chen(s, c.chin_chen_theta);
}

inline EstimateReport run_demo(const ScenarioConfig& config) {
    const ClockScenario scenario = config.to_scenario();
    const std::vector<SyncRecord> records = generate_dataset(config);

    EstimateReport rep;
    rep.config = config;
    rep.truth = ground_truth(scenario);
    rep.chin_chen = estimate_chin_chen(records);
    rep.corrected = estimate_corrected(records, config.pooling);
    rep.baseline = estimate_baseline(records);
    rep.theta_bias = rep.chin_chen.theta_hat - rep.truth.theta_common;
    rep.delay_bias = rep.chin_chen.d_hat - rep.truth.d_master;
    rep.predicted_delay_bias = rep.truth.theta_common / (1.0 + rep.truth.epsilon);

    const DesignModel model = config.generator == Generator::corrected
                                  ? DesignModel::corrected
                                  : DesignModel::chin_chen;
    const DesignMatrix dm = build_design_matrix(
        records, {rep.corrected.epsilon_hat, 0.0, rep.corrected.psi_hat}, true, model);
    rep.rank = rank_analysis(dm);
    return rep;
}

inline json rank_report_to_json(const RankReport& r) {
    json j;
    j["collinearity_index"] = r.collinearity_index;
    j["numerical_rank"] = r.numerical_rank;
    j["singular_values"] = r.singular_values;
    return j;
}

inline json report_to_json(const EstimateReport& r) {
    json j;
    j["scenario_config"] = config_to_json(r.config);
    j["ground_truth"] = {{"d_m2s", r.truth.d_master},
                         {"epsilon", r.truth.epsilon},
                         {"psi", r.truth.psi},
                         {"theta", r.truth.theta_common}};
    j["chin_chen"] = {{"d_hat", r.chin_chen.d_hat},
                      {"epsilon_hat", r.chin_chen.epsilon_hat},
                      {"residual_var", r.chin_chen.residual_var},
                      {"theta_hat", r.chin_chen.theta_hat}};
    j["corrected"] = {{"epsilon_hat", r.corrected.epsilon_hat},
                      {"psi_hat", r.corrected.psi_hat},
                      {"residual_var", r.corrected.residual_var}};
    j["baseline"] = {{"epsilon_hat", r.baseline.epsilon_hat},
                     {"theta_hat", r.baseline.theta_hat}};
    j["bias"] = {{"delay_bias", r.delay_bias},
                 {"predicted_delay_bias", r.predicted_delay_bias},
                 {"theta_bias", r.theta_bias}};
    j["identifiability"] = rank_report_to_json(r.rank);
    return j;
}

// Streaming mean/std accumulator (Welford).
struct RunningStats {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    double std_dev() const {
        return count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1)) : 0.0;
    }
};

struct SweepReport {
    int trials = 0;
    RunningStats cc_epsilon, cc_d, cc_theta;
    RunningStats corr_epsilon, corr_psi;
    RunningStats base_epsilon, base_theta;
    GroundTruth truth{};
    double predicted_delay_bias = 0.0;
};

struct ParameterOverride {
    std::string field;
    double value;
};

inline void apply_override(ScenarioConfig& c, const ParameterOverride& o) {
    if (o.field == "f_m") c.f_m = o.value;
    else if (o.field == "theta_m") c.theta_m = o.value;
    else if (o.field == "f_s") c.f_s = o.value;
    else if (o.field == "theta_s1") c.theta_s1 = o.value;
    else if (o.field == "theta_s2") c.theta_s2 = o.value;
    else if (o.field == "d_m2s") c.d_m2s = o.value;
    else if (o.field == "sigma1") c.sigma1 = o.value;
    else if (o.field == "sigma2") c.sigma2 = o.value;
    else if (o.field == "n") c.n = static_cast<int>(o.value);
    else if (o.field == "t_m_start") c.t_m_start = o.value;
    else if (o.field == "interval") c.interval = o.value;
    else if (o.field == "chin_chen_theta") c.chin_chen_theta = o.value;
    else throw std::invalid_argument("override: unknown field '" + o.field + "'");
}

// Trial k reruns the scenario with seed derive_trial_seed(base_seed, k).
inline SweepReport run_sweep(ScenarioConfig config, int trials,
                             const std::vector<ParameterOverride>& overrides = {}) {
    if (trials < 1)
        throw std::invalid_argument("sweep: trials must be >= 1");
    for (const auto& o : overrides) apply_override(config, o);
    config.validate();

    SweepReport rep;
    rep.trials = trials;
    rep.truth = ground_truth(config.to_scenario());
    rep.predicted_delay_bias = rep.truth.theta_common / (1.0 + rep.truth.epsilon);

    const std::uint64_t base_seed = config.seed;
    for (int k = 0; k < trials; ++k) {
        config.seed = derive_trial_seed(base_seed, static_cast<std::uint64_t>(k));
        try {
            const std::vector<SyncRecord> records = generate_dataset(config);
            const ChinChenEstimate cc = estimate_chin_chen(records);
            const CorrectedEstimate co = estimate_corrected(records, config.pooling);
            const BaselineEstimate ba = estimate_baseline(records);
            rep.cc_epsilon.add(cc.epsilon_hat);
            rep.cc_d.add(cc.d_hat);
            rep.cc_theta.add(cc.theta_hat);
            rep.corr_epsilon.add(co.epsilon_hat);
            rep.corr_psi.add(co.psi_hat);
            rep.base_epsilon.add(ba.epsilon_hat);
            rep.base_theta.add(ba.theta_hat);
        } catch (const std::exception& e) {
            throw std::runtime_error("sweep: trial " + std::to_string(k) +
                                     " failed: " + e.what());
        }
    }
    return rep;
}

inline json sweep_report_to_json(const SweepReport& r) {
    auto stats = [](const RunningStats& s) {
        return json{{"mean", s.mean}, {"std", s.std_dev()}};
    };
    json j;
    j["trials"] = r.trials;
    j["ground_truth"] = {{"d_m2s", r.truth.d_master},
                         {"epsilon", r.truth.epsilon},
                         {"psi", r.truth.psi},
                         {"theta", r.truth.theta_common}};
    j["chin_chen"] = {{"d_hat", stats(r.cc_d)},
                      {"epsilon_hat", stats(r.cc_epsilon)},
                      {"theta_hat", stats(r.cc_theta)}};
    j["corrected"] = {{"epsilon_hat", stats(r.corr_epsilon)},
                      {"psi_hat", stats(r.corr_psi)}};
    j["baseline"] = {{"epsilon_hat", stats(r.base_epsilon)},
                     {"theta_hat", stats(r.base_theta)}};
    j["predicted_delay_bias"] = r.predicted_delay_bias;
    return j;
}

inline void write_ridge_csv(std::ostream& os, const RidgeSurface& s) {
    os << "d,theta,sse\n";
    for (std::size_t j = 0; j < s.d_grid.size(); ++j)
        for (std::size_t k = 0; k < s.theta_grid.size(); ++k)
            os << format_double(s.d_grid[j]) << ',' << format_double(s.theta_grid[k])
               << ',' << format_double(s.sse[j][k]) << '\n';
}

// The canonical bias demonstration: simultaneous start, 2 ms delay, 3 ms
// slave-2 phase, 1e-4 skew, noiseless, 100 Sync messages.
inline ScenarioConfig demo_config() {
    ScenarioConfig c;
    c.f_m = 1.0;
    c.theta_m = 0.0;
    c.f_s = 1.0001;
    c.simultaneous_start = true;
    c.theta_s2 = 0.003;
    c.d_m2s = 0.002;
    c.sigma1 = 0.0;
    c.sigma2 = 0.0;
    c.seed = 1;
    c.n = 100;
    c.t_m_start = 0.0;
    c.interval = 1.0;
    return c;
}

} // namespace dualclock
