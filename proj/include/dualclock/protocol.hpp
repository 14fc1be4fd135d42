// One-way Sync message simulation. Two generators:
//  - generate_corrected: timestamps produced by the physical clock models,
//    so slave 1 sees the common offset doubled;
//  - generate_chin_chen: timestamps produced by the original (inconsistent)
//    dual-clock equations, where a supplied offset enters each clock once.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "clocks.hpp"
#include "rng.hpp"

namespace dualclock {

struct PathModel {
    double d_m2s = 0.0; // master-to-slave propagation delay, reference seconds

    PathModel() = default;
    explicit PathModel(double delay) : d_m2s(delay) {
        if (d_m2s < 0.0)
            throw std::domain_error("PathModel: delay must be nonnegative");
    }
};

struct JitterModel {
    double sigma1 = 0.0; // std of slave-clock-1 jitter, seconds
    double sigma2 = 0.0; // std of slave-clock-2 jitter, seconds
    std::uint64_t seed = 0;

    JitterModel() = default;
    JitterModel(double s1, double s2, std::uint64_t sd)
        : sigma1(s1), sigma2(s2), seed(sd) {
        if (sigma1 < 0.0 || sigma2 < 0.0)
            throw std::domain_error("JitterModel: sigma must be nonnegative");
    }
};

struct SyncSchedule {
    int n = 1;               // number of Sync messages
    double t_m_start = 0.0;  // first departure timestamp, master seconds
    double interval = 1.0;   // departure spacing, master seconds

    SyncSchedule() = default;
    SyncSchedule(int count, double start, double spacing)
        : n(count), t_m_start(start), interval(spacing) {
        if (n < 1)
            throw std::domain_error("SyncSchedule: n must be >= 1");
        if (interval <= 0.0)
            throw std::domain_error("SyncSchedule: interval must be positive");
    }
};

struct ClockScenario {
    MasterClock master;
    DualSlaveClock slave;
    PathModel path;
    JitterModel jitter;
    SyncSchedule schedule;
};

struct SyncRecord {
    int i;            // message index
    double t_m_i;     // master departure timestamp
    double t_arrival; // reference arrival instant; ground truth, not
                      // visible to estimators
    double t_s1_i;    // slave-clock-1 reception timestamp
    double t_s2_i;    // slave-clock-2 reception timestamp
};

struct GroundTruth {
    double epsilon;      // true normalized skew
    double d_master;     // delay in master clock units, f_m * d_m2s
    double theta_common; // effective slave-2 phase vs. master
    double psi;          // (1+epsilon)*d_master + theta_common
};

inline void validate(const ClockScenario& s) {
    if (s.master.f_m <= 0.0)
        throw std::domain_error("scenario: master rate must be positive");
    if (s.slave.f_s <= 0.0)
        throw std::domain_error("scenario: slave rate must be positive");
    if (s.path.d_m2s < 0.0)
        throw std::domain_error("scenario: delay must be nonnegative");
    if (s.jitter.sigma1 < 0.0 || s.jitter.sigma2 < 0.0)
        throw std::domain_error("scenario: jitter sigma must be nonnegative");
    if (s.schedule.n < 1)
        throw std::domain_error("scenario: n must be >= 1");
    if (s.schedule.interval <= 0.0)
        throw std::domain_error("scenario: interval must be positive");
}

// Physical generation: each Sync departs at T_m.i, arrives d_m2s reference
// seconds later, and both slave clocks are read at the arrival instant.
inline std::vector<SyncRecord> generate_corrected(const ClockScenario& s) {
    validate(s);
    GaussianRng rng(s.jitter.seed);
    std::vector<SyncRecord> out;
    out.reserve(static_cast<std::size_t>(s.schedule.n));
    for (int i = 0; i < s.schedule.n; ++i) {
        const double t_m = s.schedule.t_m_start + i * s.schedule.interval;
        const double t_arr = (t_m - s.master.theta_m) / s.master.f_m + s.path.d_m2s;
        const auto [ts1, ts2] = read_slaves(s.slave, t_arr);
        const double phi1 = rng.normal(s.jitter.sigma1);
        const double phi2 = rng.normal(s.jitter.sigma2);
        out.push_back({i, t_m, t_arr, ts1 + phi1, ts2 + phi2});
    }
    return out;
}

// Generation straight from the original dual-clock reception equations,
// with the common offset theta added once to each clock. Physically
// inconsistent for theta != 0; kept so estimator consistency can be tested
// on the model's own data.
inline std::vector<SyncRecord> generate_chin_chen(const ClockScenario& s, double theta) {
    validate(s);
    const double eps = normalized_skew(s.master.f_m, s.slave.f_s);
    const double d = s.master.f_m * s.path.d_m2s; // delay in master units
    GaussianRng rng(s.jitter.seed);
    std::vector<SyncRecord> out;
    out.reserve(static_cast<std::size_t>(s.schedule.n));
    for (int i = 0; i < s.schedule.n; ++i) {
        const double t_m = s.schedule.t_m_start + i * s.schedule.interval;
        const double t_arr = (t_m - s.master.theta_m) / s.master.f_m + s.path.d_m2s;
        const double base = (1.0 + eps) * (t_m + d);
        const double phi1 = rng.normal(s.jitter.sigma1);
        const double phi2 = rng.normal(s.jitter.sigma2);
        out.push_back({i, t_m, t_arr,
                       kSlave1Multiplier * base + theta + phi1,
                       base + theta + phi2});
    }
    return out;
}

inline GroundTruth ground_truth(const ClockScenario& s) {
    const DerivedClockParams p = effective_phases(s.master, s.slave);
    const double d_master = s.master.f_m * s.path.d_m2s;
    return {p.epsilon, d_master, p.theta_tilde_s2,
            (1.0 + p.epsilon) * d_master + p.theta_tilde_s2};
}

} // namespace dualclock
