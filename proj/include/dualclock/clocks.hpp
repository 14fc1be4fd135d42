// Analytic clock models for a PTP master and a pair of slave clocks
// driven by one common signal, one at twice the other's frequency.
// All readings are continuous (no quantization) and expressed against
// an ideal global reference time t.
#pragma once

#include <stdexcept>
#include <utility>

namespace dualclock {

// Frequency ratio of slave clock 1 to the common driving clock. Fixed by
// the dual-clock generation circuit; change here if the hardware differs.
inline constexpr double kSlave1Multiplier = 2.0;

struct MasterClock {
    double f_m = 1.0;     // rate, clock-seconds per reference second
    double theta_m = 0.0; // phase offset, seconds

    MasterClock() = default;
    MasterClock(double rate, double phase) : f_m(rate), theta_m(phase) {
        if (f_m <= 0.0)
            throw std::domain_error("MasterClock: rate must be positive");
    }
};

struct DualSlaveClock {
    double f_s = 1.0;      // common driving-clock rate
    double theta_s1 = 0.0; // phase of slave clock 1, seconds
    double theta_s2 = 0.0; // phase of slave clock 2, seconds

    DualSlaveClock() = default;
    DualSlaveClock(double rate, double phase1, double phase2)
        : f_s(rate), theta_s1(phase1), theta_s2(phase2) {
        if (f_s <= 0.0)
            throw std::domain_error("DualSlaveClock: rate must be positive");
    }
};

// Skew and slave phases re-expressed against the master clock instead of
// the ideal reference.
struct DerivedClockParams {
    double epsilon;        // normalized skew, (f_s - f_m)/f_m
    double theta_tilde_s1; // effective phase of slave 1 vs. master, seconds
    double theta_tilde_s2; // effective phase of slave 2 vs. master, seconds
};

inline double read_master(const MasterClock& clock, double t) {
    return clock.f_m * t + clock.theta_m;
}

// Returns (T_s1, T_s2) at reference instant t.
inline std::pair<double, double> read_slaves(const DualSlaveClock& clock, double t) {
    return {kSlave1Multiplier * clock.f_s * t + clock.theta_s1,
            clock.f_s * t + clock.theta_s2};
}

inline double normalized_skew(double f_m, double f_s) {
    if (f_m <= 0.0)
        throw std::domain_error("normalized_skew: master rate must be positive");
    return (f_s - f_m) / f_m;
}

inline DerivedClockParams effective_phases(const MasterClock& master,
                                           const DualSlaveClock& slave) {
    const double eps = normalized_skew(master.f_m, slave.f_s);
    return {eps,
            slave.theta_s1 - kSlave1Multiplier * (1.0 + eps) * master.theta_m,
            slave.theta_s2 - (1.0 + eps) * master.theta_m};
}

// Slave readings as functions of a master timestamp instead of reference time.
inline std::pair<double, double> slaves_from_master(const MasterClock& master,
                                                    const DualSlaveClock& slave,
                                                    double t_m) {
    const DerivedClockParams p = effective_phases(master, slave);
    return {kSlave1Multiplier * (1.0 + p.epsilon) * t_m + p.theta_tilde_s1,
            (1.0 + p.epsilon) * t_m + p.theta_tilde_s2};
}

// theta_s1 - theta_s2 - (1+eps)*theta_m. Zero exactly when the two slave
// clocks share a common offset with respect to the master.
inline double common_offset_residual(const MasterClock& master,
                                     const DualSlaveClock& slave) {
    const double eps = normalized_skew(master.f_m, slave.f_s);
    return slave.theta_s1 - slave.theta_s2 - (1.0 + eps) * master.theta_m;
}

// Both slave clocks start (or reset) together: phase ratio locked to the
// frequency ratio.
inline DualSlaveClock simultaneous_start(double f_s, double theta_s2) {
    return DualSlaveClock(f_s, kSlave1Multiplier * theta_s2, theta_s2);
}

} // namespace dualclock
