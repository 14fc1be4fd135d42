// Least-squares estimators over one-way Sync datasets.
//
// estimate_chin_chen reconstructs the original dual-clock multi-parameter
// scheme: slope/intercept of T_s1 - T_s2 on T_m give skew and delay, and
// the mean of 2*T_s2 - T_s1 gives the common offset. estimate_corrected
// fits the physically consistent model, which only exposes the skew and
// the combined intercept psi = (1+eps)*D + theta. estimate_baseline
// attributes the whole intercept to offset under the assumption D = 0.
#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "protocol.hpp"

namespace dualclock {

// Thrown when the regressor spread is too small to fit a slope.
class RankError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChinChenEstimate {
    double epsilon_hat;
    double d_hat;         // estimated master-to-slave delay, master seconds
    double theta_hat;     // estimated common offset
    double residual_var;  // mean squared regression residual
};

struct CorrectedEstimate {
    double epsilon_hat;
    double psi_hat;       // estimated (1+eps)*D + theta
    double residual_var;
};

struct BaselineEstimate {
    double epsilon_hat;
    double theta_hat;     // full intercept read as offset (D assumed 0)
};

struct LineFit {
    double slope;
    double intercept;
    double residual_var;
};

namespace detail {

// Centered OLS: slope fit on mean-removed data, intercept reconstructed.
// Timestamps can be huge while intercepts are milliseconds, so the
// centered form avoids catastrophic cancellation in the normal equations.
inline LineFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2)
        throw RankError("OLS: need at least 2 records");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;

    double spread_lo = x[0], spread_hi = x[0];
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        spread_lo = std::min(spread_lo, x[k]);
        spread_hi = std::max(spread_hi, x[k]);
        const double dx = x[k] - mx;
        sxx += dx * dx;
        sxy += dx * (y[k] - my);
    }
    if (spread_hi - spread_lo <= 1e-12 * std::max(1.0, std::abs(mx)))
        throw RankError("OLS: degenerate regressor spread");

    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = y[k] - my - slope * (x[k] - mx);
        sse += r * r;
    }
    return {slope, intercept, sse / n};
}

inline std::vector<double> departures(const std::vector<SyncRecord>& records) {
    std::vector<double> x;
    x.reserve(records.size());
    for (const auto& r : records) x.push_back(r.t_m_i);
    return x;
}

} // namespace detail

inline ChinChenEstimate estimate_chin_chen(const std::vector<SyncRecord>& records) {
    const auto x = detail::departures(records);
    std::vector<double> diff, annihilated;
    diff.reserve(records.size());
    annihilated.reserve(records.size());
    for (const auto& r : records) {
        diff.push_back(r.t_s1_i - r.t_s2_i);
        annihilated.push_back(2.0 * r.t_s2_i - r.t_s1_i);
    }
    // Under the original model, T_s1 - T_s2 = (1+eps)(T_m + D) + noise
    // and 2*T_s2 - T_s1 = theta + noise.
    const LineFit fit = detail::ols(x, diff);
    if (fit.slope <= 0.0)
        throw std::domain_error("estimate_chin_chen: nonpositive slope implies eps <= -1");
    const double theta = std::accumulate(annihilated.begin(), annihilated.end(), 0.0) /
                         static_cast<double>(annihilated.size());
    return {fit.slope - 1.0, fit.intercept / fit.slope, theta, fit.residual_var};
}

inline CorrectedEstimate estimate_corrected(const std::vector<SyncRecord>& records,
                                            bool pool_slave1 = false) {
    const auto x = detail::departures(records);
    std::vector<double> y2;
    y2.reserve(records.size());
    for (const auto& r : records) y2.push_back(r.t_s2_i);
    const LineFit f2 = detail::ols(x, y2);
    if (!pool_slave1)
        return {f2.slope - 1.0, f2.intercept, f2.residual_var};

    // Pooling: slave 1 halved obeys the same line with half the jitter;
    // combine the two fits with inverse-residual-variance weights.
    std::vector<double> y1;
    y1.reserve(records.size());
    for (const auto& r : records) y1.push_back(r.t_s1_i / kSlave1Multiplier);
    const LineFit f1 = detail::ols(x, y1);
    const double v1 = std::max(f1.residual_var, 1e-300);
    const double v2 = std::max(f2.residual_var, 1e-300);
    const double w1 = 1.0 / v1, w2 = 1.0 / v2;
    const double slope = (w1 * f1.slope + w2 * f2.slope) / (w1 + w2);
    const double intercept = (w1 * f1.intercept + w2 * f2.intercept) / (w1 + w2);
    return {slope - 1.0, intercept, (f1.residual_var + f2.residual_var) / 2.0};
}

inline BaselineEstimate estimate_baseline(const std::vector<SyncRecord>& records) {
    const CorrectedEstimate c = estimate_corrected(records);
    return {c.epsilon_hat, c.psi_hat};
}

// Offset consistent with any assumed delay: the whole ambiguity line.
inline double ambiguity_line(double psi_hat, double epsilon_hat, double assumed_d) {
    if (epsilon_hat <= -1.0)
        throw std::domain_error("ambiguity_line: epsilon must exceed -1");
    return psi_hat - (1.0 + epsilon_hat) * assumed_d;
}

} // namespace dualclock
