// Why the corrected one-way model cannot separate delay from offset:
// sensitivity (design) matrices, numerical rank via SVD, Fisher
// information, and a sum-of-squared-error scan over the (D, theta) plane.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "estimators.hpp"
#include "protocol.hpp"

namespace dualclock {

// Which reception equations generate the rows: the physically consistent
// model doubles the offset in slave 1, the original formulation does not.
enum class DesignModel { corrected, chin_chen };

struct DesignMatrix {
    // One row per (record, equation); columns are partials of the predicted
    // timestamp w.r.t. (epsilon, D, theta) at the linearization point.
    std::vector<std::array<double, 3>> rows;
    std::vector<int> clock_of_row; // 1 or 2, selects the jitter variance
};

struct RankReport {
    std::vector<double> singular_values; // descending
    int numerical_rank;
    double collinearity_index; // sigma_min/sigma_max over the (D, theta) pair
};

struct RidgeSurface {
    std::vector<double> d_grid;
    std::vector<double> theta_grid;
    // sse[j][k] = SSE at (d_grid[j], theta_grid[k]) with epsilon re-fit
    std::vector<std::vector<double>> sse;
};

struct LinearizationPoint {
    double epsilon;
    double d;
    double theta;
};

inline DesignMatrix build_design_matrix(const std::vector<SyncRecord>& records,
                                        const LinearizationPoint& at,
                                        bool use_both_equations,
                                        DesignModel model = DesignModel::corrected) {
    // Departures are mean-centered; the shift only moves a multiple of the
    // theta column into the epsilon column, so rank is unchanged while the
    // Gram matrix stays well conditioned for large timestamps.
    double mean_tm = 0.0;
    for (const auto& r : records) mean_tm += r.t_m_i;
    if (!records.empty()) mean_tm /= static_cast<double>(records.size());

    DesignMatrix m;
    const double s = 1.0 + at.epsilon;
    for (const auto& r : records) {
        const double tm = r.t_m_i - mean_tm;
        m.rows.push_back({tm + at.d, s, 1.0});
        m.clock_of_row.push_back(2);
        if (use_both_equations) {
            const double theta_partial = model == DesignModel::corrected ? 2.0 : 1.0;
            m.rows.push_back({2.0 * (tm + at.d), 2.0 * s, theta_partial});
            m.clock_of_row.push_back(1);
        }
    }
    return m;
}

namespace detail {

// One-sided Jacobi SVD: rotate column pairs to mutual orthogonality, then
// singular values are the column norms. Chosen over Gram eigenvalues for
// the implementation path because it resolves tiny singular values of
// nearly collinear columns to full relative accuracy.
inline std::vector<double> jacobi_singular_values(std::vector<std::array<double, 3>> a,
                                                  int ncols) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < ncols - 1; ++p) {
            for (int q = p + 1; q < ncols; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    app += a[r][p] * a[r][p];
                    aqq += a[r][q] * a[r][q];
                    apq += a[r][p] * a[r][q];
                }
                if (std::abs(apq) <= 1e-30 * std::sqrt(app * aqq) || apq == 0.0)
                    continue;
                rotated = true;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t r = 0; r < n; ++r) {
                    const double vp = a[r][p], vq = a[r][q];
                    a[r][p] = c * vp - s * vq;
                    a[r][q] = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<double> sv(static_cast<std::size_t>(ncols));
    for (int p = 0; p < ncols; ++p) {
        double norm2 = 0.0;
        for (std::size_t r = 0; r < n; ++r) norm2 += a[r][p] * a[r][p];
        sv[static_cast<std::size_t>(p)] = std::sqrt(norm2);
    }
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

} // namespace detail

inline RankReport rank_analysis(const DesignMatrix& m, double tol = 1e-10) {
    if (m.rows.empty())
        throw std::domain_error("rank_analysis: empty design matrix");
    const std::vector<double> sv = detail::jacobi_singular_values(m.rows, 3);
    const double smax = sv.front();
    int rank = 0;
    for (double s : sv)
        if (s > tol * smax) ++rank;

    // (D, theta) two-column submatrix
    std::vector<std::array<double, 3>> sub;
    sub.reserve(m.rows.size());
    for (const auto& r : m.rows) sub.push_back({r[1], r[2], 0.0});
    const std::vector<double> sv2 = detail::jacobi_singular_values(sub, 2);
    const double collinearity = sv2[0] > 0.0 ? sv2[1] / sv2[0] : 0.0;

    return {sv, rank, collinearity};
}

using Matrix3 = std::array<std::array<double, 3>, 3>;

inline Matrix3 fisher_information(const DesignMatrix& m, double sigma1, double sigma2) {
    if (sigma1 <= 0.0 || sigma2 <= 0.0)
        throw std::domain_error("fisher_information: sigma must be positive");
    Matrix3 f{};
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        const double sigma = m.clock_of_row[r] == 1 ? sigma1 : sigma2;
        const double w = 1.0 / (sigma * sigma);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                f[i][j] += w * m.rows[r][i] * m.rows[r][j];
    }
    return f;
}

inline Matrix3 fisher_information(const DesignMatrix& m, double sigma) {
    return fisher_information(m, sigma, sigma);
}

inline double determinant(const Matrix3& a) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1)
        throw std::domain_error("linspace: need at least one point");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    if (n == 1) {
        out.push_back(lo);
        return out;
    }
    const double step = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) out.push_back(lo + i * step);
    return out;
}

// SSE of the corrected slave-2 model at fixed (D, theta) with the skew
// re-fit by least squares (slope through the origin of the shifted data).
inline double profiled_sse(const std::vector<SyncRecord>& records, double d, double theta) {
    if (records.size() < 2)
        throw RankError("profiled_sse: need at least 2 records");
    double sxx = 0.0, sxz = 0.0;
    for (const auto& r : records) {
        const double x = r.t_m_i + d;
        const double z = r.t_s2_i - theta;
        sxx += x * x;
        sxz += x * z;
    }
    if (sxx <= 0.0)
        throw RankError("profiled_sse: degenerate regressor");
    const double slope = sxz / sxx; // 1 + epsilon_hat
    double sse = 0.0;
    for (const auto& r : records) {
        const double resid = (r.t_s2_i - theta) - slope * (r.t_m_i + d);
        sse += resid * resid;
    }
    return sse;
}

inline RidgeSurface ridge_scan(const std::vector<SyncRecord>& records,
                               std::pair<double, double> d_range,
                               std::pair<double, double> theta_range, int grid_n) {
    if (grid_n < 1)
        throw std::domain_error("ridge_scan: grid_n must be >= 1");
    RidgeSurface surf;
    surf.d_grid = linspace(d_range.first, d_range.second, grid_n);
    surf.theta_grid = linspace(theta_range.first, theta_range.second, grid_n);
    surf.sse.assign(surf.d_grid.size(),
                    std::vector<double>(surf.theta_grid.size(), 0.0));
    for (std::size_t j = 0; j < surf.d_grid.size(); ++j)
        for (std::size_t k = 0; k < surf.theta_grid.size(); ++k)
            surf.sse[j][k] = profiled_sse(records, surf.d_grid[j], surf.theta_grid[k]);
    return surf;
}

} // namespace dualclock
