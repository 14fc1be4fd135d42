#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dualclock/identifiability.hpp"

using namespace dualclock;

namespace {

ClockScenario scenario_simultaneous(double f_s, double theta_s2, double d, int n,
                                    double start = 0.0) {
    ClockScenario s;
    s.master = MasterClock(1.0, 0.0);
    s.slave = simultaneous_start(f_s, theta_s2);
    s.path = PathModel(d);
    s.jitter = JitterModel(0.0, 0.0, 0);
    s.schedule = SyncSchedule(n, start, 1.0);
    return s;
}

// Independent oracle: eigenvalues of a symmetric 3x3 matrix from the
// closed-form characteristic cubic (trigonometric solution), descending.
std::array<double, 3> symmetric3_eigenvalues(const Matrix3& a) {
    const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if (p1 == 0.0) {
        std::array<double, 3> ev = {a[0][0], a[1][1], a[2][2]};
        std::sort(ev.begin(), ev.end(), std::greater<>());
        return ev;
    }
    const double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) +
                      (a[2][2] - q) * (a[2][2] - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Matrix3 b{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            b[i][j] = (a[i][j] - (i == j ? q : 0.0)) / p;
    double r = determinant(b) / 2.0;
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    std::array<double, 3> ev = {e1, e2, e3};
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

Matrix3 gram(const DesignMatrix& m) {
    Matrix3 g{};
    for (const auto& row : m.rows)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) g[i][j] += row[i] * row[j];
    return g;
}

} // namespace

TEST_CASE("design matrix rows at the origin linearization") {
    std::vector<SyncRecord> recs = {{0, 0.0, 0.0, 0.0, 0.0}};
    auto m = build_design_matrix(recs, {0.0, 0.0, 0.0}, false);
    REQUIRE(m.rows.size() == 1);
    CHECK(m.rows[0] == std::array<double, 3>{0.0, 1.0, 1.0});

    m = build_design_matrix(recs, {0.0, 0.0, 0.0}, true);
    REQUIRE(m.rows.size() == 2);
    CHECK(m.rows[1] == std::array<double, 3>{0.0, 2.0, 2.0});
    CHECK(m.clock_of_row[0] == 2);
    CHECK(m.clock_of_row[1] == 1);

    // chin_chen model: theta enters slave 1 once
    m = build_design_matrix(recs, {0.0, 0.0, 0.0}, true, DesignModel::chin_chen);
    CHECK(m.rows[1] == std::array<double, 3>{0.0, 2.0, 1.0});
}

TEST_CASE("delay column is exactly (1+eps) times the offset column") {
    std::mt19937_64 eng(3);
    auto uni = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(eng() >> 11) * 0x1.0p-53);
    };
    for (int k = 0; k < 100; ++k) {
        const auto recs = generate_corrected(
            scenario_simultaneous(1.0 + uni(-1e-3, 1e-3), uni(-0.01, 0.01),
                                  uni(0.0, 0.01), 8, uni(0.0, 1e5)));
        const double eps = uni(-1e-3, 1e-3);
        const auto m = build_design_matrix(recs, {eps, uni(0, 0.01), uni(-0.01, 0.01)},
                                           true);
        for (const auto& row : m.rows)
            CHECK(row[1] == (1.0 + eps) * row[2]);
    }
}

TEST_CASE("rank analysis: corrected model is rank 2 with tiny collinearity index") {
    const auto recs = generate_corrected(scenario_simultaneous(1.0001, 0.003, 0.002, 10));
    for (bool both : {false, true}) {
        const auto m = build_design_matrix(recs, {1e-4, 0.002, 0.003}, both);
        const auto rep = rank_analysis(m);
        CHECK(rep.numerical_rank == 2);
        CHECK(rep.collinearity_index < 1e-14);
        REQUIRE(rep.singular_values.size() == 3);
        CHECK(rep.singular_values[0] >= rep.singular_values[1]);
        CHECK(rep.singular_values[1] >= rep.singular_values[2]);
        CHECK(rep.singular_values[2] >= 0.0);
    }
}

TEST_CASE("rank analysis: chin_chen model is rank 3 with both equations") {
    const auto recs = generate_chin_chen(scenario_simultaneous(1.0001, 0.0, 0.002, 10),
                                         0.003);
    const auto m = build_design_matrix(recs, {1e-4, 0.002, 0.003}, true,
                                       DesignModel::chin_chen);
    CHECK(rank_analysis(m).numerical_rank == 3);
}

TEST_CASE("rank analysis: synthetic identity") {
    DesignMatrix m;
    m.rows = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
    m.clock_of_row = {2, 2};
    const auto rep = rank_analysis(m);
    CHECK_THAT(rep.singular_values[0], Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(rep.singular_values[1], Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK(rep.numerical_rank == 2);

    DesignMatrix empty;
    CHECK_THROWS_AS(rank_analysis(empty), std::domain_error);
}

TEST_CASE("singular values match the Gram-eigenvalue oracle") {
    // well-conditioned synthetic matrix: strict relative agreement
    DesignMatrix synth;
    std::mt19937_64 eng(17);
    auto uni = [&] { return static_cast<double>(eng() >> 11) * 0x1.0p-53 - 0.5; };
    for (int r = 0; r < 12; ++r) {
        synth.rows.push_back({uni(), uni(), uni()});
        synth.clock_of_row.push_back(2);
    }
    auto sv = rank_analysis(synth).singular_values;
    auto ev = symmetric3_eigenvalues(gram(synth));
    for (int k = 0; k < 3; ++k)
        CHECK_THAT(sv[k] * sv[k], Catch::Matchers::WithinRel(ev[k], 1e-9));

    // rank-deficient corrected-model matrix: agreement relative to the
    // largest eigenvalue (the small one sits at rounding level)
    const auto recs = generate_corrected(scenario_simultaneous(1.0001, 0.003, 0.002, 10));
    const auto m = build_design_matrix(recs, {1e-4, 0.002, 0.003}, true);
    sv = rank_analysis(m).singular_values;
    ev = symmetric3_eigenvalues(gram(m));
    for (int k = 0; k < 3; ++k)
        CHECK_THAT(sv[k] * sv[k], Catch::Matchers::WithinAbs(ev[k], 1e-9 * ev[0]));
}

TEST_CASE("fisher information is singular for the corrected model") {
    const auto recs = generate_corrected(scenario_simultaneous(1.0001, 0.003, 0.002, 10));
    const auto m = build_design_matrix(recs, {1e-4, 0.002, 0.003}, true);
    const Matrix3 f = fisher_information(m, 1e-6, 2e-6);
    const double scale = std::abs(f[0][0] * f[1][1] * f[2][2]);
    CHECK(std::abs(determinant(f)) <= 1e-12 * scale);

    // (D, theta) 2x2 sub-block is singular up to rounding
    const double sub_det = f[1][1] * f[2][2] - f[1][2] * f[2][1];
    CHECK(std::abs(sub_det) <= 1e-12 * std::abs(f[1][1] * f[2][2]));

    CHECK_THROWS_AS(fisher_information(m, 0.0), std::domain_error);
    CHECK_THROWS_AS(fisher_information(m, 1e-6, -1.0), std::domain_error);
}

TEST_CASE("fisher information is nonsingular for the chin_chen model") {
    // brute-force check on a 2-record instance
    std::vector<SyncRecord> recs = {{0, 0.0, 0.0, 0.0, 0.0}, {1, 1.0, 0.0, 2.0, 1.0}};
    const auto m = build_design_matrix(recs, {0.0, 0.0, 0.0}, true,
                                       DesignModel::chin_chen);
    const Matrix3 f = fisher_information(m, 1e-6);
    const double scale = std::abs(f[0][0] * f[1][1] * f[2][2]);
    CHECK(std::abs(determinant(f)) > 1e-6 * scale);
}

TEST_CASE("ridge scan: the ambiguity line has zero SSE, off-line grows quadratically") {
    // eps = 0, D = 2 ms, theta = -2 ms, so the line is theta = -D through 0
    const auto recs = generate_corrected(scenario_simultaneous(1.0, -0.002, 0.002, 20));
    const auto surf = ridge_scan(recs, {-0.01, 0.01}, {-0.01, 0.01}, 41);

    // three hand-picked on-line points: (d_grid[j], -d_grid[j])
    for (std::size_t j : {0u, 20u, 35u}) {
        const double d = surf.d_grid[j];
        std::size_t k_best = 0;
        for (std::size_t k = 1; k < surf.theta_grid.size(); ++k)
            if (std::abs(surf.theta_grid[k] + d) < std::abs(surf.theta_grid[k_best] + d))
                k_best = k;
        REQUIRE(std::abs(surf.theta_grid[k_best] + d) < 1e-12);
        CHECK(surf.sse[j][k_best] < 1e-18);
    }

    // perpendicular to the line the SSE is strictly positive and quadratic:
    // stepping 2 cells off the valley costs ~4x one cell
    const std::size_t j = 20; // d = 0, on-line theta index = 20
    const double s1 = surf.sse[j][22];
    const double s2 = surf.sse[j][24];
    CHECK(s1 > 0.0);
    CHECK_THAT(s2 / s1, Catch::Matchers::WithinRel(4.0, 1e-6));
}

TEST_CASE("ridge scan: single-cell surface") {
    const auto recs = generate_corrected(scenario_simultaneous(1.0, -0.002, 0.002, 20));
    const auto surf = ridge_scan(recs, {0.001, 0.001}, {0.0005, 0.0005}, 1);
    REQUIRE(surf.d_grid.size() == 1);
    REQUIRE(surf.theta_grid.size() == 1);
    CHECK(surf.sse[0][0] == profiled_sse(recs, 0.001, 0.0005));
    CHECK_THROWS_AS(ridge_scan(recs, {0, 1}, {0, 1}, 0), std::domain_error);
}

TEST_CASE("ridge scan: noisy valley slope is -(1+eps_hat)") {
    ClockScenario s = scenario_simultaneous(1.0001, 0.003, 0.002, 100);
    s.jitter = JitterModel(1e-6, 1e-6, 424242);
    const auto recs = generate_corrected(s);
    const double eps_hat = estimate_corrected(recs).epsilon_hat;

    const auto surf = ridge_scan(recs, {-0.01, 0.01}, {-0.01, 0.01}, 101);
    // for each delay, locate the SSE-minimizing offset, then fit a line
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < surf.d_grid.size(); ++j) {
        std::size_t k_best = 0;
        for (std::size_t k = 1; k < surf.theta_grid.size(); ++k)
            if (surf.sse[j][k] < surf.sse[j][k_best]) k_best = k;
        if (k_best == 0 || k_best + 1 == surf.theta_grid.size()) continue;
        // parabolic refinement of the valley floor
        const double s0 = surf.sse[j][k_best - 1], sm = surf.sse[j][k_best],
                     s2 = surf.sse[j][k_best + 1];
        const double denom = s0 - 2.0 * sm + s2;
        const double step = surf.theta_grid[1] - surf.theta_grid[0];
        const double refine = denom > 0.0 ? 0.5 * (s0 - s2) / denom * step : 0.0;
        xs.push_back(surf.d_grid[j]);
        ys.push_back(surf.theta_grid[k_best] + refine);
    }
    REQUIRE(xs.size() >= 10);
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) { mx += xs[k]; my += ys[k]; }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    const double slope = sxy / sxx;
    CHECK_THAT(slope, Catch::Matchers::WithinRel(-(1.0 + eps_hat), 1e-3));
}
