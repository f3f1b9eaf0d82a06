// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "jsdm/beamforming.hpp"

using namespace jsdm;
using jsdm::test::random_cmat;

namespace {

GroupProfile dft_group(int id, int m, int first, std::vector<double> ev, int served)
{
    return GroupProfile::from_covariance(id, {m, DftColumns{first, std::move(ev)}}, 0, served, 1);
}

double wf_objective(std::span<const double> a, std::span<const double> q)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::log1p(a[i] * q[i]);
    }
    return s;
}

/// Coarse-to-fine grid search over the simplex {q >= 0, sum q = budget} for
/// two or three streams.
double grid_optimum(std::span<const double> a, double budget)
{
    double best = -1.0;
    double lo0 = 0.0, hi0 = budget, lo1 = 0.0, hi1 = budget;
    double b0 = 0.0, b1 = 0.0;
    for (int level = 0; level < 12; ++level) {
        const int n = 60;
        for (int i = 0; i <= n; ++i) {
            const double q0 = lo0 + (hi0 - lo0) * i / n;
            for (int j = 0; j <= (a.size() == 3 ? n : 0); ++j) {
                const double q1 = a.size() == 3 ? lo1 + (hi1 - lo1) * j / n : budget - q0;
                const double rest = budget - q0 - (a.size() == 3 ? q1 : 0.0);
                if (q0 < 0 || q1 < 0 || rest < -1e-15) {
                    continue;
                }
                std::vector<double> q{q0, q1};
                if (a.size() == 3) {
                    q.push_back(std::max(rest, 0.0));
                }
                const double v = wf_objective(a, q);
                if (v > best) {
                    best = v;
                    b0 = q0;
                    b1 = q1;
                }
            }
        }
        const double w0 = (hi0 - lo0) / n * 4, w1 = (hi1 - lo1) / n * 4;
        lo0 = std::max(0.0, b0 - w0);
        hi0 = std::min(budget, b0 + w0);
        lo1 = std::max(0.0, b1 - w1);
        hi1 = std::min(budget, b1 + w1);
    }
    return best;
}

} // namespace

TEST_CASE("block-diagonalization check")
{
    SUBCASE("disjoint DFT supports pass with zero residual")
    {
        const std::vector<GroupProfile> g{dft_group(0, 4, 0, {1, .7, .49}, 2), dft_group(1, 4, 2, {1, .7}, 2)};
        const auto rep = check_approx_bd(g, 1e-9);
        REQUIRE(rep.size() == 2);
        for (const auto& r : rep) {
            CHECK(r.pass);
            CHECK(r.residual < 1e-12);
        }
    }
    SUBCASE("shared DFT column fails with residual one")
    {
        const std::vector<GroupProfile> g{dft_group(0, 4, 0, {1, .7}, 2), dft_group(1, 4, 1, {1, .7}, 2)};
        const auto rep = check_approx_bd(g, 0.1);
        CHECK_FALSE(rep[0].pass);
        CHECK(rep[0].residual == doctest::Approx(1.0));
    }
}

TEST_CASE("zero-forcing precoder")
{
    SUBCASE("identity selection")
    {
        const ZfPrecoder zf = zf_precoder(CMat::Identity(3, 3));
        CHECK((zf.directions - CMat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(zf.gains.isApprox(RVec::Ones(3)));
        CHECK(zf.condition == doctest::Approx(1.0));
    }
    SUBCASE("orthogonal rows give the row energies as gains")
    {
        CMat G = CMat::Zero(2, 3);
        G(0, 0) = cplx{3.0, 4.0};
        G(1, 2) = cplx{0.0, -2.0};
        const ZfPrecoder zf = zf_precoder(G);
        CHECK(zf.gains(0) == doctest::Approx(25.0));
        CHECK(zf.gains(1) == doctest::Approx(4.0));
    }
    SUBCASE("two-user gains match the explicit 2x2 inverse")
    {
        CounterRng rng(3);
        for (int rep = 0; rep < 100; ++rep) {
            const CMat G = random_cmat(rng, 2, 4);
            const CMat A = G * G.adjoint();
            const cplx det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
            // inv = adj(A) / det; diagonal entries are A11/det and A00/det.
            const double inv00 = (A(1, 1) / det).real();
            const double inv11 = (A(0, 0) / det).real();
            const ZfPrecoder zf = zf_precoder(G);
            CHECK(zf.gains(0) == doctest::Approx(1.0 / inv00).epsilon(1e-10));
            CHECK(zf.gains(1) == doctest::Approx(1.0 / inv11).epsilon(1e-10));
        }
    }
    SUBCASE("precoder diagonalizes random selections")
    {
        CounterRng rng(17);
        for (int rep = 0; rep < 1000; ++rep) {
            const int r = 2 + rep % 4;
            const int s = 1 + rep % r;
            const CMat G = random_cmat(rng, s, r);
            const ZfPrecoder zf = zf_precoder(G);
            const CMat D = G * zf.directions;
            CHECK((D - CMat::Identity(s, s)).cwiseAbs().maxCoeff() < 1e-9);
            for (int i = 0; i < s; ++i) {
                CHECK(zf.gains(i) == doctest::Approx(1.0 / zf.directions.col(i).squaredNorm()).epsilon(1e-10));
                // ZF gain never exceeds the channel energy.
                CHECK(zf.gains(i) <= G.row(i).squaredNorm() * (1 + 1e-12));
            }
        }
    }
    SUBCASE("rank-deficient selections are reported")
    {
        CMat G(2, 2);
        G << 1.0, 0.0, 2.0, 0.0;
        try {
            zf_precoder(G);
            FAIL("expected RankDeficientError");
        } catch (const RankDeficientError& e) {
            REQUIRE(e.offending_rows().size() == 2);
            // Null direction of G G^H is (2, -1) / sqrt(5).
            CHECK(e.offending_rows()[0] == 0);
            CHECK(e.offending_rows()[1] == 1);
        }
        CHECK_THROWS_AS(zf_precoder(CMat::Identity(3, 2)), RankDeficientError);
    }
    SUBCASE("ill-conditioned but admissible selections still invert exactly")
    {
        CMat G(2, 2);
        G << 1.0, 0.0, 1.0, 1e-7;
        const ZfPrecoder zf = zf_precoder(G);
        CHECK(zf.condition > kCholeskyCondition);
        CHECK(zf.condition < kMaxZfCondition);
        CHECK(((G * zf.directions) - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(zf.gains(1) == doctest::Approx(1e-14).epsilon(1e-6));
    }
}

TEST_CASE("Gershgorin gain bound")
{
    CHECK(gershgorin_gain_bound(1.0, 4) == doctest::Approx(1.0));
    CHECK(gershgorin_gain_bound(std::sqrt(0.5), 2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(gershgorin_gain_bound(0.8, 2) == doctest::Approx(1.0 - 2 * 0.8 * 0.6));
    CHECK(gershgorin_gain_bound(0.8, 8) == 0.0);
    CHECK_THROWS_AS(gershgorin_gain_bound(0.6, 2), ConfigError);

    SUBCASE("holds for users drawn from distinct cones")
    {
        CounterRng rng(23);
        const double alpha = 0.8;
        const double bound = gershgorin_gain_bound(alpha, 2);
        int drawn = 0;
        while (drawn < 2000) {
            CMat G(2, 2);
            for (int i = 0; i < 2; ++i) {
                CVec g;
                do {
                    g = jsdm::test::random_cvec(rng, 2);
                } while (std::norm(g(i)) < alpha * alpha * g.squaredNorm());
                G.row(i) = g.adjoint();
            }
            const ZfPrecoder zf = zf_precoder(G);
            for (int i = 0; i < 2; ++i) {
                CHECK(zf.gains(i) >= bound * G.row(i).squaredNorm() * (1 - 1e-12));
            }
            ++drawn;
        }
    }
}

TEST_CASE("power allocation")
{
    ZfPrecoder zf = zf_precoder(CMat(CMat::Identity(3, 3) * 2.0));
    const std::vector<double> noise{1.0, 2.0, 4.0};

    SUBCASE("equal power spends the budget evenly")
    {
        allocate_power(zf, noise, 3.0, PowerMode::Equal);
        for (int i = 0; i < 3; ++i) {
            CHECK(zf.powers(i) / zf.gains(i) == doctest::Approx(1.0));
        }
        CHECK(zf.scaled().squaredNorm() == doctest::Approx(3.0));
    }
    SUBCASE("water-filling keeps the budget tight")
    {
        allocate_power(zf, noise, 3.0, PowerMode::WaterFill);
        double spent = 0.0;
        for (int i = 0; i < 3; ++i) {
            CHECK(zf.powers(i) >= 0.0);
            spent += zf.powers(i) / zf.gains(i);
        }
        CHECK(spent == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(zf.scaled().squaredNorm() == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("argument checks")
    {
        CHECK_THROWS_AS(allocate_power(zf, std::vector<double>{1.0}, 3.0, PowerMode::Equal), ConfigError);
        CHECK_THROWS_AS(allocate_power(zf, noise, 0.0, PowerMode::Equal), ConfigError);
    }
}

TEST_CASE("water-filling")
{
    SUBCASE("equal gains split evenly")
    {
        const auto q = water_fill(std::vector<double>{1.0, 1.0}, 2.0);
        CHECK(q[0] == doctest::Approx(1.0));
        CHECK(q[1] == doctest::Approx(1.0));
    }
    SUBCASE("weak stream is switched off below the water level")
    {
        // Water level 1 + 1/1 = 2 < 1/0.01, so the second stream stays dry.
        const auto q = water_fill(std::vector<double>{1.0, 0.01}, 1.0);
        CHECK(q[0] == doctest::Approx(1.0));
        CHECK(q[1] == 0.0);
    }
    SUBCASE("closed form with both streams active")
    {
        // q_i = mu - 1/a_i, mu = (3 + 1 + 0.5) / 2.
        const auto q = water_fill(std::vector<double>{1.0, 2.0}, 3.0);
        CHECK(q[0] == doctest::Approx(2.25 - 1.0));
        CHECK(q[1] == doctest::Approx(2.25 - 0.5));
    }
    SUBCASE("beats random feasible allocations and matches a grid search")
    {
        CounterRng rng(31);
        for (int rep = 0; rep < 200; ++rep) {
            const std::size_t n = 2 + static_cast<std::size_t>(rep % 2);
            std::vector<double> a(n);
            for (auto& x : a) {
                x = std::exp(3.0 * (rng.uniform() - 0.5) * 2.0);
            }
            const double budget = 0.1 + 5.0 * rng.uniform();
            const auto q = water_fill(a, budget);
            CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(budget).epsilon(1e-12));
            const double opt = wf_objective(a, q);
            for (int t = 0; t < 20; ++t) {
                std::vector<double> r(n);
                double s = 0.0;
                for (auto& x : r) {
                    x = -std::log(rng.uniform());
                    s += x;
                }
                for (auto& x : r) {
                    x *= budget / s;
                }
                CHECK(wf_objective(a, r) <= opt + 1e-12);
            }
            CHECK(std::abs(opt - grid_optimum(a, budget)) < 1e-9 * opt);
        }
    }
}

namespace {

/// Determinant by cofactor expansion along the first row.
cplx cofactor_det(const CMat& A)
{
    const Eigen::Index n = A.rows();
    if (n == 1) {
        return A(0, 0);
    }
    cplx det = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        CMat minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r) {
            for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
                if (c != j) {
                    minor(r - 1, cc++) = A(r, c);
                }
            }
        }
        det += (j % 2 == 0 ? 1.0 : -1.0) * A(0, j) * cofactor_det(minor);
    }
    return det;
}

/// Diagonal entry (i, i) of the inverse: cofactor C_ii / det.
cplx inverse_diagonal(const CMat& A, Eigen::Index i)
{
    const Eigen::Index n = A.rows();
    CMat minor(n - 1, n - 1);
    for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
        if (r == i) {
            continue;
        }
        for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
            if (c != i) {
                minor(rr, cc++) = A(r, c);
            }
        }
        ++rr;
    }
    return cofactor_det(minor) / cofactor_det(A);
}

} // namespace

TEST_CASE("four-user ZF gains match a cofactor-expansion inverse")
{
    CounterRng rng(41);
    for (int rep = 0; rep < 50; ++rep) {
        const CMat G = random_cmat(rng, 4, 4);
        const ZfPrecoder zf = zf_precoder(G);
        if (zf.condition > 100.0) {
            continue;
        }
        const CMat A = G * G.adjoint();
        for (Eigen::Index i = 0; i < 4; ++i) {
            CHECK(std::abs(zf.gains(i) - 1.0 / inverse_diagonal(A, i).real()) < 1e-9 * zf.gains(i));
        }
    }
}

TEST_CASE("additional block-diagonalization and bound examples")
{
    const std::vector<GroupProfile> same{dft_group(0, 4, 0, {1, .7}, 2), dft_group(1, 4, 0, {1, .7}, 2)};
    const auto rep = check_approx_bd(same, 1e-9);
    CHECK_FALSE(rep[0].pass);
    CHECK(rep[0].residual == doctest::Approx(1.0));
    CHECK(gershgorin_gain_bound(0.96, 4) == 0.0);
}

TEST_CASE("additional power allocation examples")
{
    SUBCASE("one user fills the budget")
    {
        CMat G(1, 1);
        G(0, 0) = std::sqrt(2.0);
        ZfPrecoder zf = zf_precoder(G);
        REQUIRE(zf.gains(0) == doctest::Approx(2.0));
        allocate_power(zf, std::vector<double>{1.0}, 4.0, PowerMode::WaterFill);
        CHECK(zf.powers(0) == doctest::Approx(8.0));
    }
    SUBCASE("symmetric users: water-filling equals equal power")
    {
        ZfPrecoder a = zf_precoder(CMat::Identity(3, 3));
        ZfPrecoder b = a;
        const std::vector<double> n{2.0, 2.0, 2.0};
        allocate_power(a, n, 3.0, PowerMode::Equal);
        allocate_power(b, n, 3.0, PowerMode::WaterFill);
        CHECK((a.powers - b.powers).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("weak user gets no power")
    {
        ZfPrecoder zf = zf_precoder(CMat::Identity(2, 2));
        allocate_power(zf, std::vector<double>{1.0, 100.0}, 2.0, PowerMode::WaterFill);
        CHECK(zf.powers(0) == doctest::Approx(2.0));
        CHECK(zf.powers(1) == 0.0);
        const std::vector<double> a{1.0, 0.01};
        CHECK(wf_objective(a, std::vector<double>{2.0, 0.0}) == doctest::Approx(grid_optimum(a, 2.0)).epsilon(1e-9));
    }
}
