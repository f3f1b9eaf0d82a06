// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jsdm/channel_model.hpp"
#include "jsdm/rng.hpp"

namespace jsdm {

/// Lower end of the cone-parameter range for which the effective-gain bound
/// is usable: sqrt((1 + sqrt((r* - 2) / (r* - 1))) / 2), for r* >= 2.
double alpha_bar_lower(int served_beams);

/// 2 alpha sqrt(1 - alpha^2): largest coherence between unit vectors taken
/// from two distinct cones (alpha >= 1/sqrt(2)).
double cone_pair_bound(double alpha);

/// Isotropic unit vector of C^r conditioned on lying in cone `cone`
/// (|x_cone| >= alpha), by rejection. Throws ConfigError after `budget`
/// unsuccessful draws.
CVec sample_in_cone(CounterRng& rng, int served_beams, int cone, double alpha, long budget = 10'000'000);

struct ConePairCheck {
    double bound = 0.0;
    double max_observed = 0.0;
    long pairs = 0;           ///< cross-cone pairs examined
    long raw_draws = 0;
    bool inconclusive = false; ///< raw budget exhausted before filling the pools
    bool pass = false;         ///< every pair within bound + 1e-12
};

/// Rejection-samples isotropic unit vectors of C^r into the r cones until
/// each cone holds `per_cone` members (or `raw_budget` draws are spent), then
/// takes the largest |x^H y| over every pair drawn from distinct cones.
ConePairCheck cone_pair_bound_check(double alpha, int served_beams, int per_cone, std::uint64_t seed,
                                    long raw_budget = 10'000'000);

/// Law of a generalized chi-square whose CDF is replaced by
/// 1 - zeta sum_i exp(-z / lambda_i) / xi_i above z_tau and by the straight
/// line from (0, 0) to (z_tau, F(z_tau)) below.
class TruncatedTail {
public:
    TruncatedTail(std::vector<double> lambdas, double zeta, double z_tau);

    double cdf(double z) const;
    double survival(double z) const;
    /// Smallest z with cdf(z) >= p, p in (0, 1).
    double quantile(double p) const;
    /// z with survival(z) = s, accurate for s near 0.
    double upper_quantile(double s) const;
    /// lambda_1 log K - lambda_1 log log K + lambda_1 log(zeta / xi_1).
    double threshold(double K) const;
    const GenChiSquare& base() const noexcept { return base_; }
    double zeta() const noexcept { return zeta_; }
    double z_tau() const noexcept { return z_tau_; }

private:
    GenChiSquare base_;
    double zeta_;
    double z_tau_;
    double f_tau_;
};

struct TailCheck {
    double K = 0.0;
    double threshold = 0.0;
    double exceedance = 0.0; ///< empirical Pr{Z_max > threshold}
    double closed_form = 0.0; ///< 1 - F(threshold)^K
    double c = 0.0;          ///< K (1 - exceedance)
    long trials = 0;
    bool inconclusive = false; ///< threshold at or below z_tau
};

/// Draws `trials` maxima of K samples by inverting F^K (the maximum of K
/// inverse-CDF draws has the law of F^-1(U^(1/K))) and counts exceedances.
TailCheck evt_tail_check(const TruncatedTail& law, long K, long trials, std::uint64_t seed);

/// Same statistic from explicit batches of K exponential(1) samples.
TailCheck evt_exponential_batches(long K, long trials, std::uint64_t seed);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least squares of y against log log x; needs >= 3 points with x > e.
SlopeFit fit_loglog_slope(std::span<const double> x, std::span<const double> y);

/// sum_g r_g* log(1 + rho lambda_{g,1} log K') [nats].
double predicted_scaling(std::span<const GroupProfile> groups, double rho, double k_per_group);

/// min(M, sum_g r_g).
int dof_beta(std::span<const GroupProfile> groups);

} // namespace jsdm
