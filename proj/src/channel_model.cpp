// SPDX-License-Identifier: Apache-2.0
#include "jsdm/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "jsdm/rng.hpp"

namespace jsdm {
namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kQuadTol = 1e-10;
constexpr int kGaussOrder = 10;

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Golub-Welsch on the Legendre Jacobi matrix.
const GaussRule& gauss_legendre()
{
    static const GaussRule rule = [] {
        Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(kGaussOrder, kGaussOrder);
        for (int i = 1; i < kGaussOrder; ++i) {
            const double b = i / std::sqrt(4.0 * i * i - 1.0);
            jacobi(i, i - 1) = b;
            jacobi(i - 1, i) = b;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
        GaussRule r;
        for (int i = 0; i < kGaussOrder; ++i) {
            r.nodes.push_back(es.eigenvalues()(i));
            const double v0 = es.eigenvectors()(0, i);
            r.weights.push_back(2.0 * v0 * v0);
        }
        return r;
    }();
    return rule;
}

template <typename F>
cplx gauss_panel(const F& f, double a, double b)
{
    const GaussRule& rule = gauss_legendre();
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return acc * half;
}

template <typename F>
cplx adaptive_gauss(const F& f, double a, double b, cplx whole, double tol, int depth)
{
    const double mid = 0.5 * (a + b);
    const cplx left = gauss_panel(f, a, mid);
    const cplx right = gauss_panel(f, mid, b);
    if (depth <= 0 || std::abs(left + right - whole) <= tol) {
        return left + right;
    }
    return adaptive_gauss(f, a, mid, left, 0.5 * tol, depth - 1) +
           adaptive_gauss(f, mid, b, right, 0.5 * tol, depth - 1);
}

CMat one_ring(int m, const OneRing& p)
{
    if (!(p.spread > 0.0)) {
        throw ConfigError("one-ring angular spread must be positive");
    }
    CMat r(m, m);
    std::vector<cplx> lag(static_cast<std::size_t>(m));
    for (int d = 0; d < m; ++d) {
        auto f = [&](double w) {
            const double phase = -2.0 * std::numbers::pi * d * p.spacing * std::sin(w);
            return cplx{std::cos(phase), std::sin(phase)};
        };
        const double a = p.aoa - p.spread;
        const double b = p.aoa + p.spread;
        const cplx integral = adaptive_gauss(f, a, b, gauss_panel(f, a, b), kQuadTol, 40);
        lag[static_cast<std::size_t>(d)] = d == 0 ? cplx{1.0, 0.0} : integral / (2.0 * p.spread);
    }
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const cplx v = lag[static_cast<std::size_t>(std::abs(i - j))];
            r(i, j) = i >= j ? v : std::conj(v);
        }
    }
    return r;
}

CMat exp_correlation(int m, const ExpCorrelation& p)
{
    if (!(p.nu >= 0.0 && p.nu <= 1.0)) {
        throw ConfigError("exponential correlation factor must lie in [0, 1]");
    }
    CMat r(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            r(i, j) = i == j ? 1.0 : std::pow(p.nu, std::abs(i - j));
        }
    }
    return r;
}

void check_eigenvalues(const RVec& values, bool strict)
{
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (!(values(i) > 0.0)) {
            throw ConfigError("covariance eigenvalues must be positive");
        }
        if (i > 0) {
            const double gap = values(i - 1) - values(i);
            if (gap < -1e-9 * values(i - 1) || (strict && gap <= 1e-9 * values(i - 1))) {
                throw ConfigError(strict ? "eigenvalues must be strictly decreasing"
                                         : "eigenvalues must be non-increasing");
            }
        }
    }
}

CMat dft_block(int m, const DftColumns& p)
{
    const int count = static_cast<int>(p.eigenvalues.size());
    if (count == 0 || p.first < 0 || p.first + count > m) {
        throw ConfigError("DFT column range outside the antenna dimension");
    }
    return dft_matrix(m).middleCols(p.first, count);
}

} // namespace

CMat dft_matrix(int m)
{
    CMat f(m, m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            // Reduce the exponent modulo m first so large products stay exact.
            const long long e = (static_cast<long long>(r) * c) % m;
            const double phase = -2.0 * std::numbers::pi * static_cast<double>(e) / m;
            f(r, c) = scale * cplx{std::cos(phase), std::sin(phase)};
        }
    }
    return f;
}

CMat build_covariance(const CovarianceSpec& spec)
{
    const int m = spec.antennas;
    if (m <= 0) {
        throw ConfigError("antenna count must be positive");
    }
    CMat r = std::visit(
        [m](const auto& p) -> CMat {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, OneRing>) {
                return one_ring(m, p);
            } else if constexpr (std::is_same_v<T, ExpCorrelation>) {
                return exp_correlation(m, p);
            } else {
                check_eigenvalues(Eigen::Map<const RVec>(p.eigenvalues.data(),
                                                         static_cast<Eigen::Index>(p.eigenvalues.size())),
                                  false);
                const CMat u = dft_block(m, p);
                RVec lam = Eigen::Map<const RVec>(p.eigenvalues.data(),
                                                  static_cast<Eigen::Index>(p.eigenvalues.size()));
                CMat out = u * lam.asDiagonal() * u.adjoint();
                return 0.5 * (out + out.adjoint());
            }
        },
        spec.model);
    if ((r - r.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
        throw InvariantError("covariance is not Hermitian");
    }
    return r;
}

EigenPairs eig_truncate(const CMat& R, int r)
{
    const Eigen::Index m = R.rows();
    if (R.cols() != m || r <= 0 || r > m) {
        throw ConfigError("eig_truncate: requested rank outside [1, M]");
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(R);
    if (es.info() != Eigen::Success) {
        throw InvariantError("eigendecomposition failed");
    }
    const RVec& asc = es.eigenvalues();
    const double top = asc(m - 1);

    struct Pair {
        double value;
        Eigen::Index peak;
        CVec vec;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = m - 1; i >= 0; --i) {
        CVec v = es.eigenvectors().col(i);
        Eigen::Index peak = 0;
        v.cwiseAbs().maxCoeff(&peak);
        const cplx phase = v(peak) / std::abs(v(peak));
        v *= std::conj(phase);
        v(peak) = std::abs(v(peak));
        pairs.push_back({asc(i), peak, std::move(v)});
    }
    const double tie = 1e-12 * std::max(std::abs(top), 1.0);
    std::stable_sort(pairs.begin(), pairs.end(), [tie](const Pair& a, const Pair& b) {
        if (std::abs(a.value - b.value) <= tie) {
            return a.peak < b.peak;
        }
        return a.value > b.value;
    });

    if (!(pairs[static_cast<std::size_t>(r - 1)].value > 1e-9 * top)) {
        throw ConfigError("eig_truncate: requested rank exceeds the numerical rank");
    }
    EigenPairs out{CMat(m, r), RVec(r)};
    for (int i = 0; i < r; ++i) {
        out.vectors.col(i) = pairs[static_cast<std::size_t>(i)].vec;
        out.values(i) = pairs[static_cast<std::size_t>(i)].value;
    }
    return out;
}

int numerical_rank(const CMat& R, double rel_tol)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(R, Eigen::EigenvaluesOnly);
    const RVec& v = es.eigenvalues();
    const double top = v.maxCoeff();
    if (!(top > 0.0)) {
        return 0;
    }
    return static_cast<int>((v.array() > rel_tol * top).count());
}

GroupProfile GroupProfile::from_eigen(int id, CMat eigvecs, RVec eigvals, int served_beams, int users,
                                      std::vector<double> large_scale)
{
    const Eigen::Index r = eigvecs.cols();
    if (r == 0 || eigvals.size() != r) {
        throw ConfigError("group profile: eigenvector/eigenvalue count mismatch");
    }
    if ((eigvecs.adjoint() * eigvecs - CMat::Identity(r, r)).cwiseAbs().maxCoeff() > 1e-10) {
        throw ConfigError("group profile: eigenvectors are not orthonormal");
    }
    check_eigenvalues(eigvals, false);
    if (served_beams < 1 || served_beams > r) {
        throw ConfigError("group profile: served beams must lie in [1, rank]");
    }
    if (users < 0) {
        throw ConfigError("group profile: negative user count");
    }
    if (!large_scale.empty()) {
        if (static_cast<int>(large_scale.size()) != users) {
            throw ConfigError("group profile: one large-scale gain per user required");
        }
        for (double l : large_scale) {
            if (!(l > 0.0)) {
                throw ConfigError("group profile: large-scale gains must be positive");
            }
        }
    }
    GroupProfile p;
    p.id_ = id;
    p.served_beams_ = served_beams;
    p.users_ = users;
    p.prebeamformer_ = eigvecs.leftCols(served_beams);
    p.eigvecs_ = std::move(eigvecs);
    p.eigvals_ = std::move(eigvals);
    p.large_scale_ = std::move(large_scale);
    return p;
}

GroupProfile GroupProfile::from_covariance(int id, const CovarianceSpec& spec, int rank, int served_beams,
                                           int users, std::vector<double> large_scale)
{
    if (const auto* dft = std::get_if<DftColumns>(&spec.model)) {
        const CMat u = dft_block(spec.antennas, *dft);
        RVec lam = Eigen::Map<const RVec>(dft->eigenvalues.data(),
                                          static_cast<Eigen::Index>(dft->eigenvalues.size()));
        const int keep = rank == 0 ? static_cast<int>(lam.size()) : rank;
        if (keep > lam.size()) {
            throw ConfigError("group profile: rank exceeds the number of DFT columns");
        }
        return from_eigen(id, u.leftCols(keep), lam.head(keep), served_beams, users, std::move(large_scale));
    }
    const CMat r = build_covariance(spec);
    const int keep = rank == 0 ? numerical_rank(r) : rank;
    EigenPairs e = eig_truncate(r, keep);
    return from_eigen(id, std::move(e.vectors), std::move(e.values), served_beams, users,
                      std::move(large_scale));
}

CMat GroupProfile::covariance() const
{
    return eigvecs_ * eigvals_.asDiagonal() * eigvecs_.adjoint();
}

CVec GroupChannels::effective(int user) const
{
    CVec g(served_beams);
    const auto k = static_cast<std::size_t>(user);
    const auto n = static_cast<std::size_t>(users());
    for (int j = 0; j < served_beams; ++j) {
        const auto idx = static_cast<std::size_t>(j) * n + k;
        g(j) = cplx{effective_re[idx], effective_im[idx]};
    }
    return g;
}

ChannelBatch sample_channels(std::span<const GroupProfile> groups, std::uint64_t seed)
{
    ChannelBatch batch;
    if (groups.empty()) {
        return batch;
    }
    const int m = groups.front().antennas();
    for (const GroupProfile& g : groups) {
        if (g.antennas() != m) {
            throw ConfigError("all groups must share the antenna count");
        }
        batch.beam_offsets.push_back(batch.total_beams);
        batch.total_beams += g.served_beams();
    }
    CMat stacked(m, batch.total_beams);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        stacked.middleCols(batch.beam_offsets[gi], groups[gi].served_beams()) = groups[gi].prebeamformer();
    }
    const CMat stacked_h = stacked.adjoint();

    batch.groups.reserve(groups.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const GroupProfile& prof = groups[gi];
        const int users = prof.users();
        const int rank = prof.rank();
        GroupChannels out;
        out.served_beams = prof.served_beams();
        out.eta.resize(rank, users);
        CMat scaled(rank, users);
        const RVec sqrt_lambda = prof.eigvals().cwiseSqrt();
        for (int k = 0; k < users; ++k) {
            CounterRng rng(derive_key(seed, {static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(k)}));
            const double amp = std::sqrt(prof.large_scale(k));
            for (int j = 0; j < rank; ++j) {
                out.eta(j, k) = rng.complex_normal();
                scaled(j, k) = amp * sqrt_lambda(j) * out.eta(j, k);
            }
        }
        out.h = prof.eigvecs() * scaled;
        out.projections = stacked_h * out.h;

        const int own = batch.beam_offsets[gi];
        const int rs = prof.served_beams();
        const auto n = static_cast<std::size_t>(users);
        out.effective_re.resize(n * static_cast<std::size_t>(rs));
        out.effective_im.resize(n * static_cast<std::size_t>(rs));
        out.intergroup_power = RVec::Zero(users);
        for (int k = 0; k < users; ++k) {
            double inter = 0.0;
            for (int row = 0; row < batch.total_beams; ++row) {
                const cplx v = out.projections(row, k);
                if (row >= own && row < own + rs) {
                    const auto idx = static_cast<std::size_t>(row - own) * n + static_cast<std::size_t>(k);
                    out.effective_re[idx] = v.real();
                    out.effective_im[idx] = v.imag();
                } else {
                    inter += std::norm(v);
                }
            }
            out.intergroup_power(k) = inter;
        }
        batch.groups.push_back(std::move(out));
    }
    return batch;
}

GenChiSquare::GenChiSquare(std::vector<double> lambdas) : lambdas_(std::move(lambdas))
{
    if (lambdas_.empty()) {
        throw ConfigError("generalized chi-square needs at least one weight");
    }
    check_eigenvalues(Eigen::Map<const RVec>(lambdas_.data(), static_cast<Eigen::Index>(lambdas_.size())), true);
    xi_.resize(lambdas_.size());
    for (std::size_t i = 0; i < lambdas_.size(); ++i) {
        double prod = 1.0;
        for (std::size_t j = 0; j < lambdas_.size(); ++j) {
            if (j != i) {
                prod *= 1.0 - lambdas_[j] / lambdas_[i];
            }
        }
        xi_[i] = prod;
    }
}

double GenChiSquare::cdf(double z) const
{
    if (z <= 0.0) {
        return 0.0;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < lambdas_.size(); ++i) {
        acc += -std::expm1(-z / lambdas_[i]) / xi_[i];
    }
    if (acc < 0.0 && acc > -1e-12) {
        acc = 0.0;
    } else if (acc > 1.0 && acc < 1.0 + 1e-12) {
        acc = 1.0;
    }
    return acc;
}

double GenChiSquare::ccdf(double z) const
{
    if (z <= 0.0) {
        return 1.0;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < lambdas_.size(); ++i) {
        acc += std::exp(-z / lambdas_[i]) / xi_[i];
    }
    return std::clamp(acc, 0.0, 1.0);
}

double GenChiSquare::pdf(double z) const
{
    if (z < 0.0) {
        return 0.0;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < lambdas_.size(); ++i) {
        acc += std::exp(-z / lambdas_[i]) / (lambdas_[i] * xi_[i]);
    }
    return acc;
}

double gen_chi_square_cdf(const GenChiSquare& d, double z)
{
    if (z < 0.0) {
        throw ConfigError("gen_chi_square_cdf: z must be non-negative");
    }
    return d.cdf(z);
}

} // namespace jsdm
