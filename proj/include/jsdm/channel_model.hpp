// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "jsdm/kernels/kernels.hpp"
#include "jsdm/types.hpp"

namespace jsdm {

/// One-ring scattering around the user seen from a ULA.
struct OneRing {
    double aoa = 0.0;     ///< mean angle of arrival [rad]
    double spread = 0.0;  ///< half-width of the angular spread [rad], > 0
    double spacing = 0.5; ///< antenna spacing in carrier wavelengths
};

/// [R]_{ij} = nu^{|i-j|}, 0 <= nu <= 1.
struct ExpCorrelation {
    double nu = 0.0;
};

/// R = U diag(eigenvalues) U^H with U = consecutive columns of the unitary
/// M-point DFT matrix, starting at (0-based) column `first`.
struct DftColumns {
    int first = 0;
    std::vector<double> eigenvalues;
};

struct CovarianceSpec {
    int antennas = 0;
    std::variant<OneRing, ExpCorrelation, DftColumns> model;
};

/// Unitary DFT matrix, F(m, n) = exp(-2 pi i m n / M) / sqrt(M).
CMat dft_matrix(int m);

/// Covariance for `spec`. Throws ConfigError on invalid parameters and
/// InvariantError if the result is not Hermitian to 1e-12.
CMat build_covariance(const CovarianceSpec& spec);

struct EigenPairs {
    CMat vectors; ///< M x r, orthonormal columns
    RVec values;  ///< r, descending
};

/// Dominant r eigenpairs of a Hermitian PSD matrix, descending. Each
/// eigenvector is rotated so its largest-magnitude entry is real positive;
/// eigenvalues tied within 1e-12 are ordered by the position of that entry.
/// Throws ConfigError when r exceeds the numerical rank.
EigenPairs eig_truncate(const CMat& R, int r);

/// Number of eigenvalues above rel_tol * lambda_max.
int numerical_rank(const CMat& R, double rel_tol = 1e-9);

/// Statistics of one user group: covariance eigenstructure, served-beam count
/// and the pre-beamformer V_g (the first r* eigenvectors).
class GroupProfile {
public:
    /// Validates orthonormality of `eigvecs`, positive non-increasing
    /// `eigvals` and 1 <= served_beams <= rank. `large_scale` is either empty
    /// (all users gain 1) or one positive power gain per user.
    static GroupProfile from_eigen(int id, CMat eigvecs, RVec eigvals, int served_beams, int users,
                                   std::vector<double> large_scale = {});

    /// Builds the eigenstructure from a covariance spec. rank == 0 keeps the
    /// full numerical rank. DftColumns uses the DFT columns directly.
    static GroupProfile from_covariance(int id, const CovarianceSpec& spec, int rank, int served_beams,
                                        int users, std::vector<double> large_scale = {});

    int id() const noexcept { return id_; }
    int antennas() const noexcept { return static_cast<int>(eigvecs_.rows()); }
    int rank() const noexcept { return static_cast<int>(eigvecs_.cols()); }
    int served_beams() const noexcept { return served_beams_; }
    int users() const noexcept { return users_; }
    const CMat& eigvecs() const noexcept { return eigvecs_; }
    const RVec& eigvals() const noexcept { return eigvals_; }
    const CMat& prebeamformer() const noexcept { return prebeamformer_; }
    double large_scale(int user) const noexcept
    {
        return large_scale_.empty() ? 1.0 : large_scale_[static_cast<std::size_t>(user)];
    }
    /// Covariance reconstructed as U Lambda U^H.
    CMat covariance() const;

private:
    GroupProfile() = default;

    int id_ = 0;
    int served_beams_ = 0;
    int users_ = 0;
    CMat eigvecs_;
    RVec eigvals_;
    CMat prebeamformer_;
    std::vector<double> large_scale_;
};

/// One Monte Carlo draw of every user of one group.
struct GroupChannels {
    int served_beams = 0;
    CMat eta;               ///< r_g x K_g latent coefficients
    CMat h;                 ///< M x K_g full channels
    CMat projections;       ///< (sum of r*) x K_g, V_all^H h (every group's pre-beamformer)
    std::vector<double> effective_re; ///< planar K_g x r*: g = V_g^H h
    std::vector<double> effective_im;
    RVec intergroup_power;  ///< sum over g' != g of ||h^H V_g'||^2

    int users() const noexcept { return static_cast<int>(h.cols()); }
    CVec effective(int user) const;
    kernels::PlanarView effective_view() const noexcept
    {
        return {effective_re.data(), effective_im.data(), static_cast<std::size_t>(users()),
                static_cast<std::size_t>(served_beams)};
    }
};

struct ChannelBatch {
    std::vector<GroupChannels> groups;
    std::vector<int> beam_offsets; ///< row offset of each group's block in `projections`
    int total_beams = 0;
};

/// Samples every user of every group. eta ~ CN(0, I) from one counter-based
/// stream per (seed, group, user), so the batch depends only on the seed.
ChannelBatch sample_channels(std::span<const GroupProfile> groups, std::uint64_t seed);

/// Law of sum_i lambda_i |X_i|^2 with X_i iid CN(0,1) and distinct lambdas.
class GenChiSquare {
public:
    /// lambdas must be positive and strictly decreasing (relative gap > 1e-9).
    explicit GenChiSquare(std::vector<double> lambdas);

    std::span<const double> lambdas() const noexcept { return lambdas_; }
    /// Partial-fraction constants xi_i = prod_{j != i} (1 - lambda_j / lambda_i).
    std::span<const double> xi() const noexcept { return xi_; }

    double cdf(double z) const;
    double ccdf(double z) const;
    double pdf(double z) const;

private:
    std::vector<double> lambdas_;
    std::vector<double> xi_;
};

double gen_chi_square_cdf(const GenChiSquare& d, double z);

} // namespace jsdm
