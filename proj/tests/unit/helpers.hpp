// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "jsdm/channel_model.hpp"
#include "jsdm/rng.hpp"

namespace jsdm::test {

inline CMat random_cmat(CounterRng& rng, Eigen::Index rows, Eigen::Index cols)
{
    CMat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            m(i, j) = rng.complex_normal();
        }
    }
    return m;
}

inline CVec random_cvec(CounterRng& rng, Eigen::Index n)
{
    return random_cmat(rng, n, 1).col(0);
}

/// Single isotropic group: identity covariance in C^r, K users.
inline GroupProfile isotropic_group(int r, int users, int id = 0)
{
    return GroupProfile::from_eigen(id, CMat::Identity(r, r), RVec::Ones(r), r, users);
}

/// Group whose channels are exactly the given effective vectors (columns of
/// `g`): identity pre-beamformer, so the sampled batch is overwritten.
inline GroupChannels channels_from(const CMat& g, const RVec& intergroup = {})
{
    GroupChannels out;
    out.served_beams = static_cast<int>(g.rows());
    out.h = g;
    out.eta = g;
    out.projections = g;
    const auto n = static_cast<std::size_t>(g.cols());
    out.effective_re.resize(n * static_cast<std::size_t>(g.rows()));
    out.effective_im.resize(out.effective_re.size());
    for (Eigen::Index j = 0; j < g.rows(); ++j) {
        for (Eigen::Index k = 0; k < g.cols(); ++k) {
            const auto idx = static_cast<std::size_t>(j) * n + static_cast<std::size_t>(k);
            out.effective_re[idx] = g(j, k).real();
            out.effective_im[idx] = g(j, k).imag();
        }
    }
    out.intergroup_power = intergroup.size() == g.cols() ? intergroup : RVec::Zero(g.cols());
    return out;
}

/// One-group batch wrapping channels_from(g).
inline ChannelBatch batch_from(const CMat& g, const RVec& intergroup = {})
{
    ChannelBatch b;
    b.groups.push_back(channels_from(g, intergroup));
    b.beam_offsets = {0};
    b.total_beams = static_cast<int>(g.rows());
    return b;
}

} // namespace jsdm::test
