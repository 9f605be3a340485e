#pragma once

#include <Eigen/Core>

namespace reflex::dpo {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/**
 * One sampled denoising chain, stored as its T+1 latents.
 *
 * Row k is the state latent fed to step k and row k+1 is that step's action,
 * so "state k+1 equals action k" holds by construction.
 */
template <typename Scalar>
struct BasicTrajectory {
    RowMatrix<Scalar> latents;

    Eigen::Index steps() const noexcept { return latents.rows() > 0 ? latents.rows() - 1 : 0; }
    Eigen::Index dim() const noexcept { return latents.cols(); }

    auto state(Eigen::Index k) const { return latents.row(k); }
    auto action(Eigen::Index k) const { return latents.row(k + 1); }
    auto final_latent() const { return latents.row(latents.rows() - 1); }

    template <typename Other>
    BasicTrajectory<Other> cast() const {
        return {latents.template cast<Other>()};
    }

    friend bool operator==(const BasicTrajectory& a, const BasicTrajectory& b) {
        return a.latents.rows() == b.latents.rows() && a.latents.cols() == b.latents.cols() &&
               (a.latents.array() == b.latents.array()).all();
    }
};

using DenoisingTrajectory = BasicTrajectory<double>;

} // namespace reflex::dpo
