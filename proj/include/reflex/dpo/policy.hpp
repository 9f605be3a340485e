#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>

#include <Eigen/Core>

#include "reflex/core/error.hpp"
#include "reflex/core/rng.hpp"
#include "reflex/dpo/trajectory.hpp"

namespace reflex::dpo {

/// Step structure of the denoising MDP: step k maps x to c_k x + b_k + sigma_k eps.
template <typename Scalar>
struct DiffusionSchedule {
    Vector<Scalar> sigma;
    Vector<Scalar> drift;

    Eigen::Index steps() const noexcept { return sigma.size(); }

    template <typename Other>
    DiffusionSchedule<Other> cast() const {
        return {sigma.template cast<Other>(), drift.template cast<Other>()};
    }

    friend bool operator==(const DiffusionSchedule& a, const DiffusionSchedule& b) {
        return a.sigma.size() == b.sigma.size() && a.drift.size() == b.drift.size() &&
               (a.sigma.array() == b.sigma.array()).all() && (a.drift.array() == b.drift.array()).all();
    }
};

/// Gaussian denoising policy pi(a | s_k) = N(c_k x + b_k, sigma_k^2 I).
/// The per-step biases are the learnable parameters.
template <typename Scalar>
struct PolicyParams {
    RowMatrix<Scalar> bias; // T x d
    DiffusionSchedule<Scalar> schedule;

    Eigen::Index steps() const noexcept { return bias.rows(); }
    Eigen::Index dim() const noexcept { return bias.cols(); }

    template <typename Other>
    PolicyParams<Other> cast() const {
        return {bias.template cast<Other>(), schedule.template cast<Other>()};
    }

    friend bool operator==(const PolicyParams& a, const PolicyParams& b) {
        return a.schedule == b.schedule && a.bias.rows() == b.bias.rows() && a.bias.cols() == b.bias.cols() &&
               (a.bias.array() == b.bias.array()).all();
    }
};

template <typename Scalar>
struct BasicPreferencePair {
    BasicTrajectory<Scalar> winner;
    BasicTrajectory<Scalar> loser;
    std::string prompt_id;
    std::int64_t timestamp = 0;

    template <typename Other>
    BasicPreferencePair<Other> cast() const {
        return {winner.template cast<Other>(), loser.template cast<Other>(), prompt_id, timestamp};
    }

    friend bool operator==(const BasicPreferencePair&, const BasicPreferencePair&) = default;
};

using Schedule = DiffusionSchedule<double>;
using Policy = PolicyParams<double>;
using PreferencePair = BasicPreferencePair<double>;

/// Schedule with constant drift `c` and noise `sigma` over `steps` steps.
inline Schedule constant_schedule(Eigen::Index steps, double drift, double sigma) {
    if (steps < 1) throw Error(ErrorCode::InvalidArgument, "schedule needs at least one step");
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    return {Vector<double>::Constant(steps, sigma), Vector<double>::Constant(steps, drift)};
}

/// Zero-bias policy on `schedule` with latent dimension `dim`.
inline Policy zero_policy(const Schedule& schedule, Eigen::Index dim) {
    return {RowMatrix<double>::Zero(schedule.steps(), dim), schedule};
}

template <typename Scalar>
void check_shapes(const PolicyParams<Scalar>& params, const BasicTrajectory<Scalar>& traj) {
    if (params.schedule.sigma.size() != params.steps() || params.schedule.drift.size() != params.steps())
        throw Error(ErrorCode::ShapeMismatch, "schedule length differs from bias rows");
    if (traj.steps() != params.steps() || traj.dim() != params.dim())
        throw Error(ErrorCode::ShapeMismatch, "trajectory is " + std::to_string(traj.steps()) + "x" +
                                                  std::to_string(traj.dim()) + ", policy " +
                                                  std::to_string(params.steps()) + "x" + std::to_string(params.dim()));
}

template <typename Scalar>
struct LogProb {
    Vector<Scalar> per_step;
    Scalar total;
};

template <typename Scalar>
LogProb<Scalar> log_prob(const PolicyParams<Scalar>& params, const BasicTrajectory<Scalar>& traj) {
    check_shapes(params, traj);
    using std::log;
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    const auto d = static_cast<Scalar>(params.dim());
    LogProb<Scalar> out{Vector<Scalar>(params.steps()), Scalar(0)};
    for (Eigen::Index k = 0; k < params.steps(); ++k) {
        const Scalar sigma = params.schedule.sigma(k);
        const Scalar var = sigma * sigma;
        const auto residual = traj.action(k) - params.schedule.drift(k) * traj.state(k) - params.bias.row(k);
        out.per_step(k) = -Scalar(0.5) * d * log(two_pi * var) - residual.squaredNorm() / (Scalar(2) * var);
    }
    out.total = out.per_step.sum();
    return out;
}

/// log(1 + exp(x)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar x) {
    using std::exp;
    using std::log1p;
    return x > Scalar(0) ? x + log1p(exp(-x)) : log1p(exp(x));
}

template <typename Scalar>
Scalar logistic(Scalar x) {
    using std::exp;
    return x >= Scalar(0) ? Scalar(1) / (Scalar(1) + exp(-x)) : exp(x) / (Scalar(1) + exp(x));
}

template <typename Scalar>
struct LossTerms {
    Scalar loss;
    Scalar margin; // argument of the logistic
    Vector<Scalar> winner_log_ratio; // per step, theta vs ref
    Vector<Scalar> loser_log_ratio;
};

/// Preference loss over whole trajectories:
/// -log logistic(beta * [(L_theta(w) - L_ref(w)) - (L_theta(l) - L_ref(l))]).
template <typename Scalar>
LossTerms<Scalar> d3po_terms(const PolicyParams<Scalar>& theta, const PolicyParams<Scalar>& ref,
                             const BasicPreferencePair<Scalar>& pair, Scalar beta) {
    if (!(beta > Scalar(0))) throw Error(ErrorCode::NonPositiveBeta, "beta must be > 0");
    if (ref.steps() != theta.steps() || ref.dim() != theta.dim())
        throw Error(ErrorCode::ShapeMismatch, "theta and ref shapes differ");
    const auto lw = log_prob(theta, pair.winner);
    const auto rw = log_prob(ref, pair.winner);
    const auto ll = log_prob(theta, pair.loser);
    const auto rl = log_prob(ref, pair.loser);
    LossTerms<Scalar> out;
    out.winner_log_ratio = lw.per_step - rw.per_step;
    out.loser_log_ratio = ll.per_step - rl.per_step;
    out.margin = beta * ((lw.total - rw.total) - (ll.total - rl.total));
    out.loss = softplus(-out.margin);
    return out;
}

template <typename Scalar>
Scalar d3po_loss(const PolicyParams<Scalar>& theta, const PolicyParams<Scalar>& ref,
                 const BasicPreferencePair<Scalar>& pair, Scalar beta) {
    return d3po_terms(theta, ref, pair, beta).loss;
}

/// Mean loss over a batch.
template <typename Scalar>
Scalar d3po_batch_loss(const PolicyParams<Scalar>& theta, const PolicyParams<Scalar>& ref,
                       std::span<const BasicPreferencePair<Scalar>> batch, Scalar beta) {
    if (batch.empty()) throw Error(ErrorCode::EmptyStore, "empty batch");
    Scalar sum(0);
    for (const auto& pair : batch) sum += d3po_loss(theta, ref, pair, beta);
    return sum / static_cast<Scalar>(batch.size());
}

/// d/d b_k of a trajectory's log-probability: (a_k - c_k x_k - b_k) / sigma_k^2.
template <typename Scalar>
RowMatrix<Scalar> log_prob_grad(const PolicyParams<Scalar>& params, const BasicTrajectory<Scalar>& traj) {
    check_shapes(params, traj);
    RowMatrix<Scalar> g(params.steps(), params.dim());
    for (Eigen::Index k = 0; k < params.steps(); ++k) {
        const Scalar sigma = params.schedule.sigma(k);
        g.row(k) = (traj.action(k) - params.schedule.drift(k) * traj.state(k) - params.bias.row(k)) / (sigma * sigma);
    }
    return g;
}

/// Analytic gradient of the mean batch loss with respect to every bias row.
/// Pairs are reduced in order, so results are deterministic.
template <typename Scalar>
RowMatrix<Scalar> d3po_grad(const PolicyParams<Scalar>& theta, const PolicyParams<Scalar>& ref,
                            std::span<const BasicPreferencePair<Scalar>> batch, Scalar beta) {
    if (batch.empty()) throw Error(ErrorCode::EmptyStore, "empty batch");
    RowMatrix<Scalar> grad = RowMatrix<Scalar>::Zero(theta.steps(), theta.dim());
    for (const auto& pair : batch) {
        const auto terms = d3po_terms(theta, ref, pair, beta);
        // d loss / d margin = -logistic(-margin)
        const Scalar weight = -beta * logistic(-terms.margin);
        grad += weight * (log_prob_grad(theta, pair.winner) - log_prob_grad(theta, pair.loser));
    }
    return grad / static_cast<Scalar>(batch.size());
}

/// Samples a chain x_T ~ N(0, I), then x <- c_k x + b_k + sigma_k eps.
inline DenoisingTrajectory sample_trajectory(const Policy& params, Rng& rng) {
    DenoisingTrajectory traj{RowMatrix<double>(params.steps() + 1, params.dim())};
    for (Eigen::Index i = 0; i < params.dim(); ++i) traj.latents(0, i) = rng.normal();
    for (Eigen::Index k = 0; k < params.steps(); ++k)
        for (Eigen::Index i = 0; i < params.dim(); ++i)
            traj.latents(k + 1, i) = params.schedule.drift(k) * traj.latents(k, i) + params.bias(k, i) +
                                     params.schedule.sigma(k) * rng.normal();
    return traj;
}

/// Closed-form KL(N(mu_theta, s^2 I) || N(mu_ref, s^2 I)) summed over steps:
/// sum_k ||b_theta,k - b_ref,k||^2 / (2 sigma_k^2).
template <typename Scalar>
Scalar policy_kl(const PolicyParams<Scalar>& theta, const PolicyParams<Scalar>& ref) {
    if (ref.steps() != theta.steps() || ref.dim() != theta.dim())
        throw Error(ErrorCode::ShapeMismatch, "theta and ref shapes differ");
    Scalar kl(0);
    for (Eigen::Index k = 0; k < theta.steps(); ++k) {
        const Scalar sigma = theta.schedule.sigma(k);
        kl += (theta.bias.row(k) - ref.bias.row(k)).squaredNorm() / (Scalar(2) * sigma * sigma);
    }
    return kl;
}

} // namespace reflex::dpo
