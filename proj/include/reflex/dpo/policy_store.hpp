#pragma once

#include <mutex>

#include "reflex/dpo/policy.hpp"

namespace reflex::dpo {

/// A live policy shared between generators (readers) and the trainer (single
/// writer). Readers take snapshots; the frozen reference never changes.
class PolicyHandle {
public:
    explicit PolicyHandle(Policy reference) : ref_(reference), current_(std::move(reference)) {}

    Policy snapshot() const {
        std::lock_guard lock(mu_);
        return current_;
    }
    const Policy& reference() const noexcept { return ref_; }
    void update(Policy params) {
        std::lock_guard lock(mu_);
        current_ = std::move(params);
    }

private:
    const Policy ref_;
    mutable std::mutex mu_;
    Policy current_;
};

/// Default toy denoiser: 8 steps, drift 0.9, sigma 0.3, 2-d latents.
inline Policy default_reference_policy() { return zero_policy(constant_schedule(8, 0.9, 0.3), 2); }

} // namespace reflex::dpo
