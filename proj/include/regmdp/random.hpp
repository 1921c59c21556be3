#pragma once

// Seeded generation of random MDP instances and policies. Uniform variates
// are derived from the raw mt19937_64 stream rather than the standard
// distributions, so a given seed produces the same instance on every
// platform and standard library.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "regmdp/mdp.hpp"

namespace regmdp {

class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform on the open interval (0,1); never returns an endpoint.
    double uniform01() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard exponential; strictly positive.
    double exponential() { return -std::log(uniform01()); }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform01()));
        const double angle = 2.0 * 3.14159265358979323846 * uniform01();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t next_u64() { return gen_(); }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Flat Dirichlet draw: normalized i.i.d. exponentials. Entries are strictly
/// positive, so generated kernels have no unreachable states.
inline std::vector<double> dirichlet_row(SeededRng& rng, std::size_t k) {
    std::vector<double> row(k);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        row[i] = rng.exponential();
        sum += row[i];
    }
    for (std::size_t i = 0; i < k; ++i)
        row[i] /= sum;
    return row;
}

/**
 * Random instance: transition rows and rho are flat Dirichlet, rewards are
 * i.i.d. uniform on [0,1]. Deterministic given the seed.
 */
inline Mdp random_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                      std::uint64_t seed) {
    if (n_states < 1 || n_actions < 1)
        throw std::invalid_argument("random_mdp: n_states and n_actions must be >= 1");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("random_mdp: gamma must lie in [0,1)");

    SeededRng rng(seed);
    Mdp m;
    m.n_states = n_states;
    m.n_actions = n_actions;
    m.discount = gamma;
    m.transition.reserve(n_states * n_actions * n_states);
    for (std::size_t s = 0; s < n_states; ++s)
        for (std::size_t a = 0; a < n_actions; ++a) {
            const std::vector<double> row = dirichlet_row(rng, n_states);
            m.transition.insert(m.transition.end(), row.begin(), row.end());
        }
    m.reward.resize(n_states * n_actions);
    for (double& r : m.reward)
        r = rng.uniform01();
    m.initial_dist = dirichlet_row(rng, n_states);
    return m;
}

/// Random policy with flat-Dirichlet rows; deterministic given the seed.
inline Policy random_policy(std::size_t n_states, std::size_t n_actions, std::uint64_t seed) {
    if (n_states < 1 || n_actions < 1)
        throw std::invalid_argument("random_policy: n_states and n_actions must be >= 1");
    SeededRng rng(seed ^ 0x9e3779b97f4a7c15ull);
    Policy pi;
    pi.n_states = n_states;
    pi.n_actions = n_actions;
    pi.probs.reserve(n_states * n_actions);
    for (std::size_t s = 0; s < n_states; ++s) {
        const std::vector<double> row = dirichlet_row(rng, n_actions);
        pi.probs.insert(pi.probs.end(), row.begin(), row.end());
    }
    return pi;
}

}  // namespace regmdp
