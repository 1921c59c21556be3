#pragma once

// Finite tabular MDP model: dense transition/reward tables, policies as
// per-state distributions over actions, validation, the policy-induced state
// chain and its discounted stationary distribution.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "regmdp/linalg.hpp"

namespace regmdp {

/// Input rows must be stochastic to this tolerance. Rows that are off by more
/// are rejected rather than silently renormalized.
inline constexpr double kStochasticTol = 1e-12;

/// Fixed-point tolerance for the discounted stationary distribution.
inline constexpr double kStationaryTol = 1e-10;

/**
 * Finite discounted MDP (S, A, P, r, rho, gamma) with dense row-major tables.
 *
 * transition[s][a][s'] is P(s'|s,a), reward[s][a] is r(s,a), initial_dist is
 * the start-state distribution rho, and discount is gamma in [0,1).
 * Instances are immutable after construction by convention; all operations on
 * them are pure functions.
 */
struct Mdp {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<double> transition;    // [s][a][s'], size S*A*S
    std::vector<double> reward;        // [s][a], size S*A
    std::vector<double> initial_dist;  // [s]
    double discount = 0.0;

    double p(std::size_t s, std::size_t a, std::size_t s_next) const {
        return transition[(s * n_actions + a) * n_states + s_next];
    }
    double r(std::size_t s, std::size_t a) const { return reward[s * n_actions + a]; }
    std::span<const double> transition_row(std::size_t s, std::size_t a) const {
        return {transition.data() + (s * n_actions + a) * n_states, n_states};
    }
};

/// Stationary randomized policy: probs[s][a] is the probability of action a
/// in state s; every row lies on the action simplex.
struct Policy {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    std::vector<double> probs;  // [s][a], size S*A

    double prob(std::size_t s, std::size_t a) const { return probs[s * n_actions + a]; }
    double& prob(std::size_t s, std::size_t a) { return probs[s * n_actions + a]; }
    std::span<const double> row(std::size_t s) const {
        return {probs.data() + s * n_actions, n_actions};
    }
};

/// Distribution over states (e.g. the discounted occupancy of a policy).
struct StateDistribution {
    std::vector<double> mu;

    double operator[](std::size_t s) const { return mu[s]; }
    std::size_t size() const { return mu.size(); }
};

/// Row-stochastic |S| x |S| matrix, e.g. the state chain induced by a policy.
struct StateMatrix {
    std::size_t n = 0;
    std::vector<double> rows;  // row-major

    double at(std::size_t s, std::size_t s_next) const { return rows[s * n + s_next]; }
    double& at(std::size_t s, std::size_t s_next) { return rows[s * n + s_next]; }
    std::span<const double> row(std::size_t s) const { return {rows.data() + s * n, n}; }
};

/// Diagnostics from validate_mdp / validate_policy. Violations are returned,
/// not thrown, so callers can report all of them at once.
struct ValidationResult {
    std::vector<std::string> errors;

    bool ok() const { return errors.empty(); }
    std::string to_string() const {
        std::string joined;
        for (const auto& e : errors) {
            if (!joined.empty())
                joined += "; ";
            joined += e;
        }
        return joined;
    }
};

namespace detail {

inline std::string fmt(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

inline void check_distribution_row(std::span<const double> row, const std::string& label,
                                   std::vector<std::string>& errors) {
    double sum = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!std::isfinite(row[i]) || row[i] < 0.0)
            errors.push_back(label + " has negative or non-finite entry " + fmt(row[i]) +
                             " at index " + std::to_string(i));
        sum += row[i];
    }
    if (!(std::abs(sum - 1.0) <= kStochasticTol))
        errors.push_back(label + " sums to " + fmt(sum) + " (residual " + fmt(sum - 1.0) + ")");
}

}  // namespace detail

inline ValidationResult validate_mdp(const Mdp& m) {
    ValidationResult result;
    if (m.n_states == 0 || m.n_actions == 0) {
        result.errors.push_back("n_states and n_actions must be positive");
        return result;
    }
    if (m.transition.size() != m.n_states * m.n_actions * m.n_states ||
        m.reward.size() != m.n_states * m.n_actions || m.initial_dist.size() != m.n_states) {
        result.errors.push_back("table shapes do not match n_states/n_actions");
        return result;
    }
    for (std::size_t s = 0; s < m.n_states; ++s)
        for (std::size_t a = 0; a < m.n_actions; ++a)
            detail::check_distribution_row(m.transition_row(s, a),
                                           "transition row (s=" + std::to_string(s) +
                                               ", a=" + std::to_string(a) + ")",
                                           result.errors);
    detail::check_distribution_row({m.initial_dist.data(), m.initial_dist.size()},
                                   "initial_dist", result.errors);
    if (!(m.discount >= 0.0 && m.discount < 1.0))
        result.errors.push_back("discount out of range [0,1): " + detail::fmt(m.discount));
    for (std::size_t s = 0; s < m.n_states; ++s)
        for (std::size_t a = 0; a < m.n_actions; ++a)
            if (!std::isfinite(m.r(s, a)))
                result.errors.push_back("reward (s=" + std::to_string(s) +
                                        ", a=" + std::to_string(a) + ") is not finite");
    return result;
}

inline ValidationResult validate_policy(const Mdp& m, const Policy& pi) {
    ValidationResult result;
    if (pi.n_states != m.n_states || pi.n_actions != m.n_actions ||
        pi.probs.size() != m.n_states * m.n_actions) {
        result.errors.push_back("policy shape does not match the MDP (" +
                                std::to_string(pi.n_states) + "x" +
                                std::to_string(pi.n_actions) + " vs " +
                                std::to_string(m.n_states) + "x" +
                                std::to_string(m.n_actions) + ")");
        return result;
    }
    for (std::size_t s = 0; s < m.n_states; ++s)
        detail::check_distribution_row(pi.row(s), "policy row (s=" + std::to_string(s) + ")",
                                       result.errors);
    return result;
}

namespace detail {

inline void require_valid(const Mdp& m) {
    const ValidationResult v = validate_mdp(m);
    if (!v.ok())
        throw std::invalid_argument("invalid MDP: " + v.to_string());
}

inline void require_valid(const Mdp& m, const Policy& pi) {
    require_valid(m);
    const ValidationResult v = validate_policy(m, pi);
    if (!v.ok())
        throw std::invalid_argument("invalid policy: " + v.to_string());
}

}  // namespace detail

/**
 * State chain induced by a policy: P^pi(s -> s') = sum_a pi(s,a) P(s'|s,a).
 */
inline StateMatrix induced_transition(const Mdp& m, const Policy& pi) {
    detail::require_valid(m, pi);
    StateMatrix out;
    out.n = m.n_states;
    out.rows.assign(m.n_states * m.n_states, 0.0);
    for (std::size_t s = 0; s < m.n_states; ++s)
        for (std::size_t a = 0; a < m.n_actions; ++a) {
            const double w = pi.prob(s, a);
            if (w == 0.0)
                continue;
            const auto p_row = m.transition_row(s, a);
            for (std::size_t s2 = 0; s2 < m.n_states; ++s2)
                out.at(s, s2) += w * p_row[s2];
        }
    return out;
}

/**
 * Discounted stationary distribution of a policy:
 *
 *   mu(s') = (1-gamma) rho(s') + gamma sum_s P^pi(s -> s') mu(s).
 *
 * Computed by a dense LU solve of (I - gamma (P^pi)^T) mu = (1-gamma) rho,
 * which is exact to roundoff; the fixed-point residual is verified before
 * returning. For gamma < 1 the system is nonsingular, so a residual above
 * kStationaryTol signals numerical breakdown.
 */
inline StateDistribution stationary_distribution(const Mdp& m, const Policy& pi) {
    const StateMatrix chain = induced_transition(m, pi);
    const std::size_t n = m.n_states;
    const double gamma = m.discount;

    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a[i * n + j] = (i == j ? 1.0 : 0.0) - gamma * chain.at(j, i);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i)
        b[i] = (1.0 - gamma) * m.initial_dist[i];

    StateDistribution out;
    out.mu = linalg::solve(n, a, b);

    double residual = 0.0;
    for (std::size_t s2 = 0; s2 < n; ++s2) {
        double rhs = (1.0 - gamma) * m.initial_dist[s2];
        for (std::size_t s = 0; s < n; ++s)
            rhs += gamma * chain.at(s, s2) * out.mu[s];
        residual = std::max(residual, std::abs(out.mu[s2] - rhs));
    }
    if (!(residual <= kStationaryTol))
        throw NumericalError("stationary distribution fixed-point residual " +
                             detail::fmt(residual) + " exceeds " + detail::fmt(kStationaryTol) +
                             " (condition estimate " +
                             detail::fmt(linalg::condition_inf(n, a)) + ")");
    return out;
}

/// E_{s~dist}[values(s)].
inline double expectation(std::span<const double> dist, std::span<const double> values) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i)
        acc += dist[i] * values[i];
    return acc;
}

}  // namespace regmdp
