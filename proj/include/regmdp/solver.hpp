#pragma once

// Regularized planning: exact policy evaluation by linear solve and optimal
// control by value iteration with the regularized Bellman operator
//
//   (T_Omega v)(s) = max_{pi(s,.) in Delta(A)} <pi(s,.), r(s,.) + gamma P v> - Omega(pi(s,.)),
//
// a gamma-contraction in sup-norm (the simplex maximum is 1-Lipschitz in its
// scores under sup-norm).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "regmdp/mdp.hpp"
#include "regmdp/regularizers.hpp"

namespace regmdp {

inline constexpr double kSolverTol = 1e-10;
inline constexpr double kEvaluationResidualTol = 1e-11;

/**
 * Q/V tables for a policy or for the regularized optimum, with solver
 * metadata. Always consistent with the model they were computed from:
 * q[s][a] = r(s,a) + gamma sum_s' P(s'|s,a) v(s') within `residual`, and for
 * optimal solutions v(s) equals the regularized simplex maximum of q[s][.]
 * within `residual`.
 */
struct ValueSolution {
    std::vector<double> q;  // [s][a], size S*A
    std::vector<double> v;  // [s]
    Policy policy;          // evaluated policy, or per-state maximizer
    std::size_t iterations = 0;
    double residual = 0.0;
    std::vector<bool> interior_flags;  // per-state is_relint of policy rows

    std::span<const double> q_row(std::size_t s) const {
        return {q.data() + s * policy.n_actions, policy.n_actions};
    }
};

namespace detail {

/// q[s][a] = r(s,a) + gamma sum_s' P(s'|s,a) v(s').
inline std::vector<double> backup_q(const Mdp& m, std::span<const double> v) {
    std::vector<double> q(m.n_states * m.n_actions);
    for (std::size_t s = 0; s < m.n_states; ++s)
        for (std::size_t a = 0; a < m.n_actions; ++a) {
            const auto p_row = m.transition_row(s, a);
            double acc = 0.0;
            for (std::size_t s2 = 0; s2 < m.n_states; ++s2)
                acc += p_row[s2] * v[s2];
            q[s * m.n_actions + a] = m.r(s, a) + m.discount * acc;
        }
    return q;
}

inline std::size_t default_max_iterations(const Mdp& m, const Regularizer& reg, double tol) {
    if (m.discount == 0.0)
        return 2 + 64;
    double r_lo = m.reward[0], r_hi = m.reward[0];
    for (double r : m.reward) {
        r_lo = std::min(r_lo, r);
        r_hi = std::max(r_hi, r);
    }
    // The regularizer contributes to the value scale too; estimate its
    // magnitude from the uniform point and a vertex.
    const std::vector<double> uniform(m.n_actions, 1.0 / static_cast<double>(m.n_actions));
    std::vector<double> vertex(m.n_actions, 0.0);
    vertex[0] = 1.0;
    double omega_scale = std::abs(detail::omega_unchecked(reg, uniform));
    try {
        omega_scale = std::max(omega_scale, std::abs(detail::omega_unchecked(reg, vertex)));
    } catch (const std::exception&) {
        // potential undefined at the vertex; the uniform estimate stands
    }
    const double range = std::max(r_hi - r_lo + 2.0 * omega_scale, tol);
    const double bound =
        std::log(2.0 * range / ((1.0 - m.discount) * tol)) / std::log(1.0 / m.discount);
    return static_cast<std::size_t>(std::ceil(std::max(bound, 1.0))) + 64;
}

}  // namespace detail

/// One application of the regularized Bellman operator T_Omega.
inline std::vector<double> apply_bellman(const Mdp& m, const Regularizer& reg,
                                         std::span<const double> v) {
    const std::vector<double> q = detail::backup_q(m, v);
    std::vector<double> out(m.n_states);
    for (std::size_t s = 0; s < m.n_states; ++s)
        out[s] = simplex_max(reg, {q.data() + s * m.n_actions, m.n_actions}).value;
    return out;
}

/**
 * Exact regularized policy evaluation: solves the linear system
 *
 *   (I - gamma P^pi) v = r^pi - Omega^pi,
 *
 * where r^pi(s) = sum_a pi(s,a) r(s,a) and Omega^pi(s) = Omega(pi(s,.)),
 * then recovers q by one backup from v. The direct solve keeps residuals at
 * roundoff, which every identity check downstream depends on.
 */
inline ValueSolution evaluate_policy(const Mdp& m, const Regularizer& reg, const Policy& pi) {
    detail::require_valid(m, pi);
    const std::size_t n = m.n_states;
    const StateMatrix chain = induced_transition(m, pi);

    std::vector<double> rhs(n);
    for (std::size_t s = 0; s < n; ++s) {
        double r_pi = 0.0;
        for (std::size_t a = 0; a < m.n_actions; ++a)
            r_pi += pi.prob(s, a) * m.r(s, a);
        rhs[s] = r_pi - detail::omega_unchecked(reg, pi.row(s));
    }
    std::vector<double> a_mat(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a_mat[i * n + j] = (i == j ? 1.0 : 0.0) - m.discount * chain.at(i, j);

    ValueSolution sol;
    sol.v = linalg::solve(n, a_mat, rhs);
    sol.q = detail::backup_q(m, sol.v);
    sol.policy = pi;
    sol.iterations = 0;

    double residual = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        double backed = rhs[s];
        for (std::size_t s2 = 0; s2 < n; ++s2)
            backed += m.discount * chain.at(s, s2) * sol.v[s2];
        residual = std::max(residual, std::abs(sol.v[s] - backed));
    }
    sol.residual = residual;
    if (!(residual <= kEvaluationResidualTol))
        throw NumericalError("policy evaluation residual " + detail::fmt(residual) +
                             " exceeds " + detail::fmt(kEvaluationResidualTol) +
                             " (condition estimate " +
                             detail::fmt(linalg::condition_inf(n, a_mat)) + ")");

    sol.interior_flags.resize(n);
    for (std::size_t s = 0; s < n; ++s)
        sol.interior_flags[s] = is_relint(pi.row(s));
    return sol;
}

/**
 * Regularized optimal control by sup-norm value iteration. Stops once the
 * sweep difference drops to `tol`, which bounds the Bellman residual of the
 * returned tables by gamma*tol; the reported residual is measured directly.
 * The returned policy holds the per-state simplex maximizers of q, and
 * interior_flags their is_relint status.
 *
 * max_iterations = 0 picks an a-priori bound from the contraction rate plus
 * slack; exceeding the limit throws with the residual reached.
 */
inline ValueSolution solve_optimal(const Mdp& m, const Regularizer& reg, double tol = kSolverTol,
                                   std::size_t max_iterations = 0) {
    detail::require_valid(m);
    if (!(tol > 0.0))
        throw std::invalid_argument("solve_optimal: tol must be positive");
    if (max_iterations == 0)
        max_iterations = detail::default_max_iterations(m, reg, tol);

    const std::size_t n = m.n_states;
    std::vector<double> v(n, 0.0);
    std::size_t sweeps = 0;
    double delta = std::numeric_limits<double>::infinity();
    while (true) {
        const std::vector<double> next = apply_bellman(m, reg, v);
        delta = 0.0;
        for (std::size_t s = 0; s < n; ++s)
            delta = std::max(delta, std::abs(next[s] - v[s]));
        v = next;
        ++sweeps;
        if (delta <= tol)
            break;
        if (sweeps >= max_iterations)
            throw NumericalError("solve_optimal: no convergence after " +
                                 std::to_string(sweeps) + " sweeps (last sweep difference " +
                                 detail::fmt(delta) + ", tol " + detail::fmt(tol) + ")");
    }

    ValueSolution sol;
    sol.v = v;
    sol.q = detail::backup_q(m, sol.v);
    sol.iterations = sweeps;
    sol.policy.n_states = n;
    sol.policy.n_actions = m.n_actions;
    sol.policy.probs.resize(n * m.n_actions);
    sol.interior_flags.resize(n);
    double bellman_residual = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const SimplexMaxResult row =
            simplex_max(reg, {sol.q.data() + s * m.n_actions, m.n_actions});
        std::copy(row.argmax.begin(), row.argmax.end(),
                  sol.policy.probs.begin() + static_cast<std::ptrdiff_t>(s * m.n_actions));
        sol.interior_flags[s] = row.interior;
        bellman_residual = std::max(bellman_residual, std::abs(row.value - sol.v[s]));
    }
    sol.residual = bellman_residual;
    return sol;
}

/// Sup-norm of v - T_Omega v for the tables in `sol`.
inline double bellman_residual(const Mdp& m, const Regularizer& reg, const ValueSolution& sol) {
    if (sol.v.size() != m.n_states)
        throw std::invalid_argument("bellman_residual: solution shape does not match the MDP");
    const std::vector<double> backed = apply_bellman(m, reg, sol.v);
    double residual = 0.0;
    for (std::size_t s = 0; s < m.n_states; ++s)
        residual = std::max(residual, std::abs(sol.v[s] - backed[s]));
    return residual;
}

}  // namespace regmdp
