#pragma once

// Mechanical verification of the exact identities tying regularized values,
// occupancies, Bregman divergences, and normal-cone optimality together.
// Every check computes both sides from scratch and reports the residual; no
// identity is ever assumed.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "regmdp/mdp.hpp"
#include "regmdp/regularizers.hpp"
#include "regmdp/solver.hpp"

namespace regmdp {

inline constexpr double kVerifyTol = 1e-7;

enum class Identity {
    pdl,           // regularized performance difference between two policies
    basic_lemma,   // occupancy identity mu^T (I - gamma P^pi) x = (1-gamma) rho^T x
    normal_cone,   // first-order optimality certificate of the simplex maximizer
    relint_lemma,  // interior maximizers annihilate normal-cone directions
    main_theorem,  // occupancy-weighted Bregman gap vs. value suboptimality
    kl_corollary,  // negative-entropy special case in KL form
};

inline std::string_view to_string(Identity id) {
    switch (id) {
    case Identity::pdl: return "pdl";
    case Identity::basic_lemma: return "basic_lemma";
    case Identity::normal_cone: return "normal_cone";
    case Identity::relint_lemma: return "relint_lemma";
    case Identity::main_theorem: return "main_theorem";
    case Identity::kl_corollary: return "kl_corollary";
    }
    return "unknown";
}

/// Per-state diagnostics attached to a report: the state's contribution to
/// the left-hand side, its occupancy weight, and the maximizer's interiority.
struct StateDiagnostic {
    std::size_t state = 0;
    double term = 0.0;
    double weight = 0.0;
    bool interior = false;
};

/**
 * Outcome of one identity check. For equality identities `passed` means
 * |lhs - rhs| <= tolerance; for the inequality form of the main theorem it
 * means lhs <= rhs + tolerance, tightened to equality when every state's
 * maximizer is interior.
 */
struct VerificationReport {
    Identity identity = Identity::pdl;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  // lhs - rhs
    double tolerance = 0.0;
    bool passed = false;
    std::vector<StateDiagnostic> per_state;  // empty when not applicable
};

/// Certificate for y = q - grad Omega(pi*) lying in the simplex normal cone
/// at pi*. On the simplex the cone membership reduces to the vertex test
/// max_a y_a <= y^T pi*.
struct NormalConeCertificate {
    std::vector<double> y;
    double max_violation = 0.0;  // max_a y_a - y^T pi*
    bool member = false;
    bool interior = false;
    bool y_constant = false;  // spread of y within tol; meaningful when interior
};

/**
 * Regularized performance difference between two policies:
 *
 *   (1-gamma) E_rho[V^pi - V^pi'] =
 *       E_{mu^pi}[ sum_a pi(s,a) Q^pi'(s,a) - V^pi'(s) - Omega(pi(s,.)) ].
 */
inline VerificationReport check_pdl(const Mdp& m, const Regularizer& reg, const Policy& pi,
                                    const Policy& pi_prime, double tol = kVerifyTol) {
    const ValueSolution sol_pi = evaluate_policy(m, reg, pi);
    const ValueSolution sol_pp = evaluate_policy(m, reg, pi_prime);
    const StateDistribution mu = stationary_distribution(m, pi);

    double lhs = 0.0;
    for (std::size_t s = 0; s < m.n_states; ++s)
        lhs += m.initial_dist[s] * (sol_pi.v[s] - sol_pp.v[s]);
    lhs *= 1.0 - m.discount;

    double rhs = 0.0;
    for (std::size_t s = 0; s < m.n_states; ++s) {
        double q_mix = 0.0;
        for (std::size_t a = 0; a < m.n_actions; ++a)
            q_mix += pi.prob(s, a) * sol_pp.q[s * m.n_actions + a];
        rhs += mu[s] * (q_mix - sol_pp.v[s] - detail::omega_unchecked(reg, pi.row(s)));
    }

    VerificationReport report;
    report.identity = Identity::pdl;
    report.lhs = lhs;
    report.rhs = rhs;
    report.residual = lhs - rhs;
    report.tolerance = tol;
    report.passed = std::abs(report.residual) <= tol;
    return report;
}

/**
 * Occupancy identity: for any vector x, (mu^pi)^T (I - gamma P^pi) x equals
 * (1-gamma) rho^T x.
 */
inline VerificationReport check_basic_lemma(const Mdp& m, const Policy& pi,
                                            std::span<const double> x, double tol = kVerifyTol) {
    if (x.size() != m.n_states)
        throw std::invalid_argument("check_basic_lemma: x must have one entry per state");
    for (double xi : x)
        if (!std::isfinite(xi))
            throw std::invalid_argument("check_basic_lemma: x must be finite");

    const StateMatrix chain = induced_transition(m, pi);
    const StateDistribution mu = stationary_distribution(m, pi);

    double lhs = 0.0;
    for (std::size_t s = 0; s < m.n_states; ++s) {
        double px = 0.0;
        for (std::size_t s2 = 0; s2 < m.n_states; ++s2)
            px += chain.at(s, s2) * x[s2];
        lhs += mu[s] * (x[s] - m.discount * px);
    }
    const double rhs = (1.0 - m.discount) * expectation(m.initial_dist, x);

    VerificationReport report;
    report.identity = Identity::basic_lemma;
    report.lhs = lhs;
    report.rhs = rhs;
    report.residual = lhs - rhs;
    report.tolerance = tol;
    report.passed = std::abs(report.residual) <= tol;
    return report;
}

/**
 * First-order optimality certificate: y = q - grad Omega(pi*) must lie in
 * the simplex normal cone at pi*. For interior pi* the certificate also
 * records whether y is constant across actions, which is what forces the
 * equality branch of the main identity.
 */
inline NormalConeCertificate check_normal_cone(const Regularizer& reg,
                                               std::span<const double> q_row,
                                               std::span<const double> pi_star_row,
                                               double tol = kVerifyTol) {
    if (q_row.size() != pi_star_row.size())
        throw std::invalid_argument("check_normal_cone: shape mismatch");
    NormalConeCertificate cert;
    cert.y = grad_omega(reg, pi_star_row);
    for (std::size_t a = 0; a < q_row.size(); ++a)
        cert.y[a] = q_row[a] - cert.y[a];

    double y_dot_pi = 0.0;
    double y_max = -std::numeric_limits<double>::infinity();
    double y_min = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        y_dot_pi += cert.y[a] * pi_star_row[a];
        y_max = std::max(y_max, cert.y[a]);
        y_min = std::min(y_min, cert.y[a]);
    }
    cert.max_violation = y_max - y_dot_pi;
    cert.member = cert.max_violation <= tol;
    cert.interior = is_relint(pi_star_row);
    cert.y_constant = cert.interior && (y_max - y_min <= tol);
    return cert;
}

/// Certificates for every state of an optimal solution.
inline std::vector<NormalConeCertificate> normal_cone_certificates(const Regularizer& reg,
                                                                   const ValueSolution& sol,
                                                                   double tol = kVerifyTol) {
    std::vector<NormalConeCertificate> certs;
    certs.reserve(sol.v.size());
    for (std::size_t s = 0; s < sol.v.size(); ++s)
        certs.push_back(check_normal_cone(reg, sol.q_row(s), sol.policy.row(s), tol));
    return certs;
}

/**
 * Main identity: the occupancy-weighted Bregman divergence to the optimal
 * policy never exceeds (1-gamma) times the initial-state value gap,
 *
 *   E_{mu^pi} D_Omega(pi(s,.), pi*(s,.)) <= (1-gamma) E_rho[V* - V^pi],
 *
 * with equality whenever pi* is interior in every state. `passed` asserts
 * the inequality always and the equality when all interior flags hold;
 * per_state carries each state's divergence term and interiority.
 */
inline VerificationReport check_main_theorem(const Mdp& m, const Regularizer& reg,
                                             const Policy& pi, double tol = kVerifyTol) {
    const ValueSolution opt = solve_optimal(m, reg);
    const ValueSolution ev = evaluate_policy(m, reg, pi);
    const StateDistribution mu = stationary_distribution(m, pi);

    VerificationReport report;
    report.identity = Identity::main_theorem;
    report.tolerance = tol;
    report.per_state.reserve(m.n_states);

    double lhs = 0.0;
    bool all_interior = true;
    for (std::size_t s = 0; s < m.n_states; ++s) {
        const double div = bregman(reg, pi.row(s), opt.policy.row(s));
        lhs += mu[s] * div;
        all_interior = all_interior && opt.interior_flags[s];
        report.per_state.push_back({s, div, mu[s], opt.interior_flags[s]});
    }
    double rhs = 0.0;
    for (std::size_t s = 0; s < m.n_states; ++s)
        rhs += m.initial_dist[s] * (opt.v[s] - ev.v[s]);
    rhs *= 1.0 - m.discount;

    report.lhs = lhs;
    report.rhs = rhs;
    report.residual = lhs - rhs;
    report.passed = lhs <= rhs + tol;
    if (all_interior)
        report.passed = report.passed && std::abs(report.residual) <= tol;
    return report;
}

namespace detail {

/// KL(p || q) with the 0 log 0 convention on the first argument.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
    double acc = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (p[a] <= 0.0)
            continue;
        acc += p[a] * (std::log(p[a]) - std::log(q[a]));
    }
    return acc;
}

}  // namespace detail

/**
 * Negative-entropy special case of the main identity, in KL form:
 *
 *   E_{mu^pi} KL(pi(s,.) || pi*(s,.)) = ((1-gamma)/tau) E_rho[V* - V^pi].
 *
 * The entropy-regularized maximizer is interior for any finite scores, so
 * this is always an equality, including for one-hot pi. Each state's KL term
 * is cross-checked against bregman(neg_entropy(tau))/tau.
 */
inline VerificationReport check_kl_corollary(const Mdp& m, double tau, const Policy& pi,
                                             double tol = kVerifyTol) {
    if (!(tau > 0.0))
        throw std::invalid_argument("check_kl_corollary: tau must be positive");
    const Regularizer reg = Regularizer::neg_entropy(tau);
    const ValueSolution opt = solve_optimal(m, reg);
    const ValueSolution ev = evaluate_policy(m, reg, pi);
    const StateDistribution mu = stationary_distribution(m, pi);

    VerificationReport report;
    report.identity = Identity::kl_corollary;
    report.tolerance = tol;
    report.per_state.reserve(m.n_states);

    double lhs = 0.0;
    for (std::size_t s = 0; s < m.n_states; ++s) {
        const double kl = detail::kl_divergence(pi.row(s), opt.policy.row(s));
        const double via_bregman = bregman(reg, pi.row(s), opt.policy.row(s)) / tau;
        if (!(std::abs(kl - via_bregman) <= 1e-12))
            throw std::logic_error(
                "check_kl_corollary: Bregman and KL routes disagree at state " +
                std::to_string(s) + " by " + detail::fmt(kl - via_bregman));
        lhs += mu[s] * kl;
        report.per_state.push_back({s, kl, mu[s], opt.interior_flags[s]});
    }
    double rhs = 0.0;
    for (std::size_t s = 0; s < m.n_states; ++s)
        rhs += m.initial_dist[s] * (opt.v[s] - ev.v[s]);
    rhs *= (1.0 - m.discount) / tau;

    report.lhs = lhs;
    report.rhs = rhs;
    report.residual = lhs - rhs;
    report.passed = std::abs(report.residual) <= tol;
    return report;
}

/**
 * Interior-maximizer lemma: when pi* = argmax <q,.> - Omega lies in the
 * relative interior, every normal-cone direction y = q - grad Omega(pi*) is
 * orthogonal to all feasible differences. Linearity reduces "all pi in the
 * simplex" to the vertices, so the check is max_a |y^T (e_a - pi*)| <= tol.
 * Calling this with a boundary maximizer is a precondition error.
 */
inline VerificationReport check_relint_lemma(const Regularizer& reg,
                                             std::span<const double> q_row,
                                             double tol = kVerifyTol) {
    const SimplexMaxResult best = simplex_max(reg, q_row);
    if (!best.interior)
        throw std::invalid_argument(
            "check_relint_lemma: the maximizer is on the simplex boundary; the lemma's "
            "precondition does not hold");

    const std::vector<double> grad = grad_omega(reg, best.argmax);
    std::vector<double> y(q_row.size());
    for (std::size_t a = 0; a < q_row.size(); ++a)
        y[a] = q_row[a] - grad[a];
    double y_dot_pi = 0.0;
    for (std::size_t a = 0; a < q_row.size(); ++a)
        y_dot_pi += y[a] * best.argmax[a];
    double max_dev = 0.0;
    for (std::size_t a = 0; a < q_row.size(); ++a)
        max_dev = std::max(max_dev, std::abs(y[a] - y_dot_pi));

    VerificationReport report;
    report.identity = Identity::relint_lemma;
    report.lhs = max_dev;
    report.rhs = 0.0;
    report.residual = max_dev;
    report.tolerance = tol;
    report.passed = max_dev <= tol;
    return report;
}

}  // namespace regmdp
