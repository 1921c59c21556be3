#pragma once

// Strictly convex regularizers on the action simplex: values, gradients,
// Bregman divergences, and the regularized maximization
//
//   max_{pi in Delta(A)}  <q, pi> - Omega(pi).
//
// The negative-entropy path has the softmax/log-sum-exp closed form; the
// squared-norm and generic separable paths solve the KKT system by bisection
// on the Lagrange multiplier of the sum-to-one constraint.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace regmdp {

/// Relative-interior cutoff: a simplex point is treated as interior when
/// every entry exceeds this. Configurable at each call site.
inline constexpr double kRelintEps = 1e-9;

/// Boundary-inclusive relative-interior test: min_a pi[a] > epsilon.
inline bool is_relint(std::span<const double> pi_row, double epsilon = kRelintEps) {
    double lo = std::numeric_limits<double>::infinity();
    for (double p : pi_row)
        lo = std::min(lo, p);
    return lo > epsilon;
}

/**
 * Strictly convex regularizer Omega on the simplex, scaled by a strength
 * tau > 0. Three kinds:
 *
 *  - neg_entropy:  Omega(pi) = tau * sum_a pi_a log pi_a   (0 log 0 := 0)
 *  - squared_norm: Omega(pi) = (tau/2) * ||pi||^2
 *  - separable:    Omega(pi) = tau * sum_a phi(pi_a) for a user-supplied
 *    strictly convex phi with derivative dphi and inverse derivative
 *    inv_dphi (monotone; may return out-of-[0,1] values, which the simplex
 *    maximization clips).
 *
 * Value semantics; instances are immutable and freely shareable.
 */
class Regularizer {
public:
    enum class Kind { neg_entropy, squared_norm, separable };

    struct SeparablePotential {
        std::function<double(double)> phi;
        std::function<double(double)> dphi;
        std::function<double(double)> inv_dphi;
    };

    static Regularizer neg_entropy(double tau) { return Regularizer(Kind::neg_entropy, tau); }
    static Regularizer squared_norm(double tau) { return Regularizer(Kind::squared_norm, tau); }
    static Regularizer separable(SeparablePotential potential, double tau) {
        Regularizer reg(Kind::separable, tau);
        reg.potential_ = std::move(potential);
        return reg;
    }

    /// Parses a CLI spec string: "entropy:TAU" or "l2:TAU", e.g. "entropy:0.1".
    static Regularizer parse(const std::string& spec) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("bad regularizer spec '" + spec +
                                        "': expected NAME:TAU");
        const std::string name = spec.substr(0, colon);
        const std::string tau_str = spec.substr(colon + 1);
        double tau = 0.0;
        std::size_t consumed = 0;
        try {
            tau = std::stod(tau_str, &consumed);
        } catch (const std::exception&) {
            consumed = 0;
        }
        if (consumed != tau_str.size() || !(tau > 0.0) || !std::isfinite(tau))
            throw std::invalid_argument("bad regularizer strength '" + tau_str +
                                        "' in spec '" + spec + "'");
        if (name == "entropy")
            return neg_entropy(tau);
        if (name == "l2")
            return squared_norm(tau);
        throw std::invalid_argument("unknown regularizer '" + name + "' in spec '" + spec +
                                    "' (expected entropy or l2)");
    }

    Kind kind() const { return kind_; }
    double tau() const { return tau_; }
    const SeparablePotential& potential() const { return potential_; }

private:
    Regularizer(Kind kind, double tau) : kind_(kind), tau_(tau) {
        if (!(tau > 0.0) || !std::isfinite(tau))
            throw std::invalid_argument("regularizer strength tau must be positive");
    }

    Kind kind_;
    double tau_;
    SeparablePotential potential_;
};

/// Maximizer of <q,pi> - Omega(pi) over the simplex, with the attained value,
/// an interiority flag, and the multiplier of the sum-to-one constraint.
struct SimplexMaxResult {
    std::vector<double> argmax;
    double value = 0.0;
    bool interior = false;
    double multiplier = 0.0;
};

namespace detail {

inline void require_simplex(std::span<const double> pi_row, const char* where) {
    double sum = 0.0;
    for (double p : pi_row) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw std::invalid_argument(std::string(where) +
                                        ": input is not a probability vector (entry " +
                                        std::to_string(p) + ")");
        sum += p;
    }
    if (!(std::abs(sum - 1.0) <= 1e-12))
        throw std::invalid_argument(std::string(where) +
                                    ": input is not a probability vector (sum " +
                                    std::to_string(sum) + ")");
}

inline double omega_unchecked(const Regularizer& reg, std::span<const double> pi_row) {
    const double tau = reg.tau();
    double acc = 0.0;
    switch (reg.kind()) {
    case Regularizer::Kind::neg_entropy:
        for (double p : pi_row)
            if (p > 0.0)
                acc += p * std::log(p);
        return tau * acc;
    case Regularizer::Kind::squared_norm:
        for (double p : pi_row)
            acc += p * p;
        return 0.5 * tau * acc;
    case Regularizer::Kind::separable:
        for (double p : pi_row)
            acc += reg.potential().phi(p);
        return tau * acc;
    }
    return 0.0;  // unreachable
}

}  // namespace detail

/// Omega(pi). At the simplex boundary the negative-entropy value uses the
/// continuous extension 0 log 0 = 0.
inline double omega(const Regularizer& reg, std::span<const double> pi_row) {
    detail::require_simplex(pi_row, "omega");
    return detail::omega_unchecked(reg, pi_row);
}

/// grad Omega(pi). The negative-entropy gradient is unbounded at the
/// boundary, so entries there are a domain error; squared_norm and any
/// boundary-safe separable potential accept boundary points.
inline std::vector<double> grad_omega(const Regularizer& reg, std::span<const double> pi_row) {
    detail::require_simplex(pi_row, "grad_omega");
    const double tau = reg.tau();
    std::vector<double> g(pi_row.size());
    switch (reg.kind()) {
    case Regularizer::Kind::neg_entropy:
        for (std::size_t a = 0; a < pi_row.size(); ++a) {
            if (!(pi_row[a] > 0.0))
                throw std::domain_error(
                    "grad_omega: negative-entropy gradient undefined at the simplex "
                    "boundary (pi[" + std::to_string(a) + "] = 0)");
            g[a] = tau * (std::log(pi_row[a]) + 1.0);
        }
        break;
    case Regularizer::Kind::squared_norm:
        for (std::size_t a = 0; a < pi_row.size(); ++a)
            g[a] = tau * pi_row[a];
        break;
    case Regularizer::Kind::separable:
        for (std::size_t a = 0; a < pi_row.size(); ++a)
            g[a] = tau * reg.potential().dphi(pi_row[a]);
        break;
    }
    return g;
}

/**
 * Bregman divergence D_Omega(pi, pi') =
 *   Omega(pi) - Omega(pi') - <grad Omega(pi'), pi - pi'>.
 *
 * Nonnegative, and zero only at pi = pi', by strict convexity. The first
 * argument may sit on the boundary (Omega uses its continuous extension);
 * the second must lie in the gradient's domain.
 */
inline double bregman(const Regularizer& reg, std::span<const double> pi,
                      std::span<const double> pi_prime) {
    detail::require_simplex(pi, "bregman");
    const std::vector<double> g = grad_omega(reg, pi_prime);
    double cross = 0.0;
    for (std::size_t a = 0; a < pi.size(); ++a)
        cross += g[a] * (pi[a] - pi_prime[a]);
    return detail::omega_unchecked(reg, pi) - detail::omega_unchecked(reg, pi_prime) - cross;
}

namespace detail {

/// Max-subtracted log-sum-exp; q/tau can reach 1e3 and beyond for small tau.
inline double logsumexp(std::span<const double> z) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : z)
        m = std::max(m, x);
    double acc = 0.0;
    for (double x : z)
        acc += std::exp(x - m);
    return m + std::log(acc);
}

inline SimplexMaxResult simplex_max_entropy(double tau, std::span<const double> q,
                                            double relint_eps) {
    const std::size_t n = q.size();
    std::vector<double> z(n);
    for (std::size_t a = 0; a < n; ++a)
        z[a] = q[a] / tau;
    const double lse = logsumexp(z);

    SimplexMaxResult res;
    res.argmax.resize(n);
    for (std::size_t a = 0; a < n; ++a)
        res.argmax[a] = std::exp(z[a] - lse);
    res.value = tau * lse;
    res.multiplier = tau * lse - tau;
    res.interior = is_relint(res.argmax, relint_eps);
    return res;
}

/// pi_a(nu) = clip(inv_dphi((q_a - nu)/tau)) for the separable KKT system;
/// NaN and -inf from out-of-domain inv_dphi arguments clip to 0.
inline double clip_unit(double x) {
    if (!(x > 0.0))
        return 0.0;
    return std::min(x, 1.0);
}

inline SimplexMaxResult simplex_max_separable(const Regularizer& reg, std::span<const double> q,
                                              double relint_eps) {
    const std::size_t n = q.size();
    const double tau = reg.tau();
    const bool l2 = reg.kind() == Regularizer::Kind::squared_norm;

    const auto inv = [&](double y) { return l2 ? y : reg.potential().inv_dphi(y); };
    const auto mass = [&](double nu, std::vector<double>& pi) {
        double sum = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            pi[a] = clip_unit(inv((q[a] - nu) / tau));
            sum += pi[a];
        }
        return sum;
    };

    // Bracket the multiplier: the clipped mass is continuous and
    // nonincreasing in nu, tends to n as nu -> -inf and to 0 as nu -> +inf.
    double q_lo = q[0], q_hi = q[0];
    for (double x : q) {
        q_lo = std::min(q_lo, x);
        q_hi = std::max(q_hi, x);
    }
    std::vector<double> pi(n);
    double lo = q_lo - tau, hi = q_hi + tau, step = tau;
    int expand = 0;
    while (mass(lo, pi) < 1.0) {
        lo -= step;
        step *= 2.0;
        if (++expand > 200)
            throw std::invalid_argument(
                "simplex_max: could not bracket the simplex multiplier; the separable "
                "potential violates its monotonicity contract");
    }
    step = tau;
    expand = 0;
    while (mass(hi, pi) > 1.0) {
        hi += step;
        step *= 2.0;
        if (++expand > 200)
            throw std::invalid_argument(
                "simplex_max: could not bracket the simplex multiplier; the separable "
                "potential violates its monotonicity contract");
    }

    double nu = 0.5 * (lo + hi);
    double sum = mass(nu, pi);
    for (int iter = 0; iter < 500 && std::abs(sum - 1.0) > 1e-13; ++iter) {
        if (sum > 1.0)
            lo = nu;
        else
            hi = nu;
        nu = 0.5 * (lo + hi);
        sum = mass(nu, pi);
        if (hi - lo <= 1e-16 * (1.0 + std::abs(lo) + std::abs(hi)))
            break;
    }
    if (!(std::abs(sum - 1.0) <= 1e-12))
        throw std::invalid_argument(
            "simplex_max: bisection on the simplex multiplier failed to converge "
            "(|mass - 1| = " + std::to_string(std::abs(sum - 1.0)) + ")");
    // Land exactly on the simplex; the shift is below the bisection tolerance.
    for (double& p : pi)
        p /= sum;

    SimplexMaxResult res;
    res.argmax = std::move(pi);
    double dot = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        dot += q[a] * res.argmax[a];
    res.value = dot - omega_unchecked(reg, res.argmax);
    res.multiplier = nu;
    res.interior = is_relint(res.argmax, relint_eps);
    return res;
}

}  // namespace detail

/**
 * Solves max_{pi in Delta(A)} <q,pi> - Omega(pi).
 *
 * neg_entropy uses pi* = softmax(q/tau) and value = tau * logsumexp(q/tau);
 * the other kinds bisect the KKT multiplier nu of the sum-to-one constraint
 * until |sum_a pi_a(nu) - 1| <= 1e-12. Strict convexity makes the argmax
 * unique, so no tie-breaking is needed.
 */
inline SimplexMaxResult simplex_max(const Regularizer& reg, std::span<const double> q,
                                    double relint_eps = kRelintEps) {
    if (q.empty())
        throw std::invalid_argument("simplex_max: empty score vector");
    for (double x : q)
        if (!std::isfinite(x))
            throw std::invalid_argument("simplex_max: non-finite score");
    if (reg.kind() == Regularizer::Kind::neg_entropy)
        return detail::simplex_max_entropy(reg.tau(), q, relint_eps);
    return detail::simplex_max_separable(reg, q, relint_eps);
}

}  // namespace regmdp
