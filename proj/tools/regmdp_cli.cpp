// Command-line front end: generate random instances, solve or evaluate them,
// and run the identity-verification suites with machine-readable reports.
//
// Exit codes: 0 success / all checks passed, 1 verification failure,
// 2 usage or input error, 3 numerical breakdown.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regmdp/regmdp.hpp"

namespace {

using namespace regmdp;

struct SeedList {
    std::vector<std::uint64_t> values;
};

/// Accepts "A..B" (inclusive), "A,B,C", or a single "A".
SeedList parse_seeds(const std::string& text) {
    const auto parse_one = [&](const std::string& token) -> std::uint64_t {
        std::size_t consumed = 0;
        unsigned long long value = 0;
        try {
            value = std::stoull(token, &consumed);
        } catch (const std::exception&) {
            consumed = 0;
        }
        if (consumed != token.size() || token.empty())
            throw CLI::ValidationError("--seeds", "bad seed token '" + token + "'");
        return value;
    };

    SeedList out;
    const auto range_pos = text.find("..");
    if (range_pos != std::string::npos) {
        const std::uint64_t lo = parse_one(text.substr(0, range_pos));
        const std::uint64_t hi = parse_one(text.substr(range_pos + 2));
        if (hi < lo)
            throw CLI::ValidationError("--seeds", "range '" + text + "' is descending");
        for (std::uint64_t s = lo; s <= hi; ++s)
            out.values.push_back(s);
        return out;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string token =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        out.values.push_back(parse_one(token));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

std::pair<std::size_t, std::size_t> parse_sizes(const std::string& text) {
    const auto x_pos = text.find('x');
    std::size_t consumed_n = 0, consumed_m = 0;
    unsigned long long n = 0, m = 0;
    if (x_pos != std::string::npos) {
        try {
            n = std::stoull(text.substr(0, x_pos), &consumed_n);
            m = std::stoull(text.substr(x_pos + 1), &consumed_m);
        } catch (const std::exception&) {
            consumed_n = 0;
        }
    }
    if (x_pos == std::string::npos || consumed_n != x_pos ||
        consumed_m != text.size() - x_pos - 1 || n == 0 || m == 0)
        throw CLI::ValidationError("--sizes", "expected NxM with positive integers, got '" +
                                                  text + "'");
    return {n, m};
}

const std::vector<Identity> kAllIdentities = {Identity::pdl,          Identity::basic_lemma,
                                              Identity::normal_cone,  Identity::relint_lemma,
                                              Identity::main_theorem, Identity::kl_corollary};

std::vector<Identity> parse_identities(const std::string& text) {
    std::vector<Identity> out;
    const auto add_unique = [&](Identity id) {
        if (std::find(out.begin(), out.end(), id) == out.end())
            out.push_back(id);
    };
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string token =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (token == "all")
            for (Identity id : kAllIdentities)
                add_unique(id);
        else if (token == "pdl")
            add_unique(Identity::pdl);
        else if (token == "basic")
            add_unique(Identity::basic_lemma);
        else if (token == "normalcone")
            add_unique(Identity::normal_cone);
        else if (token == "relint")
            add_unique(Identity::relint_lemma);
        else if (token == "main")
            add_unique(Identity::main_theorem);
        else if (token == "kl")
            add_unique(Identity::kl_corollary);
        else
            throw CLI::ValidationError("--identity", "unknown identity '" + token + "'");
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    // report entries in the canonical order regardless of how they were asked
    std::sort(out.begin(), out.end(), [](Identity a, Identity b) {
        return std::find(kAllIdentities.begin(), kAllIdentities.end(), a) <
               std::find(kAllIdentities.begin(), kAllIdentities.end(), b);
    });
    return out;
}

void emit(const std::string& content, const std::string& out_path,
          const std::string& summary) {
    if (out_path.empty()) {
        std::cout << content;
    } else {
        io::write_file(out_path, content);
        std::cout << summary << "\n";
    }
}

// ---------------------------------------------------------------------------
// verify

struct VerifyCase {
    std::int64_t seed = -1;  // -1 for file-sourced instances
    Mdp mdp;
    Policy pi;
    Policy pi_prime;
    std::uint64_t noise_seed = 0;  // stream for the occupancy-identity vectors
};

VerificationReport worst_of(VerificationReport a, const VerificationReport& b) {
    const bool both = a.passed && b.passed;
    if (std::abs(b.residual) > std::abs(a.residual))
        a = b;
    a.passed = both;
    return a;
}

VerificationReport run_identity(const VerifyCase& c, Identity id, const Regularizer& reg,
                                double tol) {
    switch (id) {
    case Identity::pdl:
        return worst_of(check_pdl(c.mdp, reg, c.pi, c.pi_prime, tol),
                        check_pdl(c.mdp, reg, c.pi_prime, c.pi, tol));
    case Identity::basic_lemma: {
        SeededRng rng(c.noise_seed);
        VerificationReport worst;
        bool first = true;
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> x(c.mdp.n_states);
            for (double& xi : x)
                xi = rng.gaussian();
            const VerificationReport rep = check_basic_lemma(c.mdp, c.pi, x, tol);
            worst = first ? rep : worst_of(worst, rep);
            first = false;
        }
        return worst;
    }
    case Identity::normal_cone: {
        const ValueSolution opt = solve_optimal(c.mdp, reg);
        const auto certs = normal_cone_certificates(reg, opt, tol);
        VerificationReport rep;
        rep.identity = Identity::normal_cone;
        rep.tolerance = tol;
        rep.passed = true;
        rep.lhs = 0.0;
        for (std::size_t s = 0; s < certs.size(); ++s) {
            rep.lhs = std::max(rep.lhs, certs[s].max_violation);
            rep.passed = rep.passed && certs[s].member;
            rep.per_state.push_back({s, certs[s].max_violation, 0.0, certs[s].interior});
        }
        rep.rhs = 0.0;
        rep.residual = rep.lhs;
        return rep;
    }
    case Identity::relint_lemma: {
        const ValueSolution opt = solve_optimal(c.mdp, reg);
        VerificationReport rep;
        rep.identity = Identity::relint_lemma;
        rep.tolerance = tol;
        rep.passed = true;
        rep.lhs = 0.0;
        for (std::size_t s = 0; s < c.mdp.n_states; ++s) {
            if (!opt.interior_flags[s]) {  // the lemma conditions on interiority
                rep.per_state.push_back({s, 0.0, 0.0, false});
                continue;
            }
            const VerificationReport state_rep = check_relint_lemma(reg, opt.q_row(s), tol);
            rep.lhs = std::max(rep.lhs, state_rep.lhs);
            rep.passed = rep.passed && state_rep.passed;
            rep.per_state.push_back({s, state_rep.lhs, 0.0, true});
        }
        rep.rhs = 0.0;
        rep.residual = rep.lhs;
        return rep;
    }
    case Identity::main_theorem:
        return check_main_theorem(c.mdp, reg, c.pi, tol);
    case Identity::kl_corollary:
        return check_kl_corollary(c.mdp, reg.tau(), c.pi, tol);
    }
    throw std::logic_error("unreachable identity");
}

int run_verify(const std::vector<VerifyCase>& cases, const std::vector<Identity>& identities,
               const Regularizer& reg, double tol, const std::string& reg_spec,
               const std::string& out_path) {
    std::string report = "{\n";
    report += "  \"command\": \"verify\",\n";
    report += "  \"reg\": \"" + reg_spec + "\",\n";
    report += "  \"tolerance\": " + io::format_number(tol) + ",\n";
    report += "  \"entries\": [\n";

    std::size_t total = 0, passed_count = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        for (std::size_t k = 0; k < identities.size(); ++k) {
            const VerificationReport rep = run_identity(cases[i], identities[k], reg, tol);
            ++total;
            passed_count += rep.passed ? 1 : 0;
            report += "    {\n      \"seed\": " + std::to_string(cases[i].seed) + ",\n";
            report += io::report_fields_json(rep, "      ");
            report += "\n    }";
            report += (i + 1 < cases.size() || k + 1 < identities.size()) ? ",\n" : "\n";
        }
    }
    report += "  ],\n";
    report += "  \"total\": " + std::to_string(total) + ",\n";
    report += "  \"passed_count\": " + std::to_string(passed_count) + ",\n";
    report += std::string("  \"all_passed\": ") + (passed_count == total ? "true" : "false") +
              "\n}\n";

    emit(report, out_path,
         "verify: " + std::to_string(passed_count) + "/" + std::to_string(total) +
             " checks passed");
    return passed_count == total ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular regularized-MDP solver and identity-verification toolkit"};
    app.require_subcommand(1);

    std::string mdp_path, policy_path, reg_spec, seeds_text, sizes_text, identity_text = "all",
                                                                         out_path;
    double gamma = 0.9;
    double tol = -1.0;  // command-specific default, resolved below

    CLI::App* generate = app.add_subcommand("generate", "Write a seeded random MDP instance");
    generate->add_option("--seeds", seeds_text, "single seed")->required();
    generate->add_option("--sizes", sizes_text, "NxM states x actions")->required();
    generate->add_option("--gamma", gamma, "discount factor")->required();
    generate->add_option("--out", out_path, "output path (stdout if omitted)");

    CLI::App* solve = app.add_subcommand("solve", "Solve for the regularized optimum");
    solve->add_option("--mdp", mdp_path, "MDP file")->required();
    solve->add_option("--reg", reg_spec, "regularizer spec, e.g. entropy:0.1")->required();
    solve->add_option("--tol", tol, "Bellman residual tolerance (default 1e-10)");
    solve->add_option("--out", out_path, "output path (stdout if omitted)");

    CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a fixed policy");
    evaluate->add_option("--mdp", mdp_path, "MDP file")->required();
    evaluate->add_option("--policy", policy_path, "policy file")->required();
    evaluate->add_option("--reg", reg_spec, "regularizer spec")->required();
    evaluate->add_option("--out", out_path, "output path (stdout if omitted)");

    CLI::App* verify = app.add_subcommand("verify", "Check the value/divergence identities");
    verify->add_option("--reg", reg_spec, "regularizer spec")->required();
    verify->add_option("--identity", identity_text,
                       "comma list of pdl,basic,normalcone,relint,main,kl or all");
    verify->add_option("--mdp", mdp_path, "verify this instance instead of seeded ones");
    verify->add_option("--policy", policy_path, "policy file (file mode only)");
    verify->add_option("--seeds", seeds_text, "A..B or A,B,C");
    verify->add_option("--sizes", sizes_text, "NxM states x actions");
    verify->add_option("--gamma", gamma, "discount factor");
    verify->add_option("--tol", tol, "verification tolerance (default 1e-7)");
    verify->add_option("--out", out_path, "report path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate->parsed()) {
            const SeedList seeds = parse_seeds(seeds_text);
            if (seeds.values.size() != 1)
                throw CLI::ValidationError("--seeds", "generate takes exactly one seed");
            const auto [n_states, n_actions] = parse_sizes(sizes_text);
            const Mdp m = random_mdp(n_states, n_actions, gamma, seeds.values[0]);
            emit(io::mdp_to_json(m), out_path, "generate: wrote " + out_path);
            return 0;
        }

        if (solve->parsed()) {
            const Mdp m = io::load_mdp(mdp_path);
            const Regularizer reg = Regularizer::parse(reg_spec);
            const ValueSolution sol = solve_optimal(m, reg, tol > 0.0 ? tol : kSolverTol);
            emit(io::solution_to_json(sol), out_path, "solve: wrote " + out_path);
            return 0;
        }

        if (evaluate->parsed()) {
            const Mdp m = io::load_mdp(mdp_path);
            const Policy pi = io::load_policy(policy_path, m);
            const Regularizer reg = Regularizer::parse(reg_spec);
            const ValueSolution sol = evaluate_policy(m, reg, pi);
            emit(io::solution_to_json(sol), out_path, "evaluate: wrote " + out_path);
            return 0;
        }

        // verify
        const Regularizer reg = Regularizer::parse(reg_spec);
        const std::vector<Identity> identities = parse_identities(identity_text);
        const double verify_tol = tol > 0.0 ? tol : kVerifyTol;
        std::vector<VerifyCase> cases;
        if (!mdp_path.empty()) {
            if (!seeds_text.empty() || !sizes_text.empty())
                throw CLI::ValidationError("verify",
                                           "--mdp cannot be combined with --seeds/--sizes");
            VerifyCase c;
            c.seed = -1;
            c.mdp = io::load_mdp(mdp_path);
            c.pi = policy_path.empty()
                       ? random_policy(c.mdp.n_states, c.mdp.n_actions, 1001)
                       : io::load_policy(policy_path, c.mdp);
            c.pi_prime = random_policy(c.mdp.n_states, c.mdp.n_actions, 1002);
            c.noise_seed = 1003;
            cases.push_back(std::move(c));
        } else {
            if (seeds_text.empty() || sizes_text.empty() || verify->count("--gamma") == 0)
                throw CLI::ValidationError(
                    "verify", "either --mdp or all of --seeds/--sizes/--gamma are required");
            const SeedList seeds = parse_seeds(seeds_text);
            const auto [n_states, n_actions] = parse_sizes(sizes_text);
            for (std::uint64_t seed : seeds.values) {
                VerifyCase c;
                c.seed = static_cast<std::int64_t>(seed);
                c.mdp = random_mdp(n_states, n_actions, gamma, seed);
                c.pi = random_policy(n_states, n_actions, seed * 7919 + 1);
                c.pi_prime = random_policy(n_states, n_actions, seed * 7919 + 2);
                c.noise_seed = seed * 7919 + 3;
                cases.push_back(std::move(c));
            }
        }
        return run_verify(cases, identities, reg, verify_tol, reg_spec, out_path);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const io::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
}
