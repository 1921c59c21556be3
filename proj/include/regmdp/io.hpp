#pragma once

// File formats. Models, policies, solutions, and verification reports are
// stored as UTF-8 JSON with all numbers written at 17 significant digits, so
// save/load round-trips reproduce every double bit-exactly and identical runs
// produce byte-identical files. Writing is hand-rolled to pin the byte
// layout; parsing goes through nlohmann::json.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "regmdp/identities.hpp"
#include "regmdp/mdp.hpp"
#include "regmdp/solver.hpp"

namespace regmdp::io {

/// Malformed input file: unreadable, not JSON, or missing/mistyped fields.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// 17 significant digits; enough to reproduce any double exactly.
inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace detail {

inline void append_vector(std::string& out, std::span<const double> v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ", ";
        out += format_number(v[i]);
    }
    out += ']';
}

inline void append_matrix(std::string& out, std::span<const double> flat, std::size_t rows,
                          std::size_t cols, const std::string& row_indent) {
    out += "[\n";
    for (std::size_t i = 0; i < rows; ++i) {
        out += row_indent;
        append_vector(out, flat.subspan(i * cols, cols));
        out += (i + 1 < rows) ? ",\n" : "\n";
    }
    out += row_indent.substr(2);  // closing bracket sits one level shallower
    out += ']';
}

}  // namespace detail

inline std::string mdp_to_json(const Mdp& m) {
    std::string out = "{\n";
    out += "  \"n_states\": " + std::to_string(m.n_states) + ",\n";
    out += "  \"n_actions\": " + std::to_string(m.n_actions) + ",\n";
    out += "  \"discount\": " + format_number(m.discount) + ",\n";
    out += "  \"reward\": ";
    detail::append_matrix(out, m.reward, m.n_states, m.n_actions, "    ");
    out += ",\n  \"transition\": [\n";
    for (std::size_t s = 0; s < m.n_states; ++s) {
        out += "    ";
        detail::append_matrix(out, {m.transition.data() + s * m.n_actions * m.n_states,
                                    m.n_actions * m.n_states},
                              m.n_actions, m.n_states, "      ");
        out += (s + 1 < m.n_states) ? ",\n" : "\n";
    }
    out += "  ],\n";
    out += "  \"initial_dist\": ";
    detail::append_vector(out, m.initial_dist);
    out += "\n}\n";
    return out;
}

inline std::string policy_to_json(const Policy& pi) {
    std::string out = "{\n  \"probs\": ";
    detail::append_matrix(out, pi.probs, pi.n_states, pi.n_actions, "    ");
    out += "\n}\n";
    return out;
}

inline std::string solution_to_json(const ValueSolution& sol) {
    const std::size_t n_states = sol.v.size();
    const std::size_t n_actions = sol.policy.n_actions;
    std::string out = "{\n";
    out += "  \"q\": ";
    detail::append_matrix(out, sol.q, n_states, n_actions, "    ");
    out += ",\n  \"v\": ";
    detail::append_vector(out, sol.v);
    out += ",\n  \"policy\": {\n    \"probs\": ";
    detail::append_matrix(out, sol.policy.probs, n_states, n_actions, "      ");
    out += "\n  },\n";
    out += "  \"iterations\": " + std::to_string(sol.iterations) + ",\n";
    out += "  \"residual\": " + format_number(sol.residual) + ",\n";
    out += "  \"interior_flags\": [";
    for (std::size_t s = 0; s < n_states; ++s) {
        if (s)
            out += ", ";
        out += sol.interior_flags[s] ? "true" : "false";
    }
    out += "]\n}\n";
    return out;
}

/// Inner key/value fields of a report, without the enclosing braces, so
/// callers can splice extra context (seed, instance) into the same object.
/// The main-theorem entry also states which branch held.
inline std::string report_fields_json(const VerificationReport& report,
                                      const std::string& line_indent) {
    const std::string& ind = line_indent;
    std::string out;
    out += ind + "\"identity\": \"" + std::string(to_string(report.identity)) + "\",\n";
    out += ind + "\"lhs\": " + format_number(report.lhs) + ",\n";
    out += ind + "\"rhs\": " + format_number(report.rhs) + ",\n";
    out += ind + "\"residual\": " + format_number(report.residual) + ",\n";
    out += ind + "\"tolerance\": " + format_number(report.tolerance) + ",\n";
    out += ind + "\"passed\": " + std::string(report.passed ? "true" : "false");
    if (report.identity == Identity::main_theorem) {
        const bool equality = std::abs(report.residual) <= report.tolerance;
        const bool inequality = report.lhs <= report.rhs + report.tolerance;
        out += ",\n" + ind + "\"equality\": " + (equality ? "true" : "false");
        out += ",\n" + ind + "\"inequality_holds\": " + (inequality ? "true" : "false");
    }
    if (!report.per_state.empty()) {
        out += ",\n" + ind + "\"per_state\": [\n";
        for (std::size_t i = 0; i < report.per_state.size(); ++i) {
            const StateDiagnostic& d = report.per_state[i];
            out += ind + "  {\"state\": " + std::to_string(d.state) +
                   ", \"term\": " + format_number(d.term) +
                   ", \"weight\": " + format_number(d.weight) +
                   ", \"interior\": " + (d.interior ? "true" : "false") + "}";
            out += (i + 1 < report.per_state.size()) ? ",\n" : "\n";
        }
        out += ind + "]";
    }
    return out;
}

inline std::string report_to_json(const VerificationReport& report) {
    return "{\n" + report_fields_json(report, "  ") + "\n}\n";
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out.flush())
        throw std::runtime_error("failed writing '" + path + "'");
}

namespace detail {

inline nlohmann::json parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("parse error in '" + path + "': " + e.what());
    }
}

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* field,
                                           const std::string& path) {
    const auto it = j.find(field);
    if (it == j.end())
        throw ParseError("missing field '" + std::string(field) + "' in '" + path + "'");
    return *it;
}

inline double as_number(const nlohmann::json& j, const char* field, const std::string& path) {
    if (!j.is_number())
        throw ParseError("field '" + std::string(field) + "' in '" + path +
                         "' must be a number");
    return j.get<double>();
}

inline std::vector<double> as_vector(const nlohmann::json& j, const char* field,
                                     const std::string& path, std::size_t expected) {
    if (!j.is_array() || j.size() != expected)
        throw ParseError("field '" + std::string(field) + "' in '" + path + "' must be an array of " +
                         std::to_string(expected) + " numbers");
    std::vector<double> out;
    out.reserve(expected);
    for (const auto& x : j)
        out.push_back(as_number(x, field, path));
    return out;
}

}  // namespace detail

inline void save_mdp(const Mdp& m, const std::string& path) {
    write_file(path, mdp_to_json(m));
}

inline Mdp load_mdp(const std::string& path) {
    const nlohmann::json j = detail::parse_file(path);
    if (!j.is_object())
        throw ParseError("top level of '" + path + "' must be an object");

    Mdp m;
    const auto& n_states = detail::require_field(j, "n_states", path);
    const auto& n_actions = detail::require_field(j, "n_actions", path);
    if (!n_states.is_number_unsigned() || !n_actions.is_number_unsigned())
        throw ParseError("fields 'n_states'/'n_actions' in '" + path +
                         "' must be nonnegative integers");
    m.n_states = n_states.get<std::size_t>();
    m.n_actions = n_actions.get<std::size_t>();
    m.discount = detail::as_number(detail::require_field(j, "discount", path), "discount", path);

    const auto& reward = detail::require_field(j, "reward", path);
    if (!reward.is_array() || reward.size() != m.n_states)
        throw ParseError("field 'reward' in '" + path + "' must be an array of " +
                         std::to_string(m.n_states) + " rows");
    for (const auto& row : reward) {
        const auto values = detail::as_vector(row, "reward", path, m.n_actions);
        m.reward.insert(m.reward.end(), values.begin(), values.end());
    }

    const auto& transition = detail::require_field(j, "transition", path);
    if (!transition.is_array() || transition.size() != m.n_states)
        throw ParseError("field 'transition' in '" + path + "' must be an array of " +
                         std::to_string(m.n_states) + " state blocks");
    for (const auto& block : transition) {
        if (!block.is_array() || block.size() != m.n_actions)
            throw ParseError("field 'transition' in '" + path + "' must hold " +
                             std::to_string(m.n_actions) + " rows per state");
        for (const auto& row : block) {
            const auto values = detail::as_vector(row, "transition", path, m.n_states);
            m.transition.insert(m.transition.end(), values.begin(), values.end());
        }
    }

    m.initial_dist = detail::as_vector(detail::require_field(j, "initial_dist", path),
                                       "initial_dist", path, m.n_states);

    const ValidationResult check = validate_mdp(m);
    if (!check.ok())
        throw std::invalid_argument("invalid MDP in '" + path + "': " + check.to_string());
    return m;
}

inline void save_policy(const Policy& pi, const std::string& path) {
    write_file(path, policy_to_json(pi));
}

/// Loads a policy and validates it against the given model.
inline Policy load_policy(const std::string& path, const Mdp& m) {
    const nlohmann::json j = detail::parse_file(path);
    if (!j.is_object())
        throw ParseError("top level of '" + path + "' must be an object");
    const auto& probs = detail::require_field(j, "probs", path);
    if (!probs.is_array() || probs.size() != m.n_states)
        throw ParseError("field 'probs' in '" + path + "' must be an array of " +
                         std::to_string(m.n_states) + " rows");

    Policy pi;
    pi.n_states = m.n_states;
    pi.n_actions = m.n_actions;
    for (const auto& row : probs) {
        const auto values = detail::as_vector(row, "probs", path, m.n_actions);
        pi.probs.insert(pi.probs.end(), values.begin(), values.end());
    }
    const ValidationResult check = validate_policy(m, pi);
    if (!check.ok())
        throw std::invalid_argument("invalid policy in '" + path + "': " + check.to_string());
    return pi;
}

inline void save_solution(const ValueSolution& sol, const std::string& path) {
    write_file(path, solution_to_json(sol));
}

}  // namespace regmdp::io
