#pragma once

#include "nh/engine.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nh {

using json = nlohmann::json;

enum class input_error_code {
    malformed_json = 10,
    missing_field = 11,
    wrong_type = 12,
    negative_exponent = 13,
    wrong_length = 14,
    s_out_of_range = 15,
    zero_coefficient = 16,
    malformed_rational = 17,
    bad_coefficient_key = 18,
    unknown_mode = 19,
    bad_probe = 20,
    bad_certificate = 21,
};

std::string to_string(input_error_code c);

/// Validation failure with the 1-based line of the offending value (0 if unknown).
class input_error : public std::runtime_error {
public:
    input_error(input_error_code code, std::size_t line, const std::string& what);
    input_error_code code() const { return code_; }
    std::size_t line() const { return line_; }

private:
    input_error_code code_;
    std::size_t line_;
};

enum class run_mode {
    decide,
    decide_graph,
    decide_general,
    faces,
    decompose,
    probe_divergence,
    probe_sum,
    probe_decay,
    verify,
};

std::string to_string(run_mode m);
std::optional<run_mode> parse_mode(const std::string& s);

struct problem_input {
    domain_spec spec;
    std::vector<exponent_set> lambda;
    vector_polynomial poly;              // coefficients, missing entries set to 1
    std::optional<run_mode> mode;
    json probe = json::object();

    bool operator==(const problem_input& o) const;
};

/// Maps JSON pointers to the line where their value starts.
std::size_t locate_line(const std::string& text, const std::string& pointer);

problem_input parse_input(const std::string& text);
/// Canonical JSON form; parse_input(dump(emit_input(x))) == x.
json emit_input(const problem_input& in);

std::string rational_text(const rational& q);
rational parse_rational(const std::string& s);

json vector_json(const rvector& v);
json exponent_json(const exponent& m);
json face_json(const face_spec& f);
json lambda_json(const std::vector<exponent_set>& lam);

json certificate_json(const unbounded_certificate& c);
unbounded_certificate certificate_from_json(const json& j, std::size_t n);
json graph_certificate_json(const graph_certificate& c);
graph_certificate graph_certificate_from_json(const json& j, std::size_t n);

}  // namespace nh
