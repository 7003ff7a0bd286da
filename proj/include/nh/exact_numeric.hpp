#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nh {

using rational = mpq_class;
using rvector = std::vector<rational>;
using bit_vector = std::vector<bool>;

/// Raised when a numeric routine receives inconsistent dimensions.
class dimension_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct rmatrix {
    std::vector<rvector> rows;

    std::size_t row_count() const { return rows.size(); }
    std::size_t col_count() const { return rows.empty() ? 0 : rows.front().size(); }
};

/// One linear constraint a.x (op) b.
struct linear_row {
    rvector a;
    rational b;
};

/// Equalities a.x = b, strict rows a.x > b and weak rows a.x >= b.
struct strict_system {
    std::size_t dim = 0;
    std::vector<linear_row> equalities;
    std::vector<linear_row> strict;
    std::vector<linear_row> weak;
};

/// Finitely generated cone: CoSp(generators) + span(lineality).
struct cone_generators {
    std::vector<rvector> rays;
    std::vector<rvector> lineality;
};

rvector zero_vector(std::size_t n);
rvector unit_vector(std::size_t n, std::size_t j);
rational dot(const rvector& x, const rvector& y);
rvector add(const rvector& x, const rvector& y);
rvector sub(const rvector& x, const rvector& y);
rvector scale(const rvector& x, const rational& c);
bool is_zero(const rvector& x);

/// Scales x to a primitive integer vector, keeping its direction.
rvector primitive(const rvector& x);

/// Primitive integer vector with first nonzero coordinate positive.
rvector canonical_line(const rvector& x);

std::string to_string(const rational& q);
std::string to_string(const rvector& x);

/// Rank of the row span, by fraction-free elimination.
std::size_t rank(const rmatrix& m);
std::size_t rank(const std::vector<rvector>& rows);

/// Basis of {x : row.x = 0 for every row}; dim gives the ambient size.
std::vector<rvector> null_space(const std::vector<rvector>& rows, std::size_t dim);

/// Reduced row echelon form; returns pivot columns.
std::vector<std::size_t> rref(std::vector<rvector>& rows);

/// Solves the system exactly. Returns a witness that satisfies every row or
/// nothing when the system is infeasible.
std::optional<rvector> solve_strict(const strict_system& sys);

/// True when x satisfies every row of sys exactly.
bool satisfies(const strict_system& sys, const rvector& x);

/// Target lies in the GF(2) span of span_vectors.
bool gf2_contains(const std::vector<bit_vector>& span_vectors, const bit_vector& target);

/// Coefficients c in {0,1} with sum c_i v_i = target over GF(2), if any.
std::optional<std::vector<bool>> gf2_solve(const std::vector<bit_vector>& span_vectors,
                                           const bit_vector& target);

/// Generators of {x : row.x >= 0 for all rows} in R^dim, canonical and
/// deduplicated. Lineality vectors are canonical lines.
cone_generators cone_from_inequalities(const std::vector<rvector>& rows, std::size_t dim);

}  // namespace nh
