#pragma once

#include "nh/exact_numeric.hpp"
#include "nh/newton_poly.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace nh {

/// Thrown by sigma_class when explicit enumeration would be too large.
class enumeration_limit : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Componentwise reduction mod 2.
bit_vector parity_signature(const exponent& m);

/// All 2^|omega| subset sums, in subset-mask order. At most 20 points.
std::vector<exponent> sigma_class(const exponent_set& omega);

/// True when no subset sum has all components odd.
bool is_even(const exponent_set& omega);
bool is_even(const std::vector<exponent>& points, std::size_t n);

/// A subset whose sum is componentwise odd, if one exists. Members with an
/// all-even signature are never included.
std::optional<std::vector<exponent>> odd_witness(const exponent_set& omega);

}  // namespace nh
