#include "nh/parity.hpp"

namespace nh {

bit_vector parity_signature(const exponent& m)
{
    bit_vector b(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) b[i] = (m[i] % 2) != 0;
    return b;
}

std::vector<exponent> sigma_class(const exponent_set& omega)
{
    if (omega.size() > 20) throw enumeration_limit("sigma_class: more than 20 points, use the GF(2) path");
    const std::size_t k = omega.size();
    std::vector<exponent> sums;
    sums.reserve(std::size_t{1} << k);
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        exponent s(omega.n, 0);
        for (std::size_t i = 0; i < k; ++i)
            if (mask >> i & 1)
                for (std::size_t j = 0; j < omega.n; ++j) s[j] += omega.points[i][j];
        sums.push_back(std::move(s));
    }
    return sums;
}

std::optional<std::vector<exponent>> odd_witness(const exponent_set& omega)
{
    std::vector<bit_vector> sigs;
    std::vector<const exponent*> members;
    for (const auto& m : omega.points) {
        bit_vector b = parity_signature(m);
        bool nonzero = false;
        for (bool x : b) nonzero = nonzero || x;
        if (!nonzero) continue;
        sigs.push_back(std::move(b));
        members.push_back(&m);
    }
    auto combo = gf2_solve(sigs, bit_vector(omega.n, true));
    if (!combo || omega.n == 0) return std::nullopt;
    std::vector<exponent> out;
    for (std::size_t i = 0; i < members.size(); ++i)
        if ((*combo)[i]) out.push_back(*members[i]);
    return out;
}

bool is_even(const exponent_set& omega) { return !odd_witness(omega).has_value(); }

bool is_even(const std::vector<exponent>& points, std::size_t n) { return is_even(exponent_set(n, points)); }

}  // namespace nh
