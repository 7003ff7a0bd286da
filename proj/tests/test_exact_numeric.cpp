#include <doctest.h>

#include "nh/exact_numeric.hpp"

#include <random>

using namespace nh;

namespace {

rvector v(std::initializer_list<long> xs)
{
    rvector r;
    for (long x : xs) r.emplace_back(x);
    return r;
}

// Laplace expansion; used only as an oracle.
rational det(const std::vector<rvector>& m)
{
    const std::size_t k = m.size();
    if (k == 0) return 1;
    if (k == 1) return m[0][0];
    rational s = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<rvector> minor;
        for (std::size_t r = 1; r < k; ++r) {
            rvector row;
            for (std::size_t j = 0; j < k; ++j)
                if (j != c) row.push_back(m[r][j]);
            minor.push_back(row);
        }
        rational term = m[0][c] * det(minor);
        s += (c % 2 == 0) ? term : rational(-term);
    }
    return s;
}

std::size_t rank_by_minors(const std::vector<rvector>& rows)
{
    if (rows.empty()) return 0;
    const std::size_t R = rows.size(), C = rows[0].size();
    std::size_t best = 0;
    for (std::size_t rmask = 1; rmask < (1u << R); ++rmask)
        for (std::size_t cmask = 1; cmask < (1u << C); ++cmask) {
            if (__builtin_popcount(rmask) != __builtin_popcount(cmask)) continue;
            std::size_t k = __builtin_popcount(rmask);
            if (k <= best) continue;
            std::vector<rvector> sub;
            for (std::size_t r = 0; r < R; ++r) {
                if (!(rmask >> r & 1)) continue;
                rvector row;
                for (std::size_t c = 0; c < C; ++c)
                    if (cmask >> c & 1) row.push_back(rows[r][c]);
                sub.push_back(row);
            }
            if (det(sub) != 0) best = k;
        }
    return best;
}

bool grid_has_witness(const strict_system& sys)
{
    const std::size_t n = sys.dim;
    std::vector<int> idx(n, -16);
    for (;;) {
        rvector x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = rational(idx[i], 8);
        if (satisfies(sys, x)) return true;
        std::size_t i = 0;
        while (i < n && idx[i] == 16) idx[i++] = -16;
        if (i == n) return false;
        ++idx[i];
    }
}

}  // namespace

TEST_CASE("rank examples")
{
    CHECK(rank(std::vector<rvector>{}) == 0);
    CHECK(rank({v({2, 0, 3})}) == 1);
    CHECK(rank({v({0, 0, 2}), v({3, 3, 0}), v({3, 3, 2})}) == 2);
    CHECK(rank({v({0, 0}), v({0, 0})}) == 0);
}

TEST_CASE("rank agrees with minor enumeration")
{
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> dim(1, 5), val(-3, 3), zero(0, 3);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t R = dim(rng), C = dim(rng);
        std::vector<rvector> rows(R, rvector(C));
        for (auto& row : rows)
            for (auto& x : row) x = zero(rng) == 0 ? 0 : val(rng);
        if (trial % 3 == 0 && R >= 2) rows[R - 1] = add(rows[0], scale(rows[1], rational(val(rng), 2)));
        CHECK(rank(rows) == rank_by_minors(rows));
    }
}

TEST_CASE("solve_strict examples")
{
    strict_system quad;
    quad.dim = 2;
    quad.strict = {{v({1, 0}), 0}, {v({0, 1}), 0}};
    auto w = solve_strict(quad);
    REQUIRE(w);
    CHECK((*w)[0] > 0);
    CHECK((*w)[1] > 0);

    strict_system contra;
    contra.dim = 1;
    contra.equalities = {{v({1}), 0}};
    contra.strict = {{v({1}), 0}};
    CHECK_FALSE(solve_strict(contra));

    strict_system empty;
    empty.dim = 3;
    auto z = solve_strict(empty);
    REQUIRE(z);
    CHECK(is_zero(*z));
}

TEST_CASE("two open cones from the worked example are disjoint but their closures meet")
{
    // x = a e3 + b(2,0,3) + c(0,2,3) = d e1 + e e2 + f(2,0,3) + g(0,1,1).
    // Variables: x1 x2 x3 a b c d e f g.
    auto build = [](bool strict) {
        strict_system s;
        s.dim = 10;
        const long lhs[3][3] = {{0, 2, 0}, {0, 0, 2}, {1, 3, 3}};
        const long rhs[3][4] = {{1, 0, 2, 0}, {0, 1, 0, 1}, {0, 0, 3, 1}};
        for (int i = 0; i < 3; ++i) {
            rvector a(10, rational(0)), b(10, rational(0));
            a[i] = 1;
            b[i] = 1;
            for (int j = 0; j < 3; ++j) a[3 + j] = -lhs[i][j];
            for (int j = 0; j < 4; ++j) b[6 + j] = -rhs[i][j];
            s.equalities.push_back({a, 0});
            s.equalities.push_back({b, 0});
        }
        for (int k = 3; k < 10; ++k) {
            rvector e = unit_vector(10, k);
            (strict ? s.strict : s.weak).push_back({e, 0});
        }
        return s;
    };
    CHECK_FALSE(solve_strict(build(true)));

    strict_system weak = build(false);
    weak.strict.push_back({unit_vector(10, 2), 0});
    auto w = solve_strict(weak);
    REQUIRE(w);
    rvector x{(*w)[0], (*w)[1], (*w)[2]};
    CHECK(canonical_line(x) == v({2, 0, 3}));
}

TEST_CASE("solve_strict witnesses are exact and infeasibility matches a grid search")
{
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> dim(1, 2), rows(1, 4), val(-2, 2), kind(0, 2);
    int feasible = 0, infeasible = 0;
    for (int trial = 0; trial < 150; ++trial) {
        strict_system s;
        s.dim = dim(rng);
        int r = rows(rng);
        for (int i = 0; i < r; ++i) {
            rvector a(s.dim);
            for (auto& x : a) x = val(rng);
            rational b(val(rng), 2);
            b.canonicalize();
            linear_row row{a, b};
            switch (kind(rng)) {
            case 0: s.strict.push_back(row); break;
            case 1: s.weak.push_back(row); break;
            default: s.equalities.push_back(row); break;
            }
        }
        auto w = solve_strict(s);
        if (w) {
            ++feasible;
            CHECK(satisfies(s, *w));
        } else {
            ++infeasible;
            CHECK_FALSE(grid_has_witness(s));
        }
    }
    CHECK(feasible > 10);
    CHECK(infeasible > 10);
}

TEST_CASE("gf2_contains examples")
{
    CHECK(gf2_contains({{1, 1, 0}, {0, 0, 1}}, {1, 1, 1}));
    CHECK(gf2_contains({}, {0, 0}));
    CHECK_FALSE(gf2_contains({{1, 1, 0}, {1, 0, 1}}, {1, 1, 1}));
    CHECK_THROWS_AS(gf2_contains({{1, 0}}, {1, 0, 1}), dimension_error);
}

TEST_CASE("gf2_contains agrees with exhaustive combination")
{
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> kdist(0, 12), ndist(1, 6), bit(0, 1);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t k = kdist(rng), n = ndist(rng);
        std::vector<bit_vector> span(k, bit_vector(n));
        for (auto& s : span)
            for (std::size_t i = 0; i < n; ++i) s[i] = bit(rng);
        bit_vector target(n);
        for (std::size_t i = 0; i < n; ++i) target[i] = bit(rng);
        bool found = false;
        for (std::size_t mask = 0; mask < (std::size_t{1} << k) && !found; ++mask) {
            bit_vector acc(n, false);
            for (std::size_t j = 0; j < k; ++j)
                if (mask >> j & 1)
                    for (std::size_t i = 0; i < n; ++i) acc[i] = acc[i] != span[j][i];
            found = acc == target;
        }
        CHECK(gf2_contains(span, target) == found);
    }
}

TEST_CASE("cone_from_inequalities")
{
    auto quad = cone_from_inequalities({v({1, 0}), v({0, 1})}, 2);
    CHECK(quad.lineality.empty());
    CHECK(quad.rays == std::vector<rvector>{v({0, 1}), v({1, 0})});

    auto half = cone_from_inequalities({v({0, 1})}, 2);
    CHECK(half.lineality == std::vector<rvector>{v({1, 0})});
    CHECK(half.rays == std::vector<rvector>{v({0, 1})});

    auto line = cone_from_inequalities({v({1, -1}), v({-1, 1})}, 2);
    CHECK(line.rays.empty());
    CHECK(line.lineality == std::vector<rvector>{v({1, 1})});

    auto point = cone_from_inequalities({v({1, 0}), v({-1, 0}), v({0, 1}), v({0, -1})}, 2);
    CHECK(point.rays.empty());
    CHECK(point.lineality.empty());
}

TEST_CASE("canonical forms")
{
    CHECK(primitive({rational(2, 3), rational(4, 9)}) == v({3, 2}));
    CHECK(canonical_line(v({0, -2, 4})) == v({0, 1, -2}));
    CHECK(to_string(rational(-6, 4)) == "-3/2");
    CHECK(to_string(rational(5)) == "5/1");
}
