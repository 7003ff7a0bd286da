#include <doctest.h>

#include "nh/oscillatory.hpp"
#include "nh/parity.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdlib>
#include <random>

using namespace nh;
using cplx = std::complex<double>;

namespace {

constexpr double pi = 3.14159265358979323846;
using gk = boost::math::quadrature::gauss_kronrod<double, 31>;

vector_polynomial poly(std::size_t n, std::vector<std::map<exponent, rational>> rows)
{
    vector_polynomial p;
    p.n = n;
    p.rows = std::move(rows);
    return p;
}

vector_polynomial mono(std::size_t n, std::initializer_list<exponent> ms)
{
    std::map<exponent, rational> row;
    for (const auto& m : ms) row[m] = 1;
    return poly(n, {row});
}

// Real-variable integral of exp(i phase(t)) * prod h(t_k) over t in R^n, as a
// tensor of composite Gauss-Legendre rules on both half-lines.
cplx naive_t_integral(std::size_t n, const std::function<double(const std::vector<double>&)>& phase)
{
    using gl = boost::math::quadrature::gauss<double, 30>;
    std::vector<double> nodes, weights;
    const std::vector<std::pair<double, double>> pieces{{0.25, 0.5}, {0.5, 1}, {1, 2}};
    constexpr int sub = 24;
    for (double sign : {-1.0, 1.0})
        for (auto [a, b] : pieces)
            for (int p = 0; p < sub; ++p) {
                double lo = a + (b - a) * p / sub, hi = a + (b - a) * (p + 1) / sub;
                double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
                for (std::size_t i = 0; i < gl::abscissa().size(); ++i)
                    for (double s : {-1.0, 1.0}) {
                        double t = sign * (mid + s * half * gl::abscissa()[i]);
                        nodes.push_back(t);
                        weights.push_back(half * gl::weights()[i] * h_kernel(t));
                    }
            }
    std::vector<double> t(n);
    std::function<cplx(std::size_t)> level = [&](std::size_t k) -> cplx {
        if (k == n) return std::polar(1.0, phase(t));
        cplx s = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (weights[i] == 0) continue;
            t[k] = nodes[i];
            s += weights[i] * level(k + 1);
        }
        return s;
    };
    return level(0);
}

double poly_phase(const vector_polynomial& p, const std::vector<double>& xi, const std::vector<long>& j,
                  const std::vector<double>& t)
{
    double ph = 0;
    for (std::size_t nu = 0; nu < p.d(); ++nu)
        for (const auto& [m, c] : p.rows[nu]) {
            double v = xi[nu] * c.get_d();
            for (std::size_t k = 0; k < p.n; ++k) v *= std::pow(std::ldexp(t[k], static_cast<int>(-j[k])), m[k]);
            ph += v;
        }
    return ph;
}

}  // namespace

TEST_CASE("cutoff shape and dyadic partition of unity")
{
    CHECK(psi(0.0) == 1.0);
    CHECK(psi(0.5) == 1.0);
    CHECK(psi(-0.4) == 1.0);
    CHECK(psi(2.0) == 0.0);
    CHECK(psi(-3.0) == 0.0);
    for (double u = 0.5; u < 2; u += 0.01) {
        CHECK(psi(u) >= 0.0);
        CHECK(psi(u) <= 1.0);
        CHECK(psi(u) == psi(-u));
        CHECK(psi(u + 0.01) <= psi(u));
    }
    CHECK(h_kernel(0.0) == 0.0);
    CHECK(h_kernel(0.7) == doctest::Approx(-h_kernel(-0.7)));
    CHECK(eta(0.2) == 0.0);
    CHECK(eta(2.5) == 0.0);

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> e(-25, 25);
    for (int i = 0; i < 200; ++i) {
        double u = std::exp2(e(rng));
        double s = 0;
        for (int k = -30; k <= 30; ++k) s += eta(std::ldexp(u, k));
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("dyadic pieces agree with direct t-space integration")
{
    struct item {
        vector_polynomial p;
        std::vector<long> j;
        std::vector<double> xi;
    };
    std::vector<item> cases{
        {mono(1, {{1}}), {0}, {3.0}},
        {mono(1, {{3}}), {1}, {20.0}},
        {mono(1, {{1}, {2}}), {-1}, {2.0}},
        {mono(2, {{1, 1}}), {0, 0}, {4.0}},
        {mono(2, {{1, 1}}), {1, -1}, {-6.0}},
        {mono(2, {{1, 0}, {1, 2}}), {0, 1}, {5.0}},
        {poly(2, {{{{1, 1}, rational(-3, 2)}, {{2, 1}, 1}}}), {0, 0}, {2.5}},
        {poly(2, {{{{1, 1}, 1}}, {{{1, 0}, 1}, {{0, 3}, -1}}}), {1, 0}, {3.0, -2.0}},
    };
    for (const auto& c : cases) {
        auto r = dyadic_piece_full(c.p, c.j, c.xi);
        auto oracle = naive_t_integral(c.p.n, [&](const std::vector<double>& t) { return poly_phase(c.p, c.xi, c.j, t); });
        INFO("n " << c.p.n << " value " << r.value << " oracle " << oracle);
        CHECK(r.converged);
        CHECK(std::abs(r.value - oracle) < 1e-8);
        CHECK(r.abs_error_estimate < 1e-8);
    }
}

TEST_CASE("dyadic pieces of even sets vanish and the oracle agrees")
{
    auto p = mono(2, {{2, 1}, {0, 3}});
    auto r = dyadic_piece_full(p, {0, 0}, {7.0});
    CHECK(r.value == cplx(0, 0));
    auto oracle = naive_t_integral(2, [&](const std::vector<double>& t) { return poly_phase(p, {7.0}, {0, 0}, t); });
    CHECK(std::abs(oracle) < 1e-8);

    CHECK(dyadic_piece_full(mono(2, {{1, 1}}), {0, 0}, {0.0}).value == cplx(0, 0));
}

TEST_CASE("dyadic_piece keeps only the face monomials")
{
    lambda_tuple lam{{exponent_set(2, {{1, 1}, {3, 0}})}, domain_spec(2, {0, 1})};
    auto g = build_geometry(lam);
    auto p = poly(2, {{{{1, 1}, 2}, {{3, 0}, -1}}});
    for (const auto& f : g.faces[0]) {
        face_tuple t{{f}, 0, std::nullopt};
        auto r = dyadic_piece(p, t, {0, 1}, {1.5});
        std::map<exponent, rational> kept;
        if (!f.is_empty)
            for (const auto& m : lattice_points(f)) kept[m] = p.rows[0].at(m);
        auto q = poly(2, {kept});
        auto oracle = naive_t_integral(2, [&](const std::vector<double>& tt) { return poly_phase(q, {1.5}, {0, 1}, tt); });
        CHECK(std::abs(r.value - oracle) < 1e-8);
    }
}

TEST_CASE("skipped pieces respect their bound")
{
    auto p = mono(2, {{1, 1}, {2, 1}});
    piece_options opt;
    opt.skip_tolerance = 1e-6;
    auto r = dyadic_piece_full(p, {12, 12}, {1.0}, opt);
    CHECK(r.panels == 0);
    CHECK(r.value == cplx(0, 0));
    CHECK(r.abs_error_estimate > 0);
    CHECK(r.abs_error_estimate < 1e-6);
    CHECK(dyadic_piece_full(p, {10, 10}, {1.0}, opt).panels > 0);
    auto oracle = naive_t_integral(2, [&](const std::vector<double>& t) { return poly_phase(p, {1.0}, {12, 12}, t); });
    CHECK(std::abs(oracle) <= r.abs_error_estimate);
}

TEST_CASE("pv_integral examples")
{
    auto even = mono(2, {{2, 1}});
    CHECK(std::abs(pv_integral(even, {5.0}, {0.01, 0.01}, {3, 3}).value) == 0.0);
    CHECK(pv_integral(mono(2, {{1, 1}}), {0.0}, {0.1, 0.1}, {1, 1}).value == cplx(0, 0));
    CHECK_THROWS_AS(pv_integral(even, {1.0}, {0, 0.1}, {1, 1}), std::invalid_argument);

    // prod[a,b]^2 with w = log t1 t2: 4i * int sin(xi e^w) l(w) dw.
    auto oracle = [](double xi, double a, double b) {
        double lo = std::log(a), hi = std::log(b);
        auto f = [&](double w) { return std::sin(xi * std::exp(w)) * ((hi - lo) - std::abs(w - (lo + hi))); };
        double s = 0;
        double step = 0.25;
        for (double w = 2 * lo; w < 2 * hi - 1e-12; w += step)
            s += gk::integrate(f, w, std::min(w + step, 2 * hi), 10, 1e-13);
        return cplx(0, 4 * s);
    };
    auto p = mono(2, {{1, 1}});
    double prev = 0;
    for (double xi : {4.0, 32.0, 256.0}) {
        auto r = pv_integral(p, {xi}, {1.0 / 4096, 1.0 / 4096}, {1, 1});
        auto o = oracle(xi, 1.0 / 4096, 1);
        INFO("xi " << xi << " value " << r.value << " oracle " << o);
        CHECK(r.converged);
        CHECK(std::abs(r.value - o) < 1e-7);
        CHECK(std::abs(r.value) > prev);
        prev = std::abs(r.value);
    }
}

TEST_CASE("windowed integral equals the sum of dyadic pieces")
{
    struct item {
        vector_polynomial p;
        std::vector<double> xi;
        std::vector<long> lo, hi;
    };
    std::vector<item> cases{
        {mono(1, {{3}}), {4.0}, {-2}, {3}},
        {mono(2, {{1, 1}, {2, 0}}), {3.0}, {-1, 0}, {1, 2}},
        {poly(2, {{{{1, 0}, 1}}, {{{1, 2}, rational(1, 2)}}}), {2.0, -1.0}, {0, -1}, {2, 1}},
    };
    for (const auto& c : cases) {
        cplx sum = 0;
        std::vector<long> j = c.lo;
        std::function<void(std::size_t)> walk = [&](std::size_t k) {
            if (k == j.size()) {
                sum += dyadic_piece_full(c.p, j, c.xi).value;
                return;
            }
            for (long v = c.lo[k]; v <= c.hi[k]; ++v) {
                j[k] = v;
                walk(k + 1);
            }
        };
        walk(0);
        auto w = windowed_integral(c.p, c.xi, c.lo, c.hi);
        INFO("sum " << sum << " window " << w.value);
        CHECK(w.converged);
        CHECK(std::abs(sum - w.value) < 1e-6);
    }
}

TEST_CASE("cell budget marks unconverged results")
{
    setenv("NH_MAX_CELLS", "20", 1);
    CHECK(max_cells() == 20);
    auto r = pv_integral(mono(2, {{1, 1}}), {4096.0}, {1.0 / 1024, 1.0 / 1024}, {4, 4});
    CHECK_FALSE(r.converged);
    unsetenv("NH_MAX_CELLS");
    CHECK(max_cells() == (std::size_t{1} << 22));
}

TEST_CASE("fit_line")
{
    auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.slope == doctest::Approx(2));
    CHECK(f.intercept == doctest::Approx(1));
    CHECK(f.r2 == doctest::Approx(1));
    CHECK(f.slope_stderr == doctest::Approx(0).epsilon(1e-9));
    CHECK_THROWS_AS(fit_line({1}, {1}), std::invalid_argument);
}

TEST_CASE("divergence probe on t1 t2 grows like 2 pi k log 2")
{
    lambda_tuple lam{{exponent_set(2, {{1, 1}})}, domain_spec(2, {0, 1})};
    auto g = build_geometry(lam);
    auto v = decide_lo(lam);
    REQUIRE(v.kind == verdict_kind::unbounded);
    std::optional<face_tuple> wit;
    enumerate_lo_tuples(g, [&](const face_tuple& t) {
        if (!is_even(exponent_set(2, union_lattice_points(t.faces)))) {
            wit = t;
            return false;
        }
        return true;
    });
    REQUIRE(wit);
    std::vector<probe_box> boxes;
    for (int k = 4; k <= 8; ++k) {
        double a = std::ldexp(1.0, -k);
        boxes.push_back({static_cast<double>(k), {a, a}, {1, 1}});
    }
    auto rep = divergence_probe(mono(2, {{1, 1}}), *wit, {1.0}, boxes);
    CHECK(rep.x_block == std::vector<std::size_t>{0});
    CHECK(rep.y_block == std::vector<std::size_t>{1});
    CHECK(rep.s0.empty());
    CHECK(rep.vs_scale.slope == doctest::Approx(2 * pi * std::log(2.0)).epsilon(0.03));
    CHECK(rep.vs_scale.r2 > 0.99);
    CHECK_FALSE(rep.inconclusive);

    lambda_tuple even{{exponent_set(2, {{2, 1}})}, domain_spec(2, {0, 1})};
    auto ge = build_geometry(even);
    face_tuple t{{ge.faces[0][ge.faces[0].size() - 2]}, 0, std::nullopt};
    REQUIRE(t.faces[0].dim == 0);
    auto ctrl = divergence_probe(mono(2, {{2, 1}}), t, {1.0}, boxes);
    CHECK(std::abs(ctrl.vs_scale.slope) < 0.01);
    CHECK(ctrl.inconclusive);
}

TEST_CASE("decay along a ray of the vertex cone")
{
    lambda_tuple lam{{exponent_set(2, {{1, 1}})}, domain_spec(2, {0, 1})};
    auto g = build_geometry(lam);
    face vertex = g.faces[0][g.faces[0].size() - 2];
    REQUIRE(vertex.dim == 0);
    face_tuple t{{vertex}, 0, std::nullopt};
    auto rep = decay_check(mono(2, {{1, 1}}), t, {1, 1}, {256.0}, 6);
    REQUIRE(rep.fitted);
    CHECK(rep.delta >= 0.05);
    REQUIRE(rep.rows.size() == 7);
    CHECK(rep.rows[0].scale == 256.0);
    CHECK(rep.rows[2].scale == 16.0);
    for (const auto& r : rep.rows) CHECK(r.value <= rep.constant * r.bound * (1 + 1e-12));
}

TEST_CASE("multiplier sum probe")
{
    auto even = mono(2, {{2, 1}});
    auto rep = multiplier_sum_probe(even, domain_spec(2, {0, 1}), {{3.0}, {-5.0}}, {2, 4});
    REQUIRE(rep.rows.size() == 2);
    for (const auto& r : rep.rows)
        for (double s : r.partial_sums) CHECK(s == 0.0);
    CHECK(rep.pieces == 2 * 15);

    auto odd = mono(2, {{1, 1}});
    auto a = multiplier_sum_probe(odd, domain_spec(2, {0, 1}), {{16.0}, {-4.0}}, {1, 3}, 1);
    auto b = multiplier_sum_probe(odd, domain_spec(2, {0, 1}), {{16.0}, {-4.0}}, {3, 1}, 3);
    CHECK(a.radii == b.radii);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(a.rows[i].partial_sums == b.rows[i].partial_sums);
        CHECK(a.rows[i].partial_sums[1] > a.rows[i].partial_sums[0]);
    }
}
