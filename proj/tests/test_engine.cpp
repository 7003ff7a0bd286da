#include <doctest.h>

#include "geometry_props.hpp"
#include "nh/engine.hpp"
#include "nh/parity.hpp"

#include <random>
#include <set>

using namespace nh;

namespace {

rvector v(std::initializer_list<long> xs)
{
    rvector r;
    for (long x : xs) r.emplace_back(x);
    return r;
}

lambda_tuple make(std::size_t n, std::vector<std::size_t> s, std::vector<std::vector<exponent>> sets)
{
    lambda_tuple lam;
    for (auto& pts : sets) lam.lambdas.emplace_back(n, pts);
    lam.spec = domain_spec(n, s);
    return lam;
}

const lambda_tuple worked = make(3, {0, 1, 2}, {{{0, 0, 2}, {3, 3, 0}}, {{0, 0, 3}, {3, 2, 1}}});

// Vertex criterion for the double Hilbert transform along (t1, t2, P(t)):
// bounded iff every vertex of the local Newton polygon has an even
// component. Vertices are found as unique minimizers over a grid of
// positive directions, fine enough for exponents up to 6.
bool vertex_criterion_bounded(const std::vector<exponent>& pts)
{
    std::set<exponent> verts;
    for (long a = 1; a <= 100; ++a)
        for (long b = 1; b <= 100; ++b) {
            long best = -1;
            int count = 0;
            exponent arg;
            for (const auto& m : std::set<exponent>(pts.begin(), pts.end())) {
                long val = a * m[0] + b * m[1];
                if (best < 0 || val < best) {
                    best = val;
                    count = 1;
                    arg = m;
                } else if (val == best) {
                    ++count;
                }
            }
            if (count == 1) verts.insert(arg);
        }
    for (const auto& m : verts)
        if (m[0] % 2 != 0 && m[1] % 2 != 0) return false;
    return true;
}

unbounded_certificate require_cert(const verdict& v)
{
    REQUIRE(v.kind == verdict_kind::unbounded);
    REQUIRE(v.certificate);
    return *v.certificate;
}

}  // namespace

TEST_CASE("worked example: exactly two odd low-rank unions, neither with overlapping interiors")
{
    lambda_geometry g = build_geometry(worked);
    std::set<std::vector<exponent>> odd_unions;
    std::vector<face_tuple> odd_tuples;
    enumerate_low_rank_tuples(g, false, [&](const face_tuple& t) {
        auto pts = union_lattice_points(t.faces);
        if (!is_even(pts, 3)) {
            odd_unions.insert(pts);
            odd_tuples.push_back(t);
        }
        return true;
    });
    CHECK(odd_unions == std::set<std::vector<exponent>>{{{0, 0, 3}, {3, 3, 0}}, {{0, 0, 2}, {0, 0, 3}, {3, 3, 0}}});
    int named = 0;
    for (const auto& t : odd_tuples) {
        CHECK_FALSE(cones_interior_intersection(t.faces));
        cone_generators closed = cones_closed_intersection(t.faces);
        CHECK(closed.lineality.empty());
        // The tuples ending in the vertex m2 touch along one ray; those using
        // the edge m2 + R+ e3 meet only at the origin.
        if (describe(t.faces[1]).rays.empty()) {
            CHECK(closed.rays == std::vector<rvector>{v({2, 0, 3})});
            ++named;
        } else {
            CHECK(closed.rays.empty());
        }
    }
    CHECK(named == 2);
    verdict res = decide_disjoint(worked);
    CHECK(res.kind == verdict_kind::bounded);
    CHECK(res.stats.examined > 0);
}

TEST_CASE("introductory examples")
{
    auto a = decide_disjoint(make(2, {0, 1}, {{{1, 1}}}));
    auto cert = require_cert(a);
    CHECK(cert.odd_subset == std::vector<exponent>{{1, 1}});
    CHECK(cert.faces[0].vertices == std::vector<rvector>{v({1, 1})});

    CHECK(decide_disjoint(make(2, {0, 1}, {{{2, 1}}})).kind == verdict_kind::bounded);
    CHECK(decide_disjoint(make(2, {0, 1}, {{{2, 2}, {3, 3}}})).kind == verdict_kind::bounded);
    auto global = require_cert(decide_disjoint(make(2, {}, {{{2, 2}, {3, 3}}})));
    CHECK(global.odd_subset == std::vector<exponent>{{3, 3}});
}

TEST_CASE("enumerate_lo_tuples examples")
{
    auto g = build_geometry(make(2, {}, {{{2, 2}, {3, 3}}}));
    std::set<std::vector<rvector>> vertex_tuples;
    bool saw_empty = false;
    auto st = enumerate_lo_tuples(g, [&](const face_tuple& t) {
        CHECK(t.union_rank <= 1);
        REQUIRE(t.overlap_witness);
        CHECK(interior_contains(t.faces[0], *t.overlap_witness));
        if (t.faces[0].is_empty) saw_empty = true;
        if (t.faces[0].dim == 0) vertex_tuples.insert(describe(t.faces[0]).vertices);
        return true;
    });
    CHECK(vertex_tuples == std::set<std::vector<rvector>>{{v({2, 2})}, {v({3, 3})}});
    CHECK(saw_empty);
    CHECK(st.lo >= 3);

    auto w = build_geometry(worked);
    enumerate_lo_tuples(w, [&](const face_tuple& t) {
        std::set<rvector> pts;
        for (const auto& f : t.faces)
            for (const auto& x : face_points(f)) pts.insert(x);
        bool n1_m2 = pts == std::set<rvector>{v({3, 3, 0}), v({0, 0, 3})};
        CHECK_FALSE(n1_m2);
        // Dropping empty components leaves the union unchanged.
        std::vector<face> kept;
        for (const auto& f : t.faces)
            if (!f.is_empty) kept.push_back(f);
        CHECK(union_lattice_points(kept) == union_lattice_points(t.faces));
        return true;
    });
}

TEST_CASE("decide_disjoint rejects overlapping supports")
{
    CHECK_THROWS_AS(decide_disjoint(make(2, {0, 1}, {{{1, 1}}, {{1, 1}, {2, 0}}})), not_disjoint_error);
}

TEST_CASE("certificates verify and single-field perturbations are rejected")
{
    std::vector<lambda_tuple> cases{make(2, {0, 1}, {{{1, 1}}}), make(2, {}, {{{2, 2}, {3, 3}}}),
                                    make(3, {0, 1, 2}, {{{1, 1, 1}, {2, 0, 4}}}),
                                    make(2, {0, 1}, {{{2, 0}, {0, 2}}, {{1, 1}}})};
    for (const auto& lam : cases) {
        auto cert = require_cert(decide_lo(lam));
        CHECK(verify_certificate(lam, cert).ok);

        auto bad_rank = cert;
        bad_rank.union_rank += 1;
        CHECK_FALSE(verify_certificate(lam, bad_rank).ok);
        for (std::size_t i = 0; i < cert.overlap_witness.size(); ++i) {
            auto bad_w = cert;
            bad_w.overlap_witness[i] += 1;
            CHECK_FALSE(verify_certificate(lam, bad_w).ok);
        }
        for (std::size_t k = 0; k < cert.odd_subset.size(); ++k) {
            auto bad_m = cert;
            bad_m.odd_subset[k][0] += 1;
            CHECK_FALSE(verify_certificate(lam, bad_m).ok);
            auto dropped = cert;
            dropped.odd_subset.erase(dropped.odd_subset.begin() + static_cast<std::ptrdiff_t>(k));
            CHECK_FALSE(verify_certificate(lam, dropped).ok);
        }
    }
}

TEST_CASE("decide_graph examples")
{
    auto a = decide_graph(exponent_set(2, {{1, 1}}), domain_spec(2, {0, 1}));
    CHECK(a.kind == verdict_kind::unbounded);
    REQUIRE(a.certificate);
    CHECK(a.certificate->a_set.empty());
    CHECK(verify_graph_certificate(exponent_set(2, {{1, 1}}), domain_spec(2, {0, 1}), *a.certificate).ok);

    CHECK(decide_graph(exponent_set(2, {{2, 1}, {1, 2}}), domain_spec(2, {0, 1})).kind == verdict_kind::bounded);

    auto c = decide_graph(exponent_set(3, {{1, 1, 1}, {4, 0, 2}}), domain_spec(3, {0, 1, 2}));
    CHECK(c.kind == verdict_kind::unbounded);
}

TEST_CASE("graph case agrees with the vertex criterion")
{
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> size(1, 6);
    std::uniform_int_distribution<long> coord(0, 6);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<exponent> pts;
        for (int i = size(rng); i > 0; --i) pts.push_back({coord(rng), coord(rng)});
        exponent_set lam(2, pts);
        auto gv = decide_graph(lam, domain_spec(2, {0, 1}));
        CHECK((gv.kind == verdict_kind::bounded) == vertex_criterion_bounded(pts));
        if (gv.certificate) CHECK(verify_graph_certificate(lam, domain_spec(2, {0, 1}), *gv.certificate).ok);
    }
}

TEST_CASE("for n = 2 the overlap filter does not change the verdict")
{
    std::mt19937 rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        auto lam = testing::random_lambda(rng, 2, 2, 4, 4);
        lam.spec = domain_spec(2, lam.spec.s);
        if (lam.lambdas.front().n != 2 || !lam.disjoint()) continue;
        CHECK(decide_lo(lam, true).kind == decide_lo(lam, false).kind);
    }
}

TEST_CASE("gl_cascade examples")
{
    vector_polynomial p;
    p.n = 2;
    p.rows = {{{{1, 1}, 1}, {{3, 0}, 1}}, {{{1, 1}, 1}}};
    auto classes = gl_cascade(p, default_selector);
    REQUIRE(classes.size() == 2);
    CHECK(classes[0].lambdas == p.supports());
    CHECK(classes[1].lambdas[1] == exponent_set(2, {{3, 0}}));
    auto q = apply_matrix(classes[1].matrix, p);
    CHECK(q.rows[1] == std::map<exponent, rational>{{{3, 0}, -1}});

    vector_polynomial one;
    one.n = 2;
    one.rows = {{{{2, 1}, 3}}};
    auto single = gl_cascade(one, default_selector);
    REQUIRE(single.size() == 1);
    CHECK(single[0].matrix.rows == identity_matrix(1).rows);
    CHECK(apply_matrix(identity_matrix(1), one).supports() == one.supports());
}

TEST_CASE("decide_general examples")
{
    vector_polynomial p;
    p.n = 2;
    p.rows = {{{{1, 1}, 1}}, {{{1, 1}, 1}, {{2, 2}, 1}}};
    auto gv = decide_general(p, domain_spec(2, {0, 1}));
    REQUIRE(gv.classes.size() == 2);
    CHECK(gv.classes[1].lambdas[1] == exponent_set(2, {{2, 2}}));
    CHECK_FALSE(gv.depth_cap_hit);

    vector_polynomial disjoint;
    disjoint.n = 3;
    disjoint.rows = {{{{0, 0, 2}, 1}, {{3, 3, 0}, 1}}, {{{0, 0, 3}, 1}, {{3, 2, 1}, 1}}};
    auto dg = decide_general(disjoint, domain_spec(3, {0, 1, 2}));
    CHECK(dg.classes.size() == 1);
    CHECK(dg.result.kind == decide_disjoint(worked).kind);

    vector_polynomial one;
    one.n = 2;
    one.rows = {{{{2, 2}, 1}, {{3, 3}, -2}}};
    for (auto s : {std::vector<std::size_t>{}, std::vector<std::size_t>{0, 1}}) {
        auto g1 = decide_general(one, domain_spec(2, s));
        CHECK(g1.classes.size() == 1);
        CHECK(g1.result.kind == decide_disjoint(lambda_tuple{one.supports(), domain_spec(2, s)}).kind);
    }
}

TEST_CASE("classify_dyadic")
{
    auto g = build_geometry(make(2, {}, {{{2, 2}, {3, 3}}}));
    auto at_zero = classify_dyadic(g, v({0, 0}));
    CHECK(at_zero.size() == g.faces[0].size() - 1);
    auto diag = classify_dyadic(g, v({1, 1}));
    REQUIRE(diag.size() == 1);
    CHECK(describe(diag[0].faces[0]).vertices == std::vector<rvector>{v({2, 2})});

    auto q = build_geometry(make(2, {0, 1}, {{{2, 2}}}));
    CHECK_THROWS_AS(classify_dyadic(q, v({-1, 0})), std::invalid_argument);

    // Far along an interior witness of a tuple, exactly its subface tuples remain.
    auto w = build_geometry(worked);
    std::mt19937 rng(8);
    int checked = 0;
    enumerate_lo_tuples(w, [&](const face_tuple& t) {
        for (const auto& f : t.faces)
            if (f.is_empty) return true;
        rvector j = scale(*t.overlap_witness, 1000);
        std::size_t expected = 1;
        for (const auto& f : t.faces) {
            std::size_t k = 0;
            for (const auto& h : enumerate_faces(f.parent))
                if (!h.is_empty && is_subface(h, f)) ++k;
            expected *= k;
        }
        auto got = classify_dyadic(w, j);
        CHECK(got.size() == expected);
        for (const auto& u : got)
            for (std::size_t nu = 0; nu < u.faces.size(); ++nu) CHECK(is_subface(u.faces[nu], t.faces[nu]));
        ++checked;
        return true;
    });
    CHECK(checked > 5);

    // Every lattice point of a box in Z(S) is classified.
    for (long a = 0; a <= 4; ++a)
        for (long b = 0; b <= 4; ++b)
            for (long c = 0; c <= 4; ++c) CHECK_FALSE(classify_dyadic(w, v({a, b, c})).empty());
}

TEST_CASE("face chain examples")
{
    auto g = build_geometry(make(2, {0, 1}, {{{2, 2}, {0, 5}, {5, 0}}}));
    face top = g.faces[0].front();
    auto trivial = build_face_chain(face_tuple{{top}, 2, std::nullopt}, {});
    REQUIRE(trivial.size() == 1);
    CHECK(trivial[0][0].is_improper);

    for (const auto& f : g.faces[0]) {
        if (f.dim != 0) continue;
        cone c = face_cone(f);
        auto chain = build_face_chain(face_tuple{{f}, 1, std::nullopt}, c.generators);
        CHECK(chain.front()[0].is_improper);
        CHECK(chain.back()[0] == f);
        for (std::size_t s = 1; s < chain.size(); ++s) CHECK(is_subface(chain[s][0], chain[s - 1][0]));
    }

    CHECK_THROWS_AS(build_face_chain(face_tuple{{g.faces[0][1]}, 1, std::nullopt}, {}), std::invalid_argument);
}

TEST_CASE("chain properties on seeded random tuples")
{
    std::mt19937 rng(31);
    int instances = 0;
    for (int trial = 0; trial < 200 && instances < 25; ++trial) {
        auto lam = testing::random_lambda(rng);
        auto g = build_geometry(lam);
        std::vector<face_tuple> lo;
        enumerate_lo_tuples(g, [&](const face_tuple& t) {
            lo.push_back(t);
            return true;
        });
        std::erase_if(lo, [](const face_tuple& t) {
            for (const auto& f : t.faces)
                if (f.is_empty && !f.parent->is_null()) return true;
            return false;
        });
        if (lo.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, lo.size() - 1);
        const auto& t = lo[pick(rng)];
        for (const auto& f : testing::check_chain(rng, t)) FAIL_CHECK(f);
        ++instances;
    }
    CHECK(instances == 25);
}
