#include "nh/engine.hpp"

#include "nh/parity.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

namespace nh {

bool lambda_tuple::disjoint() const
{
    for (std::size_t a = 0; a < lambdas.size(); ++a)
        for (std::size_t b = a + 1; b < lambdas.size(); ++b)
            for (const auto& m : lambdas[a].points)
                if (lambdas[b].contains(m)) return false;
    return true;
}

lambda_geometry build_geometry(const lambda_tuple& lam)
{
    lambda_geometry g;
    g.lam = lam;
    for (const auto& omega : lam.lambdas) {
        if (omega.n != lam.spec.n) throw std::invalid_argument("component dimension differs from n");
        auto p = omega.empty() ? newton_polyhedron::build_null(lam.spec) : build_newton(omega, lam.spec);
        g.polys.push_back(p);
        g.faces.push_back(enumerate_faces(p));
    }
    return g;
}

std::vector<rvector> union_points(const std::vector<face>& faces)
{
    std::vector<rvector> pts;
    for (const auto& f : faces)
        for (auto& x : face_points(f)) pts.push_back(std::move(x));
    return pts;
}

std::vector<exponent> union_lattice_points(const std::vector<face>& faces)
{
    std::set<exponent> pts;
    for (const auto& f : faces)
        for (auto& m : lattice_points(f)) pts.insert(std::move(m));
    return {pts.begin(), pts.end()};
}

enumeration_stats enumerate_low_rank_tuples(const lambda_geometry& g, bool require_overlap,
                                            const std::function<bool(const face_tuple&)>& visit)
{
    enumeration_stats st;
    const std::size_t n = g.lam.spec.n;
    const std::size_t d = g.faces.size();
    std::vector<face> chosen;
    bool stop = false;

    std::function<void(std::size_t)> rec = [&](std::size_t nu) {
        if (stop) return;
        std::vector<rvector> pts = union_points(chosen);
        std::size_t r = rank(pts);
        if (r >= n) {
            ++(nu == d ? st.examined : st.pruned);
            return;
        }
        if (nu == d) {
            ++st.examined;
            ++st.low_rank;
            face_tuple t{chosen, r, std::nullopt};
            if (require_overlap) {
                t.overlap_witness = cones_interior_intersection(chosen);
                if (!t.overlap_witness) return;
                ++st.lo;
            }
            if (!visit(t)) stop = true;
            return;
        }
        for (const auto& f : g.faces[nu]) {
            chosen.push_back(f);
            rec(nu + 1);
            chosen.pop_back();
            if (stop) return;
        }
    };
    if (d > 0) rec(0);
    return st;
}

enumeration_stats enumerate_lo_tuples(const lambda_geometry& g, const std::function<bool(const face_tuple&)>& visit)
{
    return enumerate_low_rank_tuples(g, true, visit);
}

face_spec describe(const face& f)
{
    face_spec s;
    s.empty = f.is_empty;
    for (auto v : f.vertex_set) s.vertices.push_back(f.parent->vertices()[v]);
    s.rays = f.ray_set;
    return s;
}

namespace {

unbounded_certificate make_certificate(const face_tuple& t, std::vector<exponent> odd)
{
    unbounded_certificate c;
    c.union_rank = t.union_rank;
    c.odd_subset = std::move(odd);
    c.overlap_witness = t.overlap_witness.value_or(rvector{});
    for (const auto& f : t.faces) {
        c.faces.push_back(describe(f));
        if (f.is_empty || !t.overlap_witness)
            c.levels.push_back(std::nullopt);
        else
            c.levels.push_back(dot(*t.overlap_witness, f.parent->vertices()[f.vertex_set.front()]));
    }
    return c;
}

std::optional<face> locate(const polyhedron_ptr& p, const face_spec& s)
{
    for (const auto& f : enumerate_faces(p)) {
        if (f.is_empty != s.empty) continue;
        if (f.is_empty) return f;
        if (f.ray_set != s.rays || f.vertex_set.size() != s.vertices.size()) continue;
        bool all = true;
        for (const auto& v : s.vertices) {
            bool hit = false;
            for (auto i : f.vertex_set) hit = hit || p->vertices()[i] == v;
            all = all && hit;
        }
        if (all) return f;
    }
    return std::nullopt;
}

bool all_odd_sum(const std::vector<exponent>& pts, std::size_t n)
{
    if (pts.empty() || n == 0) return false;
    exponent s(n, 0);
    for (const auto& m : pts) {
        if (m.size() != n) return false;
        for (std::size_t i = 0; i < n; ++i) s[i] += m[i];
    }
    return std::all_of(s.begin(), s.end(), [](long c) { return c % 2 != 0; });
}

bool distinct_members_of(const std::vector<exponent>& subset, const std::vector<exponent>& pool)
{
    std::set<exponent> seen;
    for (const auto& m : subset) {
        if (!seen.insert(m).second) return false;
        if (!std::binary_search(pool.begin(), pool.end(), m)) return false;
    }
    return true;
}

}  // namespace

verdict decide_lo(const lambda_tuple& lam, bool require_overlap)
{
    lambda_geometry g = build_geometry(lam);
    verdict v;
    v.stats = enumerate_low_rank_tuples(g, require_overlap, [&](const face_tuple& t) {
        std::vector<exponent> pts = union_lattice_points(t.faces);
        auto odd = odd_witness(exponent_set(lam.spec.n, pts));
        if (!odd) return true;
        v.kind = verdict_kind::unbounded;
        v.certificate = make_certificate(t, *odd);
        return false;
    });
    return v;
}

verdict decide_disjoint(const lambda_tuple& lam)
{
    if (lam.d() > 1 && !lam.disjoint())
        throw not_disjoint_error("supports overlap; use decide-general with coefficients");
    return decide_lo(lam, true);
}

certificate_check verify_certificate(const lambda_tuple& lam, const unbounded_certificate& cert)
{
    auto fail = [](std::string why) { return certificate_check{false, std::move(why)}; };
    const std::size_t n = lam.spec.n;
    if (cert.faces.size() != lam.d()) return fail("face count differs from d");
    if (cert.levels.size() != lam.d()) return fail("level count differs from d");
    if (cert.overlap_witness.size() != n) return fail("witness has wrong dimension");
    lambda_geometry g = build_geometry(lam);
    std::vector<face> faces;
    for (std::size_t nu = 0; nu < lam.d(); ++nu) {
        auto f = locate(g.polys[nu], cert.faces[nu]);
        if (!f) return fail("face " + std::to_string(nu + 1) + " is not a face of its polyhedron");
        faces.push_back(*f);
    }
    std::size_t r = rank(union_points(faces));
    if (r != cert.union_rank) return fail("union rank is " + std::to_string(r) + ", certificate claims " +
                                          std::to_string(cert.union_rank));
    if (r + 1 > n) return fail("union rank is not below n");
    for (std::size_t nu = 0; nu < faces.size(); ++nu) {
        if (!interior_contains(faces[nu], cert.overlap_witness))
            return fail("witness outside cone interior of face " + std::to_string(nu + 1));
        if (faces[nu].is_empty) {
            if (cert.levels[nu]) return fail("level given for an empty face");
            continue;
        }
        if (!cert.levels[nu]) return fail("missing level for face " + std::to_string(nu + 1));
        for (const auto& m : lattice_points(faces[nu]))
            if (dot(cert.overlap_witness, to_rvector(m)) != *cert.levels[nu])
                return fail("witness level mismatch on face " + std::to_string(nu + 1));
    }
    std::vector<exponent> pool = union_lattice_points(faces);
    if (!distinct_members_of(cert.odd_subset, pool)) return fail("odd subset has a member outside the faces");
    if (!all_odd_sum(cert.odd_subset, n)) return fail("odd subset sum is not componentwise odd");
    return {true, ""};
}

graph_verdict decide_graph(const exponent_set& lambda_last, const domain_spec& spec)
{
    const std::size_t n = spec.n;
    auto p = build_newton(lambda_last, spec);
    graph_verdict gv;
    for (const auto& f : enumerate_faces(p)) {
        if (f.is_empty) continue;
        std::vector<rvector> base = face_points(f);
        std::vector<exponent> pts = lattice_points(f);
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            ++gv.pairs_examined;
            std::vector<rvector> all = base;
            std::set<exponent> members(pts.begin(), pts.end());
            std::vector<std::size_t> a;
            for (std::size_t i = 0; i < n; ++i)
                if (mask >> i & 1) {
                    a.push_back(i);
                    all.push_back(unit_vector(n, i));
                    exponent e(n, 0);
                    e[i] = 1;
                    members.insert(e);
                }
            std::size_t r = rank(all);
            if (r + 1 > n) continue;
            auto odd = odd_witness(exponent_set(n, {members.begin(), members.end()}));
            if (!odd) continue;
            gv.kind = verdict_kind::unbounded;
            gv.certificate = graph_certificate{describe(f), a, *odd, r};
            return gv;
        }
    }
    return gv;
}

certificate_check verify_graph_certificate(const exponent_set& lambda_last, const domain_spec& spec,
                                           const graph_certificate& cert)
{
    auto fail = [](std::string why) { return certificate_check{false, std::move(why)}; };
    const std::size_t n = spec.n;
    auto p = build_newton(lambda_last, spec);
    auto f = locate(p, cert.face);
    if (!f || f->is_empty) return fail("face is not a nonempty face of the polyhedron");
    std::vector<rvector> all = face_points(*f);
    std::set<exponent> members;
    for (auto& m : lattice_points(*f)) members.insert(m);
    for (auto i : cert.a_set) {
        if (i >= n) return fail("direction out of range");
        all.push_back(unit_vector(n, i));
        exponent e(n, 0);
        e[i] = 1;
        members.insert(e);
    }
    std::size_t r = rank(all);
    if (r != cert.union_rank) return fail("union rank mismatch");
    if (r + 1 > n) return fail("union rank is not below n");
    if (!distinct_members_of(cert.odd_subset, {members.begin(), members.end()}))
        return fail("odd subset has a member outside the union");
    if (!all_odd_sum(cert.odd_subset, n)) return fail("odd subset sum is not componentwise odd");
    return {true, ""};
}

std::vector<exponent_set> vector_polynomial::supports() const
{
    std::vector<exponent_set> out;
    for (const auto& row : rows) {
        std::vector<exponent> pts;
        for (const auto& [m, c] : row)
            if (sgn(c) != 0) pts.push_back(m);
        out.emplace_back(n, std::move(pts));
    }
    return out;
}

void vector_polynomial::normalize()
{
    for (auto& row : rows)
        for (auto it = row.begin(); it != row.end();)
            it = sgn(it->second) == 0 ? row.erase(it) : std::next(it);
}

rmatrix identity_matrix(std::size_t d)
{
    rmatrix m;
    for (std::size_t i = 0; i < d; ++i) m.rows.push_back(unit_vector(d, i));
    return m;
}

vector_polynomial apply_matrix(const rmatrix& a, const vector_polynomial& p)
{
    if (a.col_count() != p.d()) throw dimension_error("matrix width differs from polynomial count");
    vector_polynomial out;
    out.n = p.n;
    out.rows.resize(a.row_count());
    for (std::size_t i = 0; i < a.row_count(); ++i)
        for (std::size_t k = 0; k < p.d(); ++k) {
            if (sgn(a.rows[i][k]) == 0) continue;
            for (const auto& [m, c] : p.rows[k]) out.rows[i][m] += a.rows[i][k] * c;
        }
    out.normalize();
    return out;
}

namespace {

// P_j -= (c^j_m / c^k_m) P_k, mirrored on the accumulated matrix.
void eliminate(vector_polynomial& p, rmatrix& u, std::size_t k, std::size_t j, const exponent& m)
{
    auto pk = p.rows[k].find(m);
    auto pj = p.rows[j].find(m);
    if (pk == p.rows[k].end() || sgn(pk->second) == 0) throw std::logic_error("elimination pivot is zero");
    if (pj == p.rows[j].end()) return;
    rational ratio = pj->second / pk->second;
    for (const auto& [mm, c] : p.rows[k]) p.rows[j][mm] -= ratio * c;
    for (std::size_t c = 0; c < u.col_count(); ++c) u.rows[j][c] -= ratio * u.rows[k][c];
    p.normalize();
}

}  // namespace

std::optional<exponent> default_selector(const vector_polynomial& p, std::size_t k)
{
    for (const auto& [m, c] : p.rows[k])
        for (std::size_t j = k + 1; j < p.d(); ++j)
            if (p.rows[j].count(m)) return m;
    return std::nullopt;
}

std::vector<gl_class> gl_cascade(const vector_polynomial& p, const face_selector& select)
{
    vector_polynomial cur = p;
    cur.normalize();
    rmatrix u = identity_matrix(p.d());
    std::vector<gl_class> out{{u, cur.supports()}};
    for (std::size_t k = 0; k + 1 < p.d(); ++k) {
        auto m = select(cur, k);
        if (m && cur.rows[k].count(*m))
            for (std::size_t j = k + 1; j < p.d(); ++j) eliminate(cur, u, k, j, *m);
        out.push_back({u, cur.supports()});
    }
    return out;
}

general_verdict decide_general(const vector_polynomial& p, const domain_spec& spec, std::optional<std::size_t> depth_cap)
{
    general_verdict gv;
    gv.depth_cap = depth_cap.value_or(std::size_t{1} << std::min<std::size_t>(p.d(), 20));
    struct state {
        vector_polynomial poly;
        rmatrix u;
        std::size_t depth;
    };
    vector_polynomial start = p;
    start.normalize();
    std::set<std::vector<exponent_set>> seen{start.supports()};
    gv.classes.push_back({identity_matrix(p.d()), start.supports()});
    std::deque<state> work{{start, identity_matrix(p.d()), 0}};
    while (!work.empty()) {
        state s = std::move(work.front());
        work.pop_front();
        for (std::size_t k = 0; k < s.poly.d(); ++k)
            for (const auto& [m, c] : s.poly.rows[k])
                for (std::size_t j = k + 1; j < s.poly.d(); ++j) {
                    if (!s.poly.rows[j].count(m)) continue;
                    state next{s.poly, s.u, s.depth + 1};
                    eliminate(next.poly, next.u, k, j, m);
                    auto key = next.poly.supports();
                    if (seen.count(key)) continue;
                    if (next.depth > gv.depth_cap) {
                        gv.depth_cap_hit = true;
                        continue;
                    }
                    seen.insert(key);
                    gv.classes.push_back({next.u, key});
                    work.push_back(std::move(next));
                }
    }
    for (std::size_t i = 0; i < gv.classes.size(); ++i) {
        verdict v = decide_lo(lambda_tuple{gv.classes[i].lambdas, spec}, true);
        gv.result.stats.examined += v.stats.examined;
        gv.result.stats.pruned += v.stats.pruned;
        gv.result.stats.low_rank += v.stats.low_rank;
        gv.result.stats.lo += v.stats.lo;
        if (v.kind == verdict_kind::unbounded) {
            gv.result.kind = verdict_kind::unbounded;
            gv.result.certificate = v.certificate;
            gv.failing_class = i;
            break;
        }
    }
    return gv;
}

std::vector<face_tuple> classify_dyadic(const lambda_geometry& g, const rvector& j)
{
    if (j.size() != g.lam.spec.n) throw dimension_error("classify_dyadic: wrong dimension");
    if (!g.lam.spec.in_z(j)) throw std::invalid_argument("classify_dyadic: J outside Z(S)");
    std::vector<std::vector<face>> options;
    for (const auto& fl : g.faces) {
        std::vector<face> ok;
        for (const auto& f : fl)
            if ((!f.is_empty || f.parent->is_null()) && cone_contains(f, j)) ok.push_back(f);
        options.push_back(std::move(ok));
    }
    std::vector<face_tuple> out;
    std::vector<face> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t nu) {
        if (nu == options.size()) {
            out.push_back({cur, rank(union_points(cur)), std::nullopt});
            return;
        }
        for (const auto& f : options[nu]) {
            cur.push_back(f);
            rec(nu + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

std::vector<rvector> cap_generators(const std::vector<face>& faces)
{
    cone_generators c = cones_closed_intersection(faces);
    std::vector<rvector> out = c.rays;
    for (const auto& l : c.lineality) {
        out.push_back(l);
        out.push_back(scale(l, -1));
    }
    return out;
}

bool in_conic_hull(const std::vector<rvector>& gens, const rvector& x)
{
    const std::size_t k = gens.size();
    strict_system sys;
    sys.dim = k;
    for (std::size_t i = 0; i < x.size(); ++i) {
        rvector a(k);
        for (std::size_t g = 0; g < k; ++g) a[g] = gens[g].at(i);
        sys.equalities.push_back({a, x[i]});
    }
    for (std::size_t g = 0; g < k; ++g) sys.weak.push_back({unit_vector(k, g), 0});
    if (k == 0) return is_zero(x);
    return solve_strict(sys).has_value();
}

std::vector<std::vector<face>> build_face_chain(const face_tuple& tuple, const std::vector<rvector>& cap_gens)
{
    const auto& faces = tuple.faces;
    if (faces.empty()) throw std::invalid_argument("build_face_chain: empty tuple");
    const std::size_t n = faces.front().parent->n();
    for (const auto& p : cap_gens)
        for (const auto& f : faces)
            if (p.size() != n || !cone_contains(f, p))
                throw std::invalid_argument("cap generator outside the cone intersection");
    for (const auto& p : cap_generators(faces))
        if (!in_conic_hull(cap_gens, p)) throw std::invalid_argument("cap generators do not span the intersection");

    std::vector<std::vector<face>> chain;
    rvector x = zero_vector(n);
    for (std::size_t s = 0; s <= cap_gens.size(); ++s) {
        if (s > 0) x = add(x, cap_gens[s - 1]);
        std::vector<face> level;
        for (const auto& f : faces) level.push_back(argmin_face(f.parent, x));
        chain.push_back(std::move(level));
    }
    return chain;
}

}  // namespace nh
