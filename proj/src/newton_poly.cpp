#include "nh/newton_poly.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

namespace nh {

exponent_set::exponent_set(std::size_t dim, std::vector<exponent> pts) : n(dim), points(std::move(pts))
{
    for (const auto& m : points) {
        if (m.size() != n) throw std::invalid_argument("exponent has wrong length");
        for (long c : m)
            if (c < 0) throw std::invalid_argument("negative exponent");
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
}

bool exponent_set::contains(const exponent& m) const
{
    return std::binary_search(points.begin(), points.end(), m);
}

domain_spec::domain_spec(std::size_t dim, std::vector<std::size_t> local) : n(dim), s(std::move(local))
{
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (auto j : s)
        if (j >= n) throw std::invalid_argument("local direction out of range");
}

bool domain_spec::in_s(std::size_t j) const { return std::binary_search(s.begin(), s.end(), j); }

bool domain_spec::in_z(const rvector& x) const
{
    for (auto j : s)
        if (sgn(x.at(j)) < 0) return false;
    return true;
}

rvector to_rvector(const exponent& m)
{
    rvector v(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) v[i] = m[i];
    return v;
}

namespace {

template <class T>
bool subset_of(const std::vector<T>& a, const std::vector<T>& b)
{
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

polyhedron_ptr newton_polyhedron::build(const exponent_set& omega, const domain_spec& spec)
{
    if (omega.empty()) throw std::invalid_argument("Newton polyhedron of an empty set");
    if (omega.n != spec.n) throw std::invalid_argument("exponent set and domain differ in dimension");
    auto p = std::shared_ptr<newton_polyhedron>(new newton_polyhedron());
    p->omega_ = omega;
    p->spec_ = spec;
    p->compute_hull();
    p->compute_lattice();
    return p;
}

polyhedron_ptr newton_polyhedron::build_null(const domain_spec& spec)
{
    auto p = std::shared_ptr<newton_polyhedron>(new newton_polyhedron());
    p->omega_ = exponent_set(spec.n, {});
    p->spec_ = spec;
    p->dim_ = -1;
    p->lattice_.push_back(face_data{{}, {}, {}, -1});
    return p;
}

polyhedron_ptr build_newton(const exponent_set& omega, const domain_spec& spec)
{
    return newton_polyhedron::build(omega, spec);
}

bool newton_polyhedron::contains(const rvector& x) const
{
    if (is_null()) return false;
    for (const auto& h : basis_b_)
        if (dot(h.normal, x) != h.level) return false;
    for (const auto& h : facets_)
        if (dot(h.normal, x) < h.level) return false;
    return true;
}

void newton_polyhedron::compute_hull()
{
    const std::size_t n = spec_.n;
    // The valid inequalities q.x >= -c form the dual of the homogenized cone.
    std::vector<rvector> gens;
    for (const auto& m : omega_.points) {
        rvector g = to_rvector(m);
        g.push_back(1);
        gens.push_back(std::move(g));
    }
    for (auto j : spec_.s) {
        rvector g = unit_vector(n + 1, j);
        gens.push_back(std::move(g));
    }
    cone_generators dual = cone_from_inequalities(gens, n + 1);

    const rvector base = to_rvector(omega_.points.front());

    std::vector<rvector> ortho;
    for (const auto& l : dual.lineality) {
        rvector q(l.begin(), l.begin() + static_cast<std::ptrdiff_t>(n));
        for (const auto& b : ortho) q = sub(q, scale(b, dot(q, b) / dot(b, b)));
        if (is_zero(q)) continue;
        ortho.push_back(q);
    }
    for (const auto& q : ortho) {
        rvector c = canonical_line(q);
        basis_b_.push_back(hyperplane{c, dot(c, base)});
    }
    std::sort(basis_b_.begin(), basis_b_.end(),
              [](const hyperplane& a, const hyperplane& b) { return a.normal < b.normal; });
    dim_ = static_cast<int>(n - basis_b_.size());

    std::set<rvector> normals;
    for (const auto& r : dual.rays) {
        rvector q(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(n));
        for (const auto& b : ortho) q = sub(q, scale(b, dot(q, b) / dot(b, b)));
        if (is_zero(q)) continue;
        normals.insert(primitive(q));
    }
    for (const auto& q : normals) {
        rational lvl = dot(q, base);
        for (const auto& m : omega_.points) lvl = std::min(lvl, dot(q, to_rvector(m)));
        facets_.push_back(hyperplane{q, lvl});
    }

    for (const auto& m : omega_.points) {
        rvector v = to_rvector(m);
        std::vector<rvector> tight;
        for (const auto& h : basis_b_) tight.push_back(h.normal);
        for (const auto& h : facets_)
            if (dot(h.normal, v) == h.level) tight.push_back(h.normal);
        if (rank(tight) == n) vertices_.push_back(std::move(v));
    }
}

void newton_polyhedron::compute_lattice()
{
    const std::size_t n = spec_.n;
    auto max_gens = [&](const std::vector<std::size_t>& verts, const std::vector<std::size_t>& rays) {
        std::vector<std::size_t> g;
        for (std::size_t i = 0; i < facets_.size(); ++i) {
            const auto& h = facets_[i];
            bool ok = true;
            for (auto v : verts)
                if (dot(h.normal, vertices_[v]) != h.level) {
                    ok = false;
                    break;
                }
            for (auto j : rays)
                if (ok && sgn(h.normal[j]) != 0) ok = false;
            if (ok) g.push_back(i);
        }
        return g;
    };
    auto face_dim = [&](const std::vector<std::size_t>& verts, const std::vector<std::size_t>& rays) {
        std::vector<rvector> dirs;
        for (std::size_t k = 1; k < verts.size(); ++k) dirs.push_back(sub(vertices_[verts[k]], vertices_[verts[0]]));
        for (auto j : rays) dirs.push_back(unit_vector(n, j));
        return static_cast<int>(rank(dirs));
    };

    std::vector<std::size_t> all_verts(vertices_.size());
    for (std::size_t i = 0; i < all_verts.size(); ++i) all_verts[i] = i;
    using key = std::pair<std::vector<std::size_t>, std::vector<std::size_t>>;
    std::map<key, face_data> seen;
    std::queue<key> work;
    key top{all_verts, spec_.s};
    seen[top] = face_data{max_gens(top.first, top.second), top.first, top.second, dim_};
    work.push(top);
    while (!work.empty()) {
        key k = work.front();
        work.pop();
        const std::vector<std::size_t> gens = seen[k].gens;
        for (std::size_t i = 0; i < facets_.size(); ++i) {
            if (std::binary_search(gens.begin(), gens.end(), i)) continue;
            const auto& h = facets_[i];
            key sub_key;
            for (auto v : k.first)
                if (dot(h.normal, vertices_[v]) == h.level) sub_key.first.push_back(v);
            if (sub_key.first.empty()) continue;
            for (auto j : k.second)
                if (sgn(h.normal[j]) == 0) sub_key.second.push_back(j);
            if (seen.count(sub_key)) continue;
            seen[sub_key] = face_data{max_gens(sub_key.first, sub_key.second), sub_key.first, sub_key.second,
                                      face_dim(sub_key.first, sub_key.second)};
            work.push(sub_key);
        }
    }
    for (auto& [k, fd] : seen) lattice_.push_back(fd);
    std::stable_sort(lattice_.begin(), lattice_.end(), [](const face_data& a, const face_data& b) {
        if (a.dim != b.dim) return a.dim > b.dim;
        if (a.verts != b.verts) return a.verts < b.verts;
        return a.rays < b.rays;
    });
    std::vector<std::size_t> all_facets(facets_.size());
    for (std::size_t i = 0; i < all_facets.size(); ++i) all_facets[i] = i;
    lattice_.push_back(face_data{all_facets, {}, {}, -1});
}

namespace {

face make_face(const polyhedron_ptr& p, const newton_polyhedron::face_data& fd)
{
    face f;
    f.parent = p;
    f.generator_idx = fd.gens;
    f.vertex_set = fd.verts;
    f.ray_set = fd.rays;
    f.dim = fd.dim;
    f.is_empty = fd.verts.empty();
    f.is_improper = !f.is_empty && fd.verts.size() == p->vertices().size() && fd.rays == p->rays();
    return f;
}

}  // namespace

std::vector<face> enumerate_faces(const polyhedron_ptr& p)
{
    std::vector<face> out;
    for (const auto& fd : p->lattice()) out.push_back(make_face(p, fd));
    return out;
}

face improper_face(const polyhedron_ptr& p) { return make_face(p, p->lattice().front()); }

face empty_face(const polyhedron_ptr& p) { return make_face(p, p->lattice().back()); }

std::vector<rvector> face_points(const face& f)
{
    std::vector<rvector> pts;
    for (auto v : f.vertex_set) pts.push_back(f.parent->vertices()[v]);
    for (auto j : f.ray_set) pts.push_back(unit_vector(f.parent->n(), j));
    return pts;
}

std::vector<exponent> lattice_points(const face& f)
{
    std::vector<exponent> out;
    if (f.is_empty) return out;
    const auto& facets = f.parent->facets();
    for (const auto& m : f.parent->omega().points) {
        rvector v = to_rvector(m);
        bool ok = true;
        for (auto i : f.generator_idx)
            if (dot(facets[i].normal, v) != facets[i].level) {
                ok = false;
                break;
            }
        if (ok) out.push_back(m);
    }
    return out;
}

bool is_subface(const face& g, const face& f)
{
    if (g.parent != f.parent) return false;
    if (g.is_empty) return true;
    if (f.is_empty) return false;
    return subset_of(g.vertex_set, f.vertex_set) && subset_of(g.ray_set, f.ray_set);
}

cone face_cone(const face& f)
{
    cone c;
    for (auto i : f.generator_idx) c.generators.push_back(f.parent->facets()[i].normal);
    for (const auto& h : f.parent->basis_b()) c.lineality.push_back(h.normal);
    return c;
}

namespace {

// Shared body of the open and closed dual-cone membership tests.
bool dual_member(const face& f, const rvector& x, bool open)
{
    const auto& p = *f.parent;
    if (x.size() != p.n()) throw dimension_error("dual cone test: wrong dimension");
    if (f.is_empty) return p.spec().in_z(x) && (!open || !is_zero(x));
    if (f.is_improper && open && is_zero(x)) return false;
    const auto& verts = p.vertices();
    rational rho = dot(x, verts[f.vertex_set.front()]);
    for (auto v : f.vertex_set)
        if (dot(x, verts[v]) != rho) return false;
    for (auto j : f.ray_set)
        if (sgn(x[j]) != 0) return false;
    for (std::size_t v = 0; v < verts.size(); ++v) {
        if (std::binary_search(f.vertex_set.begin(), f.vertex_set.end(), v)) continue;
        rational w = dot(x, verts[v]);
        if (open ? w <= rho : w < rho) return false;
    }
    for (auto j : p.rays()) {
        if (std::binary_search(f.ray_set.begin(), f.ray_set.end(), j)) continue;
        if (open ? sgn(x[j]) <= 0 : sgn(x[j]) < 0) return false;
    }
    return true;
}

}  // namespace

bool interior_contains(const face& f, const rvector& x) { return dual_member(f, x, true); }

bool cone_contains(const face& f, const rvector& x) { return dual_member(f, x, false); }

face argmin_face(const polyhedron_ptr& p, const rvector& x)
{
    if (!p->spec().in_z(x)) throw std::invalid_argument("argmin_face: direction outside Z(S)");
    if (p->is_null()) return empty_face(p);
    const auto& verts = p->vertices();
    rational best = dot(x, verts.front());
    for (const auto& v : verts) best = std::min(best, dot(x, v));
    newton_polyhedron::face_data key;
    for (std::size_t i = 0; i < verts.size(); ++i)
        if (dot(x, verts[i]) == best) key.verts.push_back(i);
    for (auto j : p->rays())
        if (sgn(x[j]) == 0) key.rays.push_back(j);
    for (const auto& fd : p->lattice())
        if (fd.verts == key.verts && fd.rays == key.rays) return make_face(p, fd);
    throw std::logic_error("argmin_face: minimizing set is not in the face lattice");
}

std::optional<rvector> cones_interior_intersection(const std::vector<face>& faces)
{
    if (faces.empty()) throw std::invalid_argument("cones_interior_intersection: no faces");
    const std::size_t n = faces.front().parent->n();
    std::size_t levels = 0;
    for (const auto& f : faces) {
        if (f.parent->n() != n) throw dimension_error("faces live in different ambient spaces");
        if (!f.is_empty) ++levels;
    }
    strict_system sys;
    sys.dim = n + levels;
    auto row = [&](const rvector& a, std::size_t level_idx, bool with_level) {
        rvector r = zero_vector(sys.dim);
        for (std::size_t i = 0; i < n; ++i) r[i] = a[i];
        if (with_level) r[n + level_idx] = -1;
        return r;
    };
    std::size_t li = 0;
    for (const auto& f : faces) {
        const auto& p = *f.parent;
        if (f.is_empty) {
            for (auto j : p.rays()) sys.weak.push_back({row(unit_vector(n, j), 0, false), 0});
            continue;
        }
        const auto& verts = p.vertices();
        for (std::size_t v = 0; v < verts.size(); ++v) {
            bool in = std::binary_search(f.vertex_set.begin(), f.vertex_set.end(), v);
            linear_row r{row(verts[v], li, true), 0};
            (in ? sys.equalities : sys.strict).push_back(r);
        }
        for (auto j : p.rays()) {
            bool in = std::binary_search(f.ray_set.begin(), f.ray_set.end(), j);
            linear_row r{row(unit_vector(n, j), 0, false), 0};
            (in ? sys.equalities : sys.strict).push_back(r);
        }
        ++li;
    }
    auto project = [&](const rvector& y) { return rvector(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)); };
    auto accept = [&](const rvector& x) {
        for (const auto& f : faces)
            if (!interior_contains(f, x)) throw std::logic_error("cone intersection witness failed re-check");
        return x;
    };
    if (!sys.strict.empty()) {
        auto y = solve_strict(sys);
        if (!y) return std::nullopt;
        return accept(project(*y));
    }
    // Only improper or empty faces: any nonzero feasible x will do.
    for (std::size_t i = 0; i < n; ++i)
        for (int sign : {1, -1}) {
            strict_system s2 = sys;
            rvector a = zero_vector(sys.dim);
            a[i] = sign;
            s2.strict.push_back({a, 0});
            auto y = solve_strict(s2);
            if (y) return accept(project(*y));
        }
    return std::nullopt;
}

cone_generators cones_closed_intersection(const std::vector<face>& faces)
{
    if (faces.empty()) throw std::invalid_argument("cones_closed_intersection: no faces");
    const std::size_t n = faces.front().parent->n();
    std::vector<rvector> rows;
    for (const auto& f : faces) {
        const auto& p = *f.parent;
        for (auto j : p.rays())
            if (!std::binary_search(f.ray_set.begin(), f.ray_set.end(), j)) rows.push_back(unit_vector(n, j));
        if (f.is_empty) continue;
        const auto& verts = p.vertices();
        const rvector& v0 = verts[f.vertex_set.front()];
        for (std::size_t v = 0; v < verts.size(); ++v) {
            rvector d = sub(verts[v], v0);
            rows.push_back(d);
            if (std::binary_search(f.vertex_set.begin(), f.vertex_set.end(), v)) rows.push_back(scale(d, -1));
        }
        for (auto j : f.ray_set) {
            rows.push_back(unit_vector(n, j));
            rows.push_back(scale(unit_vector(n, j), -1));
        }
    }
    return cone_from_inequalities(rows, n);
}

face essential_face(const std::vector<rvector>& points, const polyhedron_ptr& p)
{
    if (points.empty()) throw std::invalid_argument("essential_face: no points");
    const std::size_t n = p->n();
    rvector c = zero_vector(n);
    for (const auto& x : points) {
        if (!p->contains(x)) throw std::invalid_argument("essential_face: point " + to_string(x) + " outside polyhedron");
        c = add(c, x);
    }
    c = scale(c, rational(1, static_cast<unsigned long>(points.size())));
    newton_polyhedron::face_data key;
    std::vector<std::size_t> tight;
    for (std::size_t i = 0; i < p->facets().size(); ++i)
        if (dot(p->facets()[i].normal, c) == p->facets()[i].level) tight.push_back(i);
    for (std::size_t v = 0; v < p->vertices().size(); ++v) {
        bool ok = true;
        for (auto i : tight)
            if (dot(p->facets()[i].normal, p->vertices()[v]) != p->facets()[i].level) ok = false;
        if (ok) key.verts.push_back(v);
    }
    for (auto j : p->rays()) {
        bool ok = true;
        for (auto i : tight)
            if (sgn(p->facets()[i].normal[j]) != 0) ok = false;
        if (ok) key.rays.push_back(j);
    }
    for (const auto& fd : p->lattice())
        if (fd.verts == key.verts && fd.rays == key.rays) return make_face(p, fd);
    throw std::logic_error("essential_face: face not found in lattice");
}

std::vector<std::size_t> face_closure_structure(const face& f)
{
    if (f.is_empty) throw std::invalid_argument("face_closure_structure: empty face");
    const auto& p = *f.parent;
    std::vector<std::size_t> s0;
    if (f.is_improper) {
        s0 = p.rays();
    } else {
        rvector q = zero_vector(p.n());
        for (auto i : f.generator_idx) q = add(q, p.facets()[i].normal);
        if (!interior_contains(f, q)) throw std::logic_error("canonical witness is not interior");
        for (auto j : p.rays())
            if (sgn(q[j]) == 0) s0.push_back(j);
    }
    if (s0 != f.ray_set) throw std::logic_error("face rays differ from S0 directions");
    exponent_set sub(p.n(), lattice_points(f));
    auto rebuilt = build_newton(sub, domain_spec(p.n(), s0));
    std::set<rvector> a(rebuilt->vertices().begin(), rebuilt->vertices().end());
    std::set<rvector> b;
    for (auto v : f.vertex_set) b.insert(p.vertices()[v]);
    if (a != b) throw std::logic_error("rebuilt polyhedron does not reproduce the face");
    return s0;
}

}  // namespace nh
