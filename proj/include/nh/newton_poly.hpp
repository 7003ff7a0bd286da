#pragma once

#include "nh/exact_numeric.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace nh {

using exponent = std::vector<long>;

/// Finite set of multi-indices in Z_+^n, sorted and deduplicated.
struct exponent_set {
    std::size_t n = 0;
    std::vector<exponent> points;

    exponent_set() = default;
    exponent_set(std::size_t dim, std::vector<exponent> pts);

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
    bool contains(const exponent& m) const;
    bool operator==(const exponent_set& o) const { return n == o.n && points == o.points; }
    bool operator<(const exponent_set& o) const { return points < o.points; }
};

/// Ambient dimension n and the local directions S (0-based, sorted).
struct domain_spec {
    std::size_t n = 0;
    std::vector<std::size_t> s;

    domain_spec() = default;
    domain_spec(std::size_t dim, std::vector<std::size_t> local);

    bool in_s(std::size_t j) const;
    /// Membership in Z(S): nonnegative in every local direction.
    bool in_z(const rvector& x) const;
};

rvector to_rvector(const exponent& m);

/// Affine hyperplane normal.x = level, or the halfspace normal.x >= level.
struct hyperplane {
    rvector normal;
    rational level;
};

class newton_polyhedron;
using polyhedron_ptr = std::shared_ptr<const newton_polyhedron>;

/// A face of a Newton polyhedron, identified by its vertex and ray sets.
struct face {
    polyhedron_ptr parent;
    std::vector<std::size_t> generator_idx;  // maximal set of facets containing the face
    std::vector<std::size_t> vertex_set;     // indices into parent->vertices()
    std::vector<std::size_t> ray_set;        // coordinate directions j with e_j in the face
    int dim = -1;
    bool is_empty = true;
    bool is_improper = false;

    bool operator==(const face& o) const
    {
        return parent == o.parent && vertex_set == o.vertex_set && ray_set == o.ray_set;
    }
    bool operator!=(const face& o) const { return !(*this == o); }
};

/// Polyhedral cone CoSp(generators) + span(lineality).
struct cone {
    std::vector<rvector> generators;
    std::vector<rvector> lineality;
};

/// Convex hull of omega + R_+^S with both representations.
class newton_polyhedron {
public:
    /// Throws std::invalid_argument on an empty or ill-dimensioned omega.
    static polyhedron_ptr build(const exponent_set& omega, const domain_spec& spec);
    /// Placeholder for a component with empty support: only the empty face.
    static polyhedron_ptr build_null(const domain_spec& spec);

    const exponent_set& omega() const { return omega_; }
    const domain_spec& spec() const { return spec_; }
    std::size_t n() const { return spec_.n; }
    bool is_null() const { return omega_.empty(); }
    const std::vector<rvector>& vertices() const { return vertices_; }
    const std::vector<std::size_t>& rays() const { return spec_.s; }
    const std::vector<hyperplane>& facets() const { return facets_; }
    const std::vector<hyperplane>& basis_b() const { return basis_b_; }
    int dim() const { return dim_; }

    /// True when x satisfies every facet and equality.
    bool contains(const rvector& x) const;

    struct face_data {
        std::vector<std::size_t> gens;
        std::vector<std::size_t> verts;
        std::vector<std::size_t> rays;
        int dim = -1;
    };
    /// Nonempty faces followed by the empty face, by descending dimension.
    const std::vector<face_data>& lattice() const { return lattice_; }

private:
    exponent_set omega_;
    domain_spec spec_;
    std::vector<rvector> vertices_;
    std::vector<hyperplane> facets_;
    std::vector<hyperplane> basis_b_;
    int dim_ = -1;
    std::vector<face_data> lattice_;

    void compute_hull();
    void compute_lattice();
};

polyhedron_ptr build_newton(const exponent_set& omega, const domain_spec& spec);

/// All faces: improper first, empty last, descending dimension in between.
std::vector<face> enumerate_faces(const polyhedron_ptr& p);
face improper_face(const polyhedron_ptr& p);
face empty_face(const polyhedron_ptr& p);

/// Vertices and ray directions of f, the point set used for rank tests.
std::vector<rvector> face_points(const face& f);
/// Points of omega lying in f.
std::vector<exponent> lattice_points(const face& f);

bool is_subface(const face& g, const face& f);

cone face_cone(const face& f);

/// x lies in the relative interior of the dual cone of f.
bool interior_contains(const face& f, const rvector& x);
/// x lies in the closed dual cone of f.
bool cone_contains(const face& f, const rvector& x);

/// Face of p on which x attains its minimum; x must lie in Z(S).
face argmin_face(const polyhedron_ptr& p, const rvector& x);

/// Common point of the dual cone interiors, if any.
std::optional<rvector> cones_interior_intersection(const std::vector<face>& faces);

/// Generators of the intersection of the closed dual cones.
cone_generators cones_closed_intersection(const std::vector<face>& faces);

/// Smallest face of p containing every point.
face essential_face(const std::vector<rvector>& points, const polyhedron_ptr& p);

/// Local directions S0 with f = N(omega cap f, S0).
std::vector<std::size_t> face_closure_structure(const face& f);

}  // namespace nh
