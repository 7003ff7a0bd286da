#pragma once

#include "nh/exact_numeric.hpp"
#include "nh/newton_poly.hpp"

#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace nh {

/// The exponent sets of the d components over a common domain.
struct lambda_tuple {
    std::vector<exponent_set> lambdas;
    domain_spec spec;

    std::size_t d() const { return lambdas.size(); }
    bool disjoint() const;
};

/// Polyhedra and face lattices for every component.
struct lambda_geometry {
    lambda_tuple lam;
    std::vector<polyhedron_ptr> polys;
    std::vector<std::vector<face>> faces;
};

lambda_geometry build_geometry(const lambda_tuple& lam);

struct face_tuple {
    std::vector<face> faces;
    std::size_t union_rank = 0;
    std::optional<rvector> overlap_witness;
};

/// Vertices and rays of all faces, as one point set.
std::vector<rvector> union_points(const std::vector<face>& faces);
/// The union of the omega points lying in each face, sorted.
std::vector<exponent> union_lattice_points(const std::vector<face>& faces);

struct enumeration_stats {
    std::size_t examined = 0;  // complete tuples reached
    std::size_t pruned = 0;    // partial tuples cut by the rank bound
    std::size_t low_rank = 0;  // complete tuples with union rank <= n-1
    std::size_t lo = 0;        // low-rank tuples whose cone interiors meet
};

/// Visits every low-rank tuple; with require_overlap only those whose cone
/// interiors share a point (the witness is attached). The visitor returns
/// false to stop.
enumeration_stats enumerate_low_rank_tuples(const lambda_geometry& g, bool require_overlap,
                                            const std::function<bool(const face_tuple&)>& visit);

enumeration_stats enumerate_lo_tuples(const lambda_geometry& g,
                                      const std::function<bool(const face_tuple&)>& visit);

/// Face described by its vertex coordinates and ray directions.
struct face_spec {
    bool empty = true;
    std::vector<rvector> vertices;
    std::vector<std::size_t> rays;
};

face_spec describe(const face& f);

struct unbounded_certificate {
    std::vector<face_spec> faces;
    std::vector<exponent> odd_subset;
    rvector overlap_witness;
    std::size_t union_rank = 0;
    std::vector<std::optional<rational>> levels;  // witness level per nonempty face
};

enum class verdict_kind { bounded, unbounded };

struct verdict {
    verdict_kind kind = verdict_kind::bounded;
    std::optional<unbounded_certificate> certificate;
    enumeration_stats stats;
};

/// Input error raised when decide_disjoint receives overlapping supports.
class not_disjoint_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evenness test over F_lo for any tuple of supports. Dropping the overlap
/// requirement keeps only the rank filter.
verdict decide_lo(const lambda_tuple& lam, bool require_overlap = true);
verdict decide_disjoint(const lambda_tuple& lam);

struct certificate_check {
    bool ok = false;
    std::string reason;
};

/// Re-validates an unbounded certificate from scratch.
certificate_check verify_certificate(const lambda_tuple& lam, const unbounded_certificate& cert);

struct graph_certificate {
    face_spec face;
    std::vector<std::size_t> a_set;  // coordinate directions e_i taken into the union
    std::vector<exponent> odd_subset;
    std::size_t union_rank = 0;
};

struct graph_verdict {
    verdict_kind kind = verdict_kind::bounded;
    std::optional<graph_certificate> certificate;
    std::size_t pairs_examined = 0;
};

/// Graph case: components {e_1},...,{e_n} followed by lambda_last.
graph_verdict decide_graph(const exponent_set& lambda_last, const domain_spec& spec);
certificate_check verify_graph_certificate(const exponent_set& lambda_last, const domain_spec& spec,
                                           const graph_certificate& cert);

/// Rows P_1..P_d with nonzero rational coefficients.
struct vector_polynomial {
    std::size_t n = 0;
    std::vector<std::map<exponent, rational>> rows;

    std::size_t d() const { return rows.size(); }
    std::vector<exponent_set> supports() const;
    /// Removes zero coefficients.
    void normalize();
};

vector_polynomial apply_matrix(const rmatrix& a, const vector_polynomial& p);
rmatrix identity_matrix(std::size_t d);

struct gl_class {
    rmatrix matrix;
    std::vector<exponent_set> lambdas;
};

/// Chooses the pivot monomial of component k for the current polynomial.
using face_selector = std::function<std::optional<exponent>(const vector_polynomial&, std::size_t)>;

/// Smallest monomial of component k that also occurs in a later component.
std::optional<exponent> default_selector(const vector_polynomial& p, std::size_t k);

std::vector<gl_class> gl_cascade(const vector_polynomial& p, const face_selector& select);

struct general_verdict {
    verdict result;
    std::vector<gl_class> classes;
    std::optional<std::size_t> failing_class;
    std::size_t depth_cap = 0;
    bool depth_cap_hit = false;
};

general_verdict decide_general(const vector_polynomial& p, const domain_spec& spec,
                               std::optional<std::size_t> depth_cap = std::nullopt);

/// Face tuples whose closed cone intersection contains j. Empty faces are
/// used only for components with empty support.
std::vector<face_tuple> classify_dyadic(const lambda_geometry& g, const rvector& j);

/// Rays and both signs of each lineality vector of the closed cone intersection.
std::vector<rvector> cap_generators(const std::vector<face>& faces);

/// Faces F_nu(s) minimizing p_1+...+p_s, for s = 0..N.
std::vector<std::vector<face>> build_face_chain(const face_tuple& tuple, const std::vector<rvector>& cap_gens);

/// x lies in the cone generated by gens (nonnegative combination).
bool in_conic_hull(const std::vector<rvector>& gens, const rvector& x);

}  // namespace nh
