#include "nh/exact_numeric.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

namespace nh {

rvector zero_vector(std::size_t n) { return rvector(n, rational(0)); }

rvector unit_vector(std::size_t n, std::size_t j)
{
    rvector e = zero_vector(n);
    e.at(j) = 1;
    return e;
}

static void require_same_size(const rvector& x, const rvector& y)
{
    if (x.size() != y.size())
        throw dimension_error("vector length mismatch: " + std::to_string(x.size()) + " vs " +
                              std::to_string(y.size()));
}

rational dot(const rvector& x, const rvector& y)
{
    require_same_size(x, y);
    rational s = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (sgn(x[i]) != 0 && sgn(y[i]) != 0) s += x[i] * y[i];
    return s;
}

rvector add(const rvector& x, const rvector& y)
{
    require_same_size(x, y);
    rvector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
    return r;
}

rvector sub(const rvector& x, const rvector& y)
{
    require_same_size(x, y);
    rvector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
    return r;
}

rvector scale(const rvector& x, const rational& c)
{
    rvector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] * c;
    return r;
}

bool is_zero(const rvector& x)
{
    return std::all_of(x.begin(), x.end(), [](const rational& q) { return sgn(q) == 0; });
}

rvector primitive(const rvector& x)
{
    if (is_zero(x)) return x;
    mpz_class l = 1;
    for (const auto& q : x) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
    std::vector<mpz_class> ints(x.size());
    mpz_class g = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mpz_class num = x[i].get_num() * (l / x[i].get_den());
        ints[i] = num;
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), num.get_mpz_t());
    }
    rvector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = rational(ints[i] / g);
    return r;
}

rvector canonical_line(const rvector& x)
{
    rvector r = primitive(x);
    for (const auto& q : r) {
        if (sgn(q) == 0) continue;
        if (sgn(q) < 0)
            for (auto& c : r) c = -c;
        break;
    }
    return r;
}

std::string to_string(const rational& q)
{
    mpq_class c = q;
    c.canonicalize();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

std::string to_string(const rvector& x)
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) os << ',';
        os << x[i].get_str();
    }
    os << ')';
    return os.str();
}

std::size_t rank(const rmatrix& m) { return rank(m.rows); }

std::size_t rank(const std::vector<rvector>& rows)
{
    if (rows.empty()) return 0;
    const std::size_t cols = rows.front().size();
    std::vector<std::vector<mpz_class>> a;
    a.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.size() != cols) throw dimension_error("ragged matrix in rank");
        rvector p = primitive(r);
        std::vector<mpz_class> z(cols);
        for (std::size_t j = 0; j < cols; ++j) z[j] = p[j].get_num();
        a.push_back(std::move(z));
    }
    // Bareiss elimination: every division below is exact.
    std::size_t r = 0;
    mpz_class prev = 1;
    for (std::size_t c = 0; c < cols && r < a.size(); ++c) {
        std::size_t piv = r;
        while (piv < a.size() && a[piv][c] == 0) ++piv;
        if (piv == a.size()) continue;
        std::swap(a[piv], a[r]);
        for (std::size_t i = r + 1; i < a.size(); ++i) {
            for (std::size_t j = c + 1; j < cols; ++j) {
                mpz_class v = a[r][c] * a[i][j] - a[i][c] * a[r][j];
                mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
                a[i][j] = v;
            }
            a[i][c] = 0;
        }
        prev = a[r][c];
        ++r;
    }
    return r;
}

std::vector<std::size_t> rref(std::vector<rvector>& rows)
{
    std::vector<std::size_t> pivots;
    if (rows.empty()) return pivots;
    const std::size_t cols = rows.front().size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
        std::size_t piv = r;
        while (piv < rows.size() && sgn(rows[piv][c]) == 0) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[piv], rows[r]);
        rational inv = 1 / rows[r][c];
        for (auto& v : rows[r]) v *= inv;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == r || sgn(rows[i][c]) == 0) continue;
            rational f = rows[i][c];
            for (std::size_t j = c; j < cols; ++j) rows[i][j] -= f * rows[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    rows.resize(r);
    return pivots;
}

std::vector<rvector> null_space(const std::vector<rvector>& rows, std::size_t dim)
{
    for (const auto& r : rows)
        if (r.size() != dim) throw dimension_error("null_space: row length differs from dim");
    std::vector<rvector> m = rows;
    std::vector<std::size_t> pivots = rref(m);
    std::vector<bool> is_pivot(dim, false);
    for (auto p : pivots) is_pivot[p] = true;
    std::vector<rvector> basis;
    for (std::size_t f = 0; f < dim; ++f) {
        if (is_pivot[f]) continue;
        rvector v = zero_vector(dim);
        v[f] = 1;
        for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -m[i][f];
        basis.push_back(primitive(v));
    }
    return basis;
}

bool satisfies(const strict_system& sys, const rvector& x)
{
    if (x.size() != sys.dim) return false;
    for (const auto& r : sys.equalities)
        if (dot(r.a, x) != r.b) return false;
    for (const auto& r : sys.weak)
        if (dot(r.a, x) < r.b) return false;
    for (const auto& r : sys.strict)
        if (dot(r.a, x) <= r.b) return false;
    return true;
}

namespace {

// Dense tableau in canonical form: basis columns are unit columns.
struct tableau {
    std::vector<std::vector<rational>> a;  // m rows, cols entries each
    std::vector<rational> rhs;
    std::vector<std::size_t> basis;
    std::size_t cols = 0;

    void pivot(std::size_t r, std::size_t c, std::vector<rational>& obj, rational& obj_val)
    {
        rational inv = 1 / a[r][c];
        for (auto& v : a[r]) v *= inv;
        rhs[r] *= inv;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i == r || sgn(a[i][c]) == 0) continue;
            rational f = a[i][c];
            for (std::size_t j = 0; j < cols; ++j)
                if (sgn(a[r][j]) != 0) a[i][j] -= f * a[r][j];
            rhs[i] -= f * rhs[r];
        }
        if (sgn(obj[c]) != 0) {
            rational f = obj[c];
            for (std::size_t j = 0; j < cols; ++j)
                if (sgn(a[r][j]) != 0) obj[j] -= f * a[r][j];
            obj_val -= f * rhs[r];
        }
        basis[r] = c;
    }

    // Maximizes c.y with Bland's rule; obj holds the reduced costs.
    void maximize(std::vector<rational>& obj, rational& obj_val, std::size_t usable_cols)
    {
        for (;;) {
            std::size_t enter = usable_cols;
            for (std::size_t j = 0; j < usable_cols; ++j)
                if (sgn(obj[j]) > 0) {
                    enter = j;
                    break;
                }
            if (enter == usable_cols) return;
            std::size_t leave = a.size();
            rational best;
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (sgn(a[i][enter]) <= 0) continue;
                rational ratio = rhs[i] / a[i][enter];
                if (leave == a.size() || ratio < best ||
                    (ratio == best && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave == a.size()) throw std::logic_error("simplex: objective unbounded");
            pivot(leave, enter, obj, obj_val);
        }
    }
};

}  // namespace

std::optional<rvector> solve_strict(const strict_system& sys)
{
    const std::size_t n = sys.dim;
    auto check = [n](const linear_row& r) {
        if (r.a.size() != n) throw dimension_error("solve_strict: constraint length differs from dim");
    };
    for (const auto& r : sys.equalities) check(r);
    for (const auto& r : sys.weak) check(r);
    for (const auto& r : sys.strict) check(r);

    const bool has_strict = !sys.strict.empty();
    if (sys.equalities.empty() && sys.weak.empty() && !has_strict) return zero_vector(n);

    // Columns: x+ (n), x- (n), t+, t-, one slack per weak/strict row, cap slack.
    const std::size_t n_weak = sys.weak.size();
    const std::size_t n_strict = sys.strict.size();
    const std::size_t col_tp = 2 * n;
    const std::size_t col_tm = 2 * n + 1;
    const std::size_t col_slack = 2 * n + 2;
    const std::size_t col_cap = col_slack + n_weak + n_strict;
    const std::size_t n_struct = col_cap + (has_strict ? 1 : 0);

    std::vector<std::vector<rational>> rows;
    std::vector<rational> rhs;
    auto push_row = [&](const linear_row& r) {
        std::vector<rational> row(n_struct, rational(0));
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = r.a[i];
            row[n + i] = -r.a[i];
        }
        rows.push_back(std::move(row));
        rhs.push_back(r.b);
    };
    for (const auto& r : sys.equalities) push_row(r);
    for (std::size_t k = 0; k < n_weak; ++k) {
        push_row(sys.weak[k]);
        rows.back()[col_slack + k] = -1;
    }
    for (std::size_t k = 0; k < n_strict; ++k) {
        push_row(sys.strict[k]);
        rows.back()[col_tp] = -1;
        rows.back()[col_tm] = 1;
        rows.back()[col_slack + n_weak + k] = -1;
    }
    if (has_strict) {
        std::vector<rational> row(n_struct, rational(0));
        row[col_tp] = 1;
        row[col_tm] = -1;
        row[col_cap] = 1;
        rows.push_back(std::move(row));
        rhs.push_back(1);
    }

    const std::size_t m = rows.size();
    tableau tab;
    tab.cols = n_struct + m;
    tab.a.resize(m);
    tab.rhs = rhs;
    tab.basis.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (sgn(tab.rhs[i]) < 0) {
            for (auto& v : rows[i]) v = -v;
            tab.rhs[i] = -tab.rhs[i];
        }
        tab.a[i] = std::move(rows[i]);
        tab.a[i].resize(tab.cols, rational(0));
        tab.a[i][n_struct + i] = 1;
        tab.basis[i] = n_struct + i;
    }

    // Phase 1: maximize -(sum of artificials).
    std::vector<rational> obj(tab.cols, rational(0));
    rational obj_val = 0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n_struct; ++j) obj[j] += tab.a[i][j];
        obj_val -= tab.rhs[i];
    }
    tab.maximize(obj, obj_val, tab.cols);
    for (std::size_t i = 0; i < m; ++i)
        if (tab.basis[i] >= n_struct && sgn(tab.rhs[i]) != 0) return std::nullopt;

    // Drive artificials out of the basis; rows that cannot be cleared are redundant.
    for (std::size_t i = 0; i < tab.a.size();) {
        if (tab.basis[i] < n_struct) {
            ++i;
            continue;
        }
        std::size_t c = n_struct;
        for (std::size_t j = 0; j < n_struct; ++j)
            if (sgn(tab.a[i][j]) != 0) {
                c = j;
                break;
            }
        if (c == n_struct) {
            tab.a.erase(tab.a.begin() + static_cast<std::ptrdiff_t>(i));
            tab.rhs.erase(tab.rhs.begin() + static_cast<std::ptrdiff_t>(i));
            tab.basis.erase(tab.basis.begin() + static_cast<std::ptrdiff_t>(i));
            continue;
        }
        tab.pivot(i, c, obj, obj_val);
        ++i;
    }
    for (auto& row : tab.a) row.resize(n_struct);
    tab.cols = n_struct;

    auto extract = [&]() {
        std::vector<rational> y(n_struct, rational(0));
        for (std::size_t i = 0; i < tab.a.size(); ++i) y[tab.basis[i]] = tab.rhs[i];
        return y;
    };

    if (has_strict) {
        // Phase 2: maximize t = t+ - t-.
        std::vector<rational> obj2(n_struct, rational(0));
        obj2[col_tp] = 1;
        obj2[col_tm] = -1;
        rational val2 = 0;
        for (std::size_t i = 0; i < tab.a.size(); ++i) {
            rational cb = tab.basis[i] == col_tp ? rational(1) : tab.basis[i] == col_tm ? rational(-1) : rational(0);
            if (sgn(cb) == 0) continue;
            for (std::size_t j = 0; j < n_struct; ++j) obj2[j] -= cb * tab.a[i][j];
            val2 -= cb * tab.rhs[i];
        }
        tab.maximize(obj2, val2, n_struct);
        std::vector<rational> y = extract();
        if (sgn(y[col_tp] - y[col_tm]) <= 0) return std::nullopt;
    }

    std::vector<rational> y = extract();
    rvector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - y[n + i];
    if (!satisfies(sys, x)) throw std::logic_error("solve_strict: witness failed exact re-check");
    return x;
}

std::optional<std::vector<bool>> gf2_solve(const std::vector<bit_vector>& span_vectors,
                                           const bit_vector& target)
{
    const std::size_t n = target.size();
    const std::size_t k = span_vectors.size();
    for (const auto& v : span_vectors)
        if (v.size() != n) throw dimension_error("gf2: bit-vector length mismatch");

    // Each working row carries its vector and the combination that produced it.
    struct row {
        bit_vector v;
        std::vector<bool> combo;
    };
    std::vector<row> basis;
    std::vector<std::size_t> pivot_col;
    for (std::size_t i = 0; i < k; ++i) {
        row r{span_vectors[i], std::vector<bool>(k, false)};
        r.combo[i] = true;
        for (std::size_t b = 0; b < basis.size(); ++b)
            if (r.v[pivot_col[b]]) {
                for (std::size_t j = 0; j < n; ++j) r.v[j] = r.v[j] != basis[b].v[j];
                for (std::size_t j = 0; j < k; ++j) r.combo[j] = r.combo[j] != basis[b].combo[j];
            }
        auto it = std::find(r.v.begin(), r.v.end(), true);
        if (it == r.v.end()) continue;
        std::size_t p = static_cast<std::size_t>(it - r.v.begin());
        for (auto& b : basis)
            if (b.v[p]) {
                for (std::size_t j = 0; j < n; ++j) b.v[j] = b.v[j] != r.v[j];
                for (std::size_t j = 0; j < k; ++j) b.combo[j] = b.combo[j] != r.combo[j];
            }
        basis.push_back(std::move(r));
        pivot_col.push_back(p);
    }

    bit_vector t = target;
    std::vector<bool> combo(k, false);
    for (std::size_t b = 0; b < basis.size(); ++b)
        if (t[pivot_col[b]]) {
            for (std::size_t j = 0; j < n; ++j) t[j] = t[j] != basis[b].v[j];
            for (std::size_t j = 0; j < k; ++j) combo[j] = combo[j] != basis[b].combo[j];
        }
    if (std::find(t.begin(), t.end(), true) != t.end()) return std::nullopt;
    return combo;
}

bool gf2_contains(const std::vector<bit_vector>& span_vectors, const bit_vector& target)
{
    return gf2_solve(span_vectors, target).has_value();
}

namespace {

void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f)
{
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    if (k > n) return;
    for (;;) {
        f(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

cone_generators cone_from_inequalities(const std::vector<rvector>& rows_in, std::size_t dim)
{
    std::set<rvector> uniq;
    for (const auto& r : rows_in) {
        if (r.size() != dim) throw dimension_error("cone_from_inequalities: row length differs from dim");
        if (!is_zero(r)) uniq.insert(primitive(r));
    }
    std::vector<rvector> rows(uniq.begin(), uniq.end());

    cone_generators out;
    std::vector<rvector> lin = null_space(rows, dim);
    {
        std::vector<rvector> tmp = lin;
        rref(tmp);
        for (auto& v : tmp) out.lineality.push_back(canonical_line(v));
        std::sort(out.lineality.begin(), out.lineality.end());
    }
    const std::size_t pointed_dim = dim - lin.size();
    if (pointed_dim == 0) return out;

    auto feasible = [&](const rvector& x) {
        for (const auto& r : rows)
            if (dot(r, x) < 0) return false;
        return true;
    };

    std::set<rvector> rays;
    const std::size_t k = pointed_dim - 1;
    for_each_subset(rows.size(), k, [&](const std::vector<std::size_t>& sel) {
        std::vector<rvector> sys = lin;
        for (auto i : sel) sys.push_back(rows[i]);
        if (rank(sys) != dim - 1) return;
        std::vector<rvector> ns = null_space(sys, dim);
        if (ns.size() != 1) return;
        const rvector& v = ns.front();
        if (feasible(v)) rays.insert(primitive(v));
        rvector w = scale(v, -1);
        if (feasible(w)) rays.insert(primitive(w));
    });
    out.rays.assign(rays.begin(), rays.end());
    return out;
}

}  // namespace nh
