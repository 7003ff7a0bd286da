#include "nh/oscillatory.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace nh {

namespace {

using cplx = std::complex<double>;
constexpr double ln2 = 0.69314718055994530942;

double g(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }

// ---------------------------------------------------------------- sign split

struct phase_term {
    exponent m;
    double a = 0;
};

struct sign_pattern {
    std::vector<double> sign;  // +1 or -1 per term
    double coef = 0;
};

// Folding the 2^n orthants onto the positive one gives
// sum_sigma (-1)^|sigma| exp(i sum_m sigma^m a_m t^m); orthants that induce
// the same term signs are merged, so cancellation is exact.
std::vector<sign_pattern> split_patterns(std::size_t n, const std::vector<phase_term>& terms)
{
    if (terms.size() > 64) throw std::invalid_argument("too many phase terms");
    std::map<std::uint64_t, long> coef;
    for (std::uint64_t sigma = 0; sigma < (std::uint64_t{1} << n); ++sigma) {
        std::uint64_t mask = 0;
        for (std::size_t k = 0; k < terms.size(); ++k) {
            long s = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (sigma >> j & 1) s += terms[k].m[j];
            if (s % 2 != 0) mask |= std::uint64_t{1} << k;
        }
        coef[mask] += std::popcount(sigma) % 2 == 0 ? 1 : -1;
    }
    std::vector<sign_pattern> out;
    for (const auto& [mask, c] : coef) {
        if (c == 0) continue;
        sign_pattern p;
        p.coef = static_cast<double>(c);
        for (std::size_t k = 0; k < terms.size(); ++k) p.sign.push_back(mask >> k & 1 ? -1.0 : 1.0);
        out.push_back(std::move(p));
    }
    return out;
}

struct split_integrand {
    std::size_t n = 0;
    std::vector<phase_term> terms;
    std::vector<sign_pattern> patterns;

    split_integrand(std::size_t dim, std::vector<phase_term> ts) : n(dim)
    {
        for (auto& t : ts)
            if (t.a != 0) terms.push_back(std::move(t));
        patterns = split_patterns(n, terms);
    }

    bool vanishes() const { return patterns.empty(); }

    cplx at_log(const std::vector<double>& u) const
    {
        std::vector<double> tm(terms.size());
        for (std::size_t k = 0; k < terms.size(); ++k) {
            double e = 0;
            for (std::size_t j = 0; j < n; ++j) e += static_cast<double>(terms[k].m[j]) * u[j];
            tm[k] = terms[k].a * std::exp(e);
        }
        return sum_patterns(tm);
    }

    cplx sum_patterns(const std::vector<double>& tm) const
    {
        cplx s = 0;
        if (tm.size() < patterns.size()) {
            // One sincos per term; each pattern is a product of unit factors.
            thread_local std::vector<cplx> e;
            e.resize(tm.size());
            for (std::size_t k = 0; k < tm.size(); ++k) e[k] = cplx(std::cos(tm[k]), std::sin(tm[k]));
            for (const auto& p : patterns) {
                cplx v = p.coef;
                for (std::size_t k = 0; k < tm.size(); ++k) v *= p.sign[k] > 0 ? e[k] : std::conj(e[k]);
                s += v;
            }
            return s;
        }
        for (const auto& p : patterns) {
            double ph = 0;
            for (std::size_t k = 0; k < tm.size(); ++k) ph += p.sign[k] * tm[k];
            s += p.coef * cplx(std::cos(ph), std::sin(ph));
        }
        return s;
    }
};

std::vector<phase_term> full_terms(const vector_polynomial& p, const std::vector<double>& xi)
{
    if (xi.size() != p.d()) throw dimension_error("xi has the wrong length");
    std::map<exponent, double> acc;
    for (std::size_t nu = 0; nu < p.d(); ++nu)
        for (const auto& [m, c] : p.rows[nu]) acc[m] += xi[nu] * c.get_d();
    std::vector<phase_term> out;
    for (const auto& [m, a] : acc) out.push_back({m, a});
    return out;
}

// Subsets T of the terms whose complement cancels in the sign split,
// inclusion-minimal, as bit masks.
std::vector<std::uint64_t> cancelling_subsets(std::size_t n, const std::vector<exponent>& ms)
{
    static std::mutex mu;
    static std::map<std::vector<exponent>, std::vector<std::uint64_t>> cache;
    {
        std::lock_guard lock(mu);
        auto it = cache.find(ms);
        if (it != cache.end()) return it->second;
    }
    std::size_t k = ms.size();
    std::uint64_t all = k >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
    std::vector<std::uint64_t> out;
    if (k > 14) {
        out.push_back(all);
    } else {
        std::vector<std::uint64_t> valid;
        for (std::uint64_t t = 0; t <= all; ++t) {
            std::vector<phase_term> rest;
            for (std::size_t i = 0; i < k; ++i)
                if (!(t >> i & 1)) rest.push_back({ms[i], 1.0});
            if (split_patterns(n, rest).empty()) valid.push_back(t);
        }
        for (auto t : valid) {
            bool minimal = std::none_of(valid.begin(), valid.end(),
                                        [t](std::uint64_t s) { return s != t && (s & t) == s; });
            if (minimal) out.push_back(t);
        }
    }
    std::lock_guard lock(mu);
    cache.emplace(ms, out);
    return out;
}

// |e^{ix} - e^{iy}| <= |x - y| summed over the 2^n orthants, and the weight
// prod eta(t_k) dt_k/t_k has total mass (log 2)^n.
double piece_bound(std::size_t n, const std::vector<phase_term>& terms)
{
    std::vector<exponent> ms;
    for (const auto& t : terms) ms.push_back(t.m);
    double best = std::numeric_limits<double>::infinity();
    for (auto mask : cancelling_subsets(n, ms)) {
        double s = 0;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (!(mask >> i & 1)) continue;
            long deg = std::accumulate(terms[i].m.begin(), terms[i].m.end(), 0L);
            s += std::abs(terms[i].a) * std::ldexp(1.0, static_cast<int>(deg));
        }
        best = std::min(best, s);
    }
    return std::pow(2.0 * ln2, static_cast<double>(n)) * best;
}

// ------------------------------------------------------ eta-weighted rules

struct rule {
    std::vector<double> nodes;  // u = log t
    std::vector<double> weights;
};

const double rule_lo = std::log(0.25);
const double rule_hi = std::log(2.0);

const std::vector<std::size_t> gauss_orders{8, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256};
constexpr std::size_t max_trapezoid = 65536;

double weight_u(double u) { return eta(std::exp(u)); }

// Jacobi matrix of the measure eta(e^u) du by Lanczos with full
// reorthogonalization on a composite Gauss-Legendre discretization.
void jacobi_matrix(std::size_t order, std::vector<double>& alpha, std::vector<double>& beta, double& mass)
{
    using base = boost::math::quadrature::gauss<double, 20>;
    constexpr std::size_t panels = 400;
    std::vector<double> x, w;
    double h = (rule_hi - rule_lo) / panels;
    for (std::size_t p = 0; p < panels; ++p) {
        double mid = rule_lo + (p + 0.5) * h;
        for (std::size_t i = 0; i < base::abscissa().size(); ++i) {
            for (double s : {-1.0, 1.0}) {
                double xi = mid + s * 0.5 * h * base::abscissa()[i];
                x.push_back(xi);
                w.push_back(0.5 * h * base::weights()[i] * weight_u(xi));
            }
        }
    }
    std::size_t m = x.size();
    mass = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<std::vector<double>> q;
    auto inner = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < m; ++i) s += w[i] * a[i] * b[i];
        return s;
    };
    q.emplace_back(m, 1.0 / std::sqrt(mass));
    alpha.clear();
    beta.clear();
    for (std::size_t k = 0; k < order; ++k) {
        std::vector<double> v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = x[i] * q[k][i];
        alpha.push_back(inner(v, q[k]));
        if (k + 1 == order) break;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& qj : q) {
                double c = inner(v, qj);
                for (std::size_t i = 0; i < m; ++i) v[i] -= c * qj[i];
            }
        double nb = std::sqrt(inner(v, v));
        beta.push_back(nb);
        for (auto& vi : v) vi /= nb;
        q.push_back(std::move(v));
    }
}

std::vector<rule> build_gauss_rules()
{
    std::vector<double> alpha, beta;
    double mass = 0;
    jacobi_matrix(gauss_orders.back(), alpha, beta, mass);
    std::vector<rule> out;
    for (std::size_t order : gauss_orders) {
        Eigen::VectorXd diag(order), sub(order - 1);
        for (std::size_t i = 0; i < order; ++i) diag[i] = alpha[i];
        for (std::size_t i = 0; i + 1 < order; ++i) sub[i] = beta[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        rule r;
        for (std::size_t i = 0; i < order; ++i) {
            double v0 = es.eigenvectors()(0, i);
            r.nodes.push_back(es.eigenvalues()[i]);
            r.weights.push_back(mass * v0 * v0);
        }
        out.push_back(std::move(r));
    }
    return out;
}

rule trapezoid_rule(std::size_t count)
{
    rule r;
    double h = (rule_hi - rule_lo) / static_cast<double>(count);
    for (std::size_t i = 1; i < count; ++i) {
        double u = rule_lo + h * static_cast<double>(i);
        double wv = weight_u(u);
        if (wv == 0) continue;
        r.nodes.push_back(u);
        r.weights.push_back(h * wv);
    }
    return r;
}

std::size_t ladder_size()
{
    std::size_t n = gauss_orders.size();
    for (std::size_t c = 512; c <= max_trapezoid; c *= 2) n += 2;
    return n;
}

std::size_t ladder_points(std::size_t level)
{
    if (level < gauss_orders.size()) return gauss_orders[level];
    std::size_t i = level - gauss_orders.size();
    std::size_t c = std::size_t{512} << (i / 2);
    return i % 2 == 0 ? c : c + c / 2;
}

const rule& ladder_rule(std::size_t level)
{
    static std::once_flag once;
    static std::vector<rule> gauss;
    static std::mutex mu;
    static std::map<std::size_t, rule> trap;
    std::call_once(once, [] { gauss = build_gauss_rules(); });
    if (level < gauss.size()) return gauss[level];
    std::lock_guard lock(mu);
    auto it = trap.find(level);
    if (it == trap.end()) it = trap.emplace(level, trapezoid_rule(ladder_points(level))).first;
    return it->second;
}

std::size_t start_level(double variation)
{
    double need = variation / 16 + 8;
    for (std::size_t l = 0; l < ladder_size(); ++l)
        if (static_cast<double>(ladder_points(l)) >= need) return l;
    return ladder_size() - 1;
}

cplx tensor_sum(const split_integrand& f, const std::vector<const rule*>& rules)
{
    std::size_t n = f.n, kt = f.terms.size();
    // pw[k][j][i] = t_{j,i}^{m_k j}
    std::vector<std::vector<std::vector<double>>> pw(kt, std::vector<std::vector<double>>(n));
    for (std::size_t k = 0; k < kt; ++k)
        for (std::size_t j = 0; j < n; ++j)
            for (double u : rules[j]->nodes) pw[k][j].push_back(std::exp(static_cast<double>(f.terms[k].m[j]) * u));

    std::vector<std::vector<double>> prod(n + 1, std::vector<double>(kt));
    std::vector<double> wprod(n + 1);
    for (std::size_t k = 0; k < kt; ++k) prod[0][k] = f.terms[k].a;
    wprod[0] = 1;
    cplx total = 0;
    std::vector<std::size_t> idx(n, 0);
    std::size_t depth = 0;
    // Odometer over the tensor grid with prefix products per depth.
    while (true) {
        if (depth == n) {
            total += wprod[n] * f.sum_patterns(prod[n]);
            --depth;
            ++idx[depth];
            continue;
        }
        if (idx[depth] == rules[depth]->nodes.size()) {
            idx[depth] = 0;
            if (depth == 0) break;
            --depth;
            ++idx[depth];
            continue;
        }
        std::size_t i = idx[depth];
        for (std::size_t k = 0; k < kt; ++k) prod[depth + 1][k] = prod[depth][k] * pw[k][depth][i];
        wprod[depth + 1] = wprod[depth] * rules[depth]->weights[i];
        ++depth;
    }
    return total;
}

quadrature_result piece_from_terms(std::size_t n, std::vector<phase_term> terms, const piece_options& opt)
{
    quadrature_result res;
    split_integrand f(n, std::move(terms));
    if (f.vanishes()) return res;
    double bound = piece_bound(n, f.terms);
    if (bound <= opt.skip_tolerance) {
        res.abs_error_estimate = bound;
        return res;
    }
    const double span = rule_hi - rule_lo;
    std::vector<std::size_t> level(n);
    for (std::size_t j = 0; j < n; ++j) {
        double freq = 0;
        for (const auto& t : f.terms) {
            long deg = std::accumulate(t.m.begin(), t.m.end(), 0L);
            freq += std::abs(t.a) * static_cast<double>(t.m[j]) * std::ldexp(1.0, static_cast<int>(deg));
        }
        level[j] = start_level(freq * span);
    }
    const std::size_t point_cap = std::size_t{1} << 26;
    auto eval = [&](const std::vector<std::size_t>& lv, std::size_t& points) {
        std::vector<const rule*> rules;
        points = 1;
        for (auto l : lv) {
            rules.push_back(&ladder_rule(l));
            points *= rules.back()->nodes.size();
        }
        return tensor_sum(f, rules);
    };
    std::size_t points = 0;
    cplx prev = eval(level, points);
    res.panels = points;
    while (true) {
        std::vector<std::size_t> next = level;
        bool grown = false;
        std::size_t next_points = 1;
        for (auto& l : next) {
            if (l + 1 < ladder_size()) {
                ++l;
                grown = true;
            }
            next_points *= ladder_points(l);
        }
        if (!grown || next_points > point_cap) {
            res.value = prev;
            res.converged = false;
            return res;
        }
        cplx cur = eval(next, points);
        res.panels += points;
        double diff = std::abs(cur - prev);
        if (diff <= opt.tolerance) {
            res.value = cur;
            res.abs_error_estimate = diff;
            return res;
        }
        prev = cur;
        level = next;
    }
}

std::vector<phase_term> tuple_terms(const vector_polynomial& p, const face_tuple& tuple, const std::vector<long>& j,
                                    const std::vector<double>& xi)
{
    if (xi.size() != p.d() || tuple.faces.size() != p.d()) throw dimension_error("tuple, xi and p disagree in d");
    if (j.size() != p.n) throw dimension_error("J has the wrong length");
    std::map<exponent, double> acc;
    for (std::size_t nu = 0; nu < p.d(); ++nu) {
        const face& f = tuple.faces[nu];
        if (f.is_empty) continue;
        for (const auto& m : lattice_points(f)) {
            auto it = p.rows[nu].find(m);
            if (it == p.rows[nu].end()) throw std::invalid_argument("face does not belong to the support of p");
            acc[m] += xi[nu] * it->second.get_d();
        }
    }
    std::vector<phase_term> out;
    for (const auto& [m, a] : acc) {
        long e = 0;
        for (std::size_t i = 0; i < p.n; ++i) e += j[i] * m[i];
        out.push_back({m, a * std::ldexp(1.0, static_cast<int>(-e))});
    }
    return out;
}

// -------------------------------------------------- nested adaptive GL32

using gl32 = boost::math::quadrature::gauss<double, 32>;

struct axis_plan {
    std::size_t coord = 0;
    // Initial breakpoints in u given the outer coordinates already fixed.
    std::function<std::vector<double>(const std::vector<double>&)> breaks;
    // Optional smooth weight in u; null means 1.
    std::function<double(double)> weight;
};

class nested_integrator {
public:
    nested_integrator(std::vector<axis_plan> plan, std::function<cplx(const std::vector<double>&)> leaf,
                      std::size_t n, double tol)
        : plan_(std::move(plan)), leaf_(std::move(leaf)), u_(n, 0.0), tol_(tol), cap_(max_cells())
    {
    }

    quadrature_result run()
    {
        auto e = axis(0);
        quadrature_result r;
        r.value = e.value;
        r.abs_error_estimate = e.err;
        r.panels = cells_;
        r.converged = !capped_;
        return r;
    }

private:
    struct estimate {
        cplx value;
        double err = 0;
    };

    std::vector<axis_plan> plan_;
    std::function<cplx(const std::vector<double>&)> leaf_;
    std::vector<double> u_;
    double tol_;
    std::size_t cap_;
    std::size_t cells_ = 0;
    bool capped_ = false;
    static constexpr double min_width = 1e-9;
    static constexpr int max_depth = 60;

    estimate axis(std::size_t level)
    {
        auto br = plan_[level].breaks(u_);
        estimate total;
        for (std::size_t i = 0; i + 1 < br.size(); ++i) {
            auto whole = panel(level, br[i], br[i + 1]);
            auto e = refine(level, br[i], br[i + 1], whole, 0);
            total.value += e.value;
            total.err += e.err;
        }
        return total;
    }

    estimate panel(std::size_t level, double lo, double hi)
    {
        ++cells_;
        const auto& plan = plan_[level];
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        estimate s;
        auto node = [&](double x, double wq) {
            u_[plan.coord] = x;
            double wv = plan.weight ? plan.weight(x) : 1.0;
            if (wv == 0) return;
            estimate in = level + 1 == plan_.size() ? estimate{leaf_(u_), 0.0} : axis(level + 1);
            s.value += wq * half * wv * in.value;
            s.err += wq * half * std::abs(wv) * in.err;
        };
        for (std::size_t i = 0; i < gl32::abscissa().size(); ++i) {
            node(mid - half * gl32::abscissa()[i], gl32::weights()[i]);
            node(mid + half * gl32::abscissa()[i], gl32::weights()[i]);
        }
        return s;
    }

    estimate refine(std::size_t level, double lo, double hi, const estimate& whole, int depth)
    {
        double mid = 0.5 * (lo + hi);
        auto left = panel(level, lo, mid);
        auto right = panel(level, mid, hi);
        double diff = std::abs(whole.value - left.value - right.value);
        bool stop = diff <= tol_ || depth >= max_depth || hi - lo < min_width || cells_ >= cap_;
        if (stop) {
            if (diff > tol_) capped_ = true;
            return {left.value + right.value, diff + left.err + right.err};
        }
        auto a = refine(level, lo, mid, left, depth + 1);
        auto b = refine(level, mid, hi, right, depth + 1);
        return {a.value + b.value, a.err + b.err};
    }
};

std::vector<double> dyadic_breaks(double lo, double hi)
{
    std::vector<double> br{lo};
    double k = std::floor(lo / ln2) + 1;
    while (k * ln2 < hi - 1e-12) {
        if (k * ln2 > br.back() + 1e-12) br.push_back(k * ln2);
        k += 1;
    }
    br.push_back(hi);
    return br;
}

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& f)
{
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < count;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace

// ------------------------------------------------------------------ cutoffs

double psi(double u)
{
    double a = std::abs(u);
    if (a <= 0.5) return 1.0;
    if (a >= 2.0) return 0.0;
    double p = g(2.0 - a), q = g(a - 0.5);
    return p / (p + q);
}

double eta(double u) { return psi(u) - psi(2.0 * u); }

double h_kernel(double u) { return u == 0 ? 0.0 : eta(u) / u; }

std::size_t max_cells()
{
    if (const char* env = std::getenv("NH_MAX_CELLS")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::size_t{1} << 22;
}

// -------------------------------------------------------------- integrals

quadrature_result pv_integral(const vector_polynomial& p, const std::vector<double>& xi, const std::vector<double>& a,
                              const std::vector<double>& b)
{
    if (a.size() != p.n || b.size() != p.n) throw dimension_error("box limits have the wrong length");
    for (std::size_t j = 0; j < p.n; ++j)
        if (!(a[j] > 0) || !(b[j] > a[j])) throw std::invalid_argument("box limits need 0 < a < b");
    split_integrand f(p.n, full_terms(p, xi));
    if (f.vanishes()) return {};
    std::vector<axis_plan> plan;
    for (std::size_t j = 0; j < p.n; ++j) {
        double lo = std::log(a[j]), hi = std::log(b[j]);
        plan.push_back({j, [lo, hi](const std::vector<double>&) { return dyadic_breaks(lo, hi); }, nullptr});
    }
    nested_integrator integ(std::move(plan), [&f](const std::vector<double>& u) { return f.at_log(u); }, p.n, 1e-9);
    return integ.run();
}

quadrature_result windowed_integral(const vector_polynomial& p, const std::vector<double>& xi,
                                    const std::vector<long>& lo, const std::vector<long>& hi)
{
    if (lo.size() != p.n || hi.size() != p.n) throw dimension_error("window has the wrong length");
    split_integrand f(p.n, full_terms(p, xi));
    if (f.vanishes()) return {};
    std::vector<axis_plan> plan;
    for (std::size_t j = 0; j < p.n; ++j) {
        if (hi[j] < lo[j]) throw std::invalid_argument("empty window");
        double ulo = -static_cast<double>(hi[j] + 2) * ln2, uhi = static_cast<double>(1 - lo[j]) * ln2;
        double s_lo = std::ldexp(1.0, static_cast<int>(lo[j])), s_hi = std::ldexp(1.0, static_cast<int>(hi[j] + 1));
        plan.push_back({j, [ulo, uhi](const std::vector<double>&) { return dyadic_breaks(ulo, uhi); },
                        [s_lo, s_hi](double u) {
                            double t = std::exp(u);
                            return psi(s_lo * t) - psi(s_hi * t);
                        }});
    }
    nested_integrator integ(std::move(plan), [&f](const std::vector<double>& u) { return f.at_log(u); }, p.n, 1e-10);
    return integ.run();
}

quadrature_result dyadic_piece(const vector_polynomial& p, const face_tuple& tuple, const std::vector<long>& j,
                               const std::vector<double>& xi, const piece_options& opt)
{
    return piece_from_terms(p.n, tuple_terms(p, tuple, j, xi), opt);
}

quadrature_result dyadic_piece_full(const vector_polynomial& p, const std::vector<long>& j,
                                    const std::vector<double>& xi, const piece_options& opt)
{
    if (j.size() != p.n) throw dimension_error("J has the wrong length");
    auto terms = full_terms(p, xi);
    for (auto& t : terms) {
        long e = 0;
        for (std::size_t i = 0; i < p.n; ++i) e += j[i] * t.m[i];
        t.a *= std::ldexp(1.0, static_cast<int>(-e));
    }
    return piece_from_terms(p.n, std::move(terms), opt);
}

linear_fit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit needs two or more points");
    double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    linear_fit f;
    if (sxx == 0) throw std::invalid_argument("fit needs distinct abscissae");
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = std::max(0.0, syy - f.slope * sxy);
    f.r2 = syy == 0 ? 1.0 : 1.0 - sse / syy;
    f.slope_stderr = x.size() > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
    return f;
}

// ------------------------------------------------------------------ probes

divergence_report divergence_probe(const vector_polynomial& p, const face_tuple& witness, const std::vector<double>& xi,
                                   const std::vector<probe_box>& boxes)
{
    const std::size_t n = p.n;
    if (boxes.size() < 2) throw std::invalid_argument("divergence probe needs two or more boxes");
    divergence_report rep;

    std::vector<long> zero(n, 0);
    auto terms = tuple_terms(p, witness, zero, xi);
    std::vector<rvector> rows;
    for (const auto& t : terms) rows.push_back(to_rvector(t.m));
    auto pivots = rows.empty() ? std::vector<std::size_t>{} : rref(rows);
    rep.x_block = pivots;
    for (std::size_t j = 0; j < n; ++j)
        if (!std::binary_search(pivots.begin(), pivots.end(), j)) rep.y_block.push_back(j);

    std::optional<rvector> u = witness.overlap_witness;
    if (!u) u = cones_interior_intersection(witness.faces);
    if (!u) throw std::invalid_argument("face tuple has no interior overlap");
    const domain_spec& spec = witness.faces.front().parent->spec();
    for (auto j : spec.s)
        if ((*u)[j] == 0) rep.s0.push_back(j);
    std::vector<bool> bounded_x(n, false);
    for (auto j : rep.s0) bounded_x[j] = true;

    split_integrand f(n, terms);
    std::vector<bool> in_x(n, false);
    for (auto j : rep.x_block) in_x[j] = true;

    // proxy(u, tx): sum |a_m| t_Y^m_Y tx^|m_X| over monomials that involve X.
    auto proxy = [&](const std::vector<double>& uu, double log_tx, bool only_unbounded) {
        double s = 0;
        for (const auto& t : f.terms) {
            double e = 0;
            bool involves = false;
            for (std::size_t j = 0; j < n; ++j) {
                if (t.m[j] == 0) continue;
                if (in_x[j]) {
                    involves = true;
                    if (!only_unbounded || !bounded_x[j]) e += static_cast<double>(t.m[j]) * log_tx;
                } else {
                    e += static_cast<double>(t.m[j]) * uu[j];
                }
            }
            if (involves) s += std::abs(t.a) * std::exp(e);
        }
        return s;
    };

    for (const auto& box : boxes) {
        if (box.a.size() != n || box.b.size() != n) throw dimension_error("box limits have the wrong length");
        divergence_sample smp;
        smp.scale = box.scale;
        smp.log_volume = 1;
        for (auto j : rep.y_block) {
            if (!(box.a[j] > 0) || !(box.b[j] > box.a[j])) throw std::invalid_argument("box limits need 0 < a < b");
            smp.log_volume *= std::log(box.b[j] / box.a[j]);
        }
        if (f.vanishes()) {
            rep.samples.push_back(smp);
            continue;
        }
        std::vector<axis_plan> plan;
        for (auto j : rep.y_block) {
            double lo = std::log(box.a[j]), hi = std::log(box.b[j]);
            plan.push_back({j, [lo, hi](const std::vector<double>&) { return dyadic_breaks(lo, hi); }, nullptr});
        }
        // Cutoff scale B and lower limit for the X block, fixed per outer point.
        auto big = std::make_shared<double>(1.0);
        auto low = std::make_shared<double>(0.0);
        double a_min = *std::min_element(box.a.begin(), box.a.end());
        bool first = true;
        for (auto j : rep.x_block) {
            axis_plan ap;
            ap.coord = j;
            bool bnd = bounded_x[j];
            bool is_first = first;
            first = false;
            ap.breaks = [&, big, low, bnd, is_first, a_min](const std::vector<double>& uu) {
                if (is_first) {
                    double lb = 0;
                    bool any = proxy(uu, 0.0, true) > 0 && std::any_of(rep.x_block.begin(), rep.x_block.end(),
                                                                        [&](std::size_t k) { return !bounded_x[k]; });
                    if (any)
                        while (proxy(uu, lb, true) < 512.0 && lb < 60 * ln2) lb += ln2;
                    *big = lb;
                    double l = std::log(a_min);
                    while (proxy(uu, l, false) > 1e-10 && l > -700) l -= ln2;
                    *low = l;
                }
                double hi = bnd ? 0.0 : *big + ln2;
                return dyadic_breaks(*low, hi);
            };
            if (!bnd)
                ap.weight = [big](double x) { return psi(std::exp(x - *big)); };
            plan.push_back(std::move(ap));
        }
        nested_integrator integ(std::move(plan), [&f](const std::vector<double>& uu) { return f.at_log(uu); }, n,
                                1e-9);
        smp.integral = integ.run();
        rep.samples.push_back(smp);
    }

    std::vector<double> xs, vs, ys;
    for (const auto& s : rep.samples) {
        xs.push_back(s.scale);
        vs.push_back(s.log_volume);
        ys.push_back(std::abs(s.integral.value));
    }
    rep.vs_scale = fit_line(xs, ys);
    bool distinct = std::any_of(vs.begin(), vs.end(), [&](double v) { return v != vs.front(); });
    if (distinct) rep.vs_volume = fit_line(vs, ys);
    rep.inconclusive = std::abs(rep.vs_scale.slope) <= 3 * rep.vs_scale.slope_stderr;
    return rep;
}

decay_report decay_check(const vector_polynomial& p, const face_tuple& tuple, const std::vector<long>& ray,
                         const std::vector<double>& xi, long k_max, const piece_options& opt)
{
    if (ray.size() != p.n) throw dimension_error("ray has the wrong length");
    std::vector<std::pair<exponent, double>> anchors;
    for (std::size_t nu = 0; nu < p.d(); ++nu) {
        if (tuple.faces[nu].is_empty || xi[nu] == 0) continue;
        auto pts = lattice_points(tuple.faces[nu]);
        if (!pts.empty()) anchors.emplace_back(pts.front(), std::abs(xi[nu]));
    }
    decay_report rep;
    for (long k = 0; k <= k_max; ++k) {
        std::vector<long> j(p.n);
        for (std::size_t i = 0; i < p.n; ++i) j[i] = k * ray[i];
        decay_row row;
        row.k = k;
        row.scale = std::numeric_limits<double>::infinity();
        for (const auto& [m, x] : anchors) {
            long e = 0;
            for (std::size_t i = 0; i < p.n; ++i) e += j[i] * m[i];
            row.scale = std::min(row.scale, x * std::ldexp(1.0, static_cast<int>(-e)));
        }
        auto r = dyadic_piece(p, tuple, j, xi, opt);
        row.value = std::abs(r.value);
        row.error = r.abs_error_estimate;
        rep.rows.push_back(row);
    }
    std::vector<double> lx, ly;
    for (const auto& r : rep.rows)
        if (r.scale > 1 && std::isfinite(r.scale) && r.value > 1e-14) {
            lx.push_back(std::log(r.scale));
            ly.push_back(std::log(r.value));
        }
    if (lx.size() >= 2 && std::any_of(lx.begin(), lx.end(), [&](double v) { return v != lx.front(); })) {
        rep.delta = -fit_line(lx, ly).slope;
        rep.fitted = true;
    }
    for (auto& r : rep.rows) {
        r.bound = std::isfinite(r.scale) && r.scale > 1 ? std::min(1.0, std::pow(r.scale, -rep.delta)) : 1.0;
        if (r.bound > 0) rep.constant = std::max(rep.constant, r.value / r.bound);
    }
    return rep;
}

sum_report multiplier_sum_probe(const vector_polynomial& p, const domain_spec& spec,
                                const std::vector<std::vector<double>>& xis, const std::vector<long>& radii,
                                unsigned threads, const piece_options& opt)
{
    if (spec.n != p.n) throw dimension_error("domain and polynomial disagree in n");
    if (radii.empty()) throw std::invalid_argument("no radii given");
    sum_report rep;
    rep.radii = radii;
    std::sort(rep.radii.begin(), rep.radii.end());
    long rmax = rep.radii.back();

    std::vector<std::vector<long>> js;
    std::vector<long> cur(p.n, 0);
    std::function<void(std::size_t, long)> gen = [&](std::size_t i, long left) {
        if (i == p.n) {
            js.push_back(cur);
            return;
        }
        long lo = spec.in_s(i) ? 0 : -left;
        for (long v = lo; v <= left; ++v) {
            cur[i] = v;
            gen(i + 1, left - std::abs(v));
        }
    };
    gen(0, rmax);

    std::vector<quadrature_result> res(js.size() * xis.size());
    parallel_for(res.size(), threads,
                 [&](std::size_t i) { res[i] = dyadic_piece_full(p, js[i % js.size()], xis[i / js.size()], opt); });
    rep.pieces = res.size();
    for (std::size_t x = 0; x < xis.size(); ++x) {
        sum_row row;
        row.xi = xis[x];
        row.partial_sums.assign(rep.radii.size(), 0.0);
        for (std::size_t k = 0; k < js.size(); ++k) {
            const auto& r = res[x * js.size() + k];
            if (r.panels == 0 && r.abs_error_estimate > 0) ++rep.skipped;
            long norm = 0;
            for (long v : js[k]) norm += std::abs(v);
            for (std::size_t q = 0; q < rep.radii.size(); ++q)
                if (norm <= rep.radii[q]) row.partial_sums[q] += std::abs(r.value);
            row.error += r.abs_error_estimate;
            row.converged = row.converged && r.converged;
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

}  // namespace nh
