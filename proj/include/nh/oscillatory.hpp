#pragma once

#include "nh/engine.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace nh {

/// Even smooth cutoff: 1 on |u| <= 1/2, 0 on |u| >= 2.
double psi(double u);
/// psi(u) - psi(2u), supported on 1/4 <= |u| <= 2.
double eta(double u);
/// eta(u)/u, odd; zero at the origin.
double h_kernel(double u);

struct quadrature_result {
    std::complex<double> value;
    double abs_error_estimate = 0;  // difference between successive refinements
    std::size_t panels = 0;
    bool converged = true;
};

/// Cell budget for adaptive quadrature: NH_MAX_CELLS if set, else 2^22.
std::size_t max_cells();

/// Principal value over prod{a_j < |t_j| < b_j} of exp(i xi.P(t)) prod dt_j/t_j.
quadrature_result pv_integral(const vector_polynomial& p, const std::vector<double>& xi, const std::vector<double>& a,
                              const std::vector<double>& b);

/// Same integrand with the sharp box replaced by the smooth window
/// prod_j (psi(2^{lo_j} t_j) - psi(2^{hi_j + 1} t_j)), which equals the sum of
/// dyadic pieces over lo <= J <= hi.
quadrature_result windowed_integral(const vector_polynomial& p, const std::vector<double>& xi,
                                    const std::vector<long>& lo, const std::vector<long>& hi);

struct piece_options {
    double tolerance = 1e-10;       // absolute agreement of successive rule levels
    double skip_tolerance = 1e-13;  // pieces with a smaller rigorous bound are returned as 0
};

/// Dyadic piece I_J restricted to the monomials of F_nu cap Lambda_nu. The
/// faces must come from polyhedra built on the supports of p.
quadrature_result dyadic_piece(const vector_polynomial& p, const face_tuple& tuple, const std::vector<long>& j,
                               const std::vector<double>& xi, const piece_options& opt = {});

/// Dyadic piece of the full polynomial.
quadrature_result dyadic_piece_full(const vector_polynomial& p, const std::vector<long>& j,
                                    const std::vector<double>& xi, const piece_options& opt = {});

struct linear_fit {
    double slope = 0;
    double intercept = 0;
    double slope_stderr = 0;
    double r2 = 0;
};

linear_fit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct divergence_sample {
    double scale = 0;       // caller-supplied abscissa, e.g. k for a = 2^-k
    double log_volume = 0;  // prod over Y of log(b_j/a_j)
    quadrature_result integral;
};

struct divergence_report {
    std::vector<std::size_t> x_block;
    std::vector<std::size_t> y_block;
    std::vector<std::size_t> s0;
    std::vector<divergence_sample> samples;
    linear_fit vs_volume;  // |I| against prod log(b_j/a_j)
    linear_fit vs_scale;   // |I| against the caller's scale
    bool inconclusive = false;
};

struct probe_box {
    double scale = 0;
    std::vector<double> a;
    std::vector<double> b;
};

/// Evaluates I(P_F, xi, a, b) with the X block (pivot columns of the union of
/// faces) taken to its limit: a_X -> 0 and b_X -> 1 on S0, infinity elsewhere.
/// Only the Y block keeps the supplied limits.
divergence_report divergence_probe(const vector_polynomial& p, const face_tuple& witness, const std::vector<double>& xi,
                                   const std::vector<probe_box>& boxes);

struct decay_row {
    long k = 0;
    double scale = 0;  // smallest |2^{-J.m_nu} xi_nu|
    double value = 0;  // |I_J|
    double bound = 0;  // min(1, scale^{-delta})
    double error = 0;
};

struct decay_report {
    std::vector<decay_row> rows;
    double delta = 0;
    double constant = 0;
    bool fitted = false;
};

/// Samples J = k * ray for k = 0..k_max and fits the decay exponent on the
/// samples with scale above 1.
decay_report decay_check(const vector_polynomial& p, const face_tuple& tuple, const std::vector<long>& ray,
                         const std::vector<double>& xi, long k_max, const piece_options& opt = {});

struct sum_row {
    std::vector<double> xi;
    std::vector<double> partial_sums;  // one per radius
    double error = 0;
    bool converged = true;
};

struct sum_report {
    std::vector<long> radii;
    std::vector<sum_row> rows;
    std::size_t pieces = 0;
    std::size_t skipped = 0;
};

/// Partial sums of |I_J(P, xi)| over J in Z(S) with |J|_1 <= R.
sum_report multiplier_sum_probe(const vector_polynomial& p, const domain_spec& spec,
                                const std::vector<std::vector<double>>& xis, const std::vector<long>& radii,
                                unsigned threads = 1, const piece_options& opt = {});

}  // namespace nh
