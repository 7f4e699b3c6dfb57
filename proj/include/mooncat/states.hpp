#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mooncat/hilbert.hpp"

namespace mooncat {

// Even/odd kernel states of the deformed two-photon dissipator.
struct MoonCatPair {
    double alpha = 0.0;
    cplx lambda{0.0, 0.0};
    int dim = 0;
    cvec even_state;  // support on even Fock levels only
    cvec odd_state;   // support on odd Fock levels only
    double norm_even = 0.0;  // N+ (1/norm of the raw coefficient vector)
    double norm_odd = 0.0;   // N-
};

struct SqueezedCatPair {
    double alpha_prime = 0.0;
    double r = 0.0;
    int dim = 0;
    cvec even_state;
    cvec odd_state;
};

namespace detail {

// mu_0 = mu_1 = 1, mu_{n+2} = (alpha^2 + lambda (alpha^2 - n)) / sqrt((n+2)(n+1)) mu_n
inline std::vector<cplx> moon_coefficients(double alpha, cplx lambda, int dim) {
    std::vector<cplx> mu(static_cast<size_t>(dim));
    mu[0] = 1.0;
    if (dim > 1) mu[1] = 1.0;
    const double a2 = alpha * alpha;
    for (int n = 0; n + 2 < dim; ++n)
        mu[n + 2] = (a2 + lambda * (a2 - static_cast<double>(n))) /
                    std::sqrt(static_cast<double>(n + 2) * (n + 1)) * mu[n];
    return mu;
}

inline bool tail_converged(const std::vector<cplx>& mu, double tol) {
    double peak = 0.0;
    for (const auto& c : mu) peak = std::max(peak, std::abs(c));
    const size_t n = mu.size();
    return std::abs(mu[n - 1]) <= tol * peak && std::abs(mu[n - 2]) <= tol * peak;
}

// Relative L2 mass in the last four coefficients, per parity the last two.
inline double tail_mass(const std::vector<cplx>& mu) {
    double total = 0.0, tail = 0.0;
    const size_t n = mu.size();
    for (size_t k = 0; k < n; ++k) total += std::norm(mu[k]);
    for (size_t k = n - std::min<size_t>(4, n); k < n; ++k) tail += std::norm(mu[k]);
    return tail / total;
}

}  // namespace detail

// || (a^2 - alpha^2 + lambda (a^dag a - alpha^2)) psi || for a unit Fock
// vector, applied through the operator's bands; usable at truncations far
// beyond what a dense matrix would allow.
inline double kernel_residual(const cvec& psi, double alpha, cplx lambda) {
    const int n = static_cast<int>(psi.size());
    const cplx c = alpha * alpha * (1.0 + lambda);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        cplx v = (lambda * static_cast<double>(k) - c) * psi(k);
        if (k + 2 < n) v += std::sqrt(static_cast<double>(k + 1) * (k + 2)) * psi(k + 2);
        acc += std::norm(v);
    }
    return std::sqrt(acc) / psi.norm();
}

// Builds the parity-definite kernel states from the Fock recurrence.
// dim = 0 grows the truncation until trailing coefficients fall below tol
// relative to the peak. For |lambda| near 1 the tails decay only
// polynomially; growth then stops at the cap as long as the relative tail
// mass is negligible (< 1e-8), since the state is fully converged for
// normalization, overlaps, and photon-number purposes. A diverging series
// (|lambda| > 1 away from a terminating alpha) raises truncation_error, as
// does an explicit dim whose tail mass is material.
inline MoonCatPair moon_cat_states(double alpha, cplx lambda, int dim = 0, double tol = 1e-10) {
    if (alpha < 0.0) throw invalid_argument("moon_cat_states: alpha must be >= 0");
    const bool auto_grow = dim <= 0;
    int d = auto_grow ? std::max(24, static_cast<int>(8.0 * alpha * alpha * (1.0 + std::abs(lambda))) + 16)
                      : dim;
    std::vector<cplx> mu = detail::moon_coefficients(alpha, lambda, d);
    if (auto_grow) {
        const int cap = 4096;
        while (!detail::tail_converged(mu, tol) && d < cap) {
            d = std::min(cap, d + d / 2 + 8);
            mu = detail::moon_coefficients(alpha, lambda, d);
        }
        if (!detail::tail_converged(mu, tol) && detail::tail_mass(mu) > 1e-8)
            throw truncation_error(
                "moon_cat_states: Fock series not normalizable at dim cap (diverging recurrence, "
                "|lambda| likely > 1)");
    } else if (detail::tail_mass(mu) > 1e-8) {
        throw truncation_error("moon_cat_states: truncation too small at requested dim " +
                               std::to_string(dim));
    }

    MoonCatPair pair;
    pair.alpha = alpha;
    pair.lambda = lambda;
    pair.dim = d;
    pair.even_state = cvec::Zero(d);
    pair.odd_state = cvec::Zero(d);
    for (int n = 0; n < d; ++n)
        (n % 2 == 0 ? pair.even_state(n) : pair.odd_state(n)) = mu[static_cast<size_t>(n)];
    const double ne = pair.even_state.norm();
    const double no = pair.odd_state.norm();
    pair.even_state /= ne;
    pair.odd_state /= no;
    pair.norm_even = 1.0 / ne;
    pair.norm_odd = 1.0 / no;
    return pair;
}

// Standard cat pair squeezed by S(r); annihilated by the squeezed-cat
// dissipator S(r)(a^2 - alpha'^2)S(r)^dag by construction.
inline SqueezedCatPair squeezed_cat_states(double alpha_prime, double r, int dim = 0, double tol = 1e-12) {
    const bool auto_grow = dim <= 0;
    int d = auto_grow
                ? std::max({24, static_cast<int>(6.0 * alpha_prime * alpha_prime) + 16,
                            static_cast<int>(4.0 * std::ceil(std::exp(2.0 * std::abs(r)))) + 8})
                : dim;
    for (;;) {
        MoonCatPair cat = moon_cat_states(alpha_prime, 0.0, d, tol);
        const cmat s = squeeze_op(d, r);
        SqueezedCatPair out;
        out.alpha_prime = alpha_prime;
        out.r = r;
        out.dim = d;
        out.even_state = s * cat.even_state;
        out.odd_state = s * cat.odd_state;
        const double tail = std::max({std::abs(out.even_state(d - 1)), std::abs(out.even_state(d - 2)),
                                      std::abs(out.odd_state(d - 1)), std::abs(out.odd_state(d - 2))});
        if (tail <= 100.0 * tol) return out;
        if (!auto_grow)
            throw truncation_error("squeezed_cat_states: truncation too small at requested dim " +
                                   std::to_string(dim));
        if (d >= 1024) throw truncation_error("squeezed_cat_states: dim cap reached");
        d = std::min(1024, d + d / 2 + 8);
    }
}

struct KernelCheck {
    int dim = 0;
    double even_residual = 0.0;
    double odd_residual = 0.0;
    bool converged = false;  // both residuals at or below the target
};

// Residual-targeted kernel verification. Vectors only, so the truncation
// can run far beyond dense-matrix sizes; near |lambda| = 1 the residual
// decays as a small power of the truncation and may exhaust the cap, which
// is reported rather than thrown.
inline KernelCheck moon_kernel_check(double alpha, cplx lambda, double target = 1e-8,
                                     int cap = 300000) {
    int d = std::max(32, static_cast<int>(8.0 * alpha * alpha * (1.0 + std::abs(lambda))) + 16);
    KernelCheck out;
    for (;;) {
        const std::vector<cplx> mu = detail::moon_coefficients(alpha, lambda, d);
        cvec even = cvec::Zero(d), odd = cvec::Zero(d);
        for (int n = 0; n < d; ++n)
            (n % 2 == 0 ? even(n) : odd(n)) = mu[static_cast<size_t>(n)];
        out.dim = d;
        out.even_residual = kernel_residual(even, alpha, lambda);
        out.odd_residual = kernel_residual(odd, alpha, lambda);
        out.converged = out.even_residual <= target && out.odd_residual <= target;
        if (out.converged || d >= cap) return out;
        d = std::min(cap, 2 * d);
    }
}

inline double fidelity(const cvec& a, const cvec& b) { return std::norm(a.dot(b)); }

inline double mean_photon(const cvec& psi) {
    double s = 0.0;
    for (int n = 0; n < psi.size(); ++n) s += n * std::norm(psi(n));
    return s;
}

inline double mean_photon(const cmat& rho) {
    double s = 0.0;
    for (int n = 0; n < rho.rows(); ++n) s += n * std::real(rho(n, n));
    return s;
}

// Photon number averaged over the even/odd kernel states; the convention
// used whenever a "cat size" nbar is quoted for a (alpha, lambda) pair.
inline double pair_mean_photon(const MoonCatPair& pair) {
    return 0.5 * (mean_photon(pair.even_state) + mean_photon(pair.odd_state));
}

inline double pair_mean_photon(const SqueezedCatPair& pair) {
    return 0.5 * (mean_photon(pair.even_state) + mean_photon(pair.odd_state));
}

// Inverts nbar(alpha) at fixed lambda by bisection (monotone in alpha).
inline double alpha_for_mean_photon(double nbar, cplx lambda, double tol = 1e-10) {
    if (nbar <= 0.0) throw invalid_argument("alpha_for_mean_photon: nbar must be > 0");
    double lo = 1e-3, hi = std::sqrt(nbar) + 2.0;
    while (pair_mean_photon(moon_cat_states(hi, lambda)) < nbar) hi *= 1.5;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        (pair_mean_photon(moon_cat_states(mid, lambda)) < nbar ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double alpha_prime_for_mean_photon(double nbar, double r, double tol = 1e-10) {
    if (nbar <= 0.0) throw invalid_argument("alpha_prime_for_mean_photon: nbar must be > 0");
    double lo = 1e-3, hi = std::sqrt(nbar) * std::exp(std::abs(r)) + 2.0;
    while (pair_mean_photon(squeezed_cat_states(hi, r)) < nbar) hi *= 1.5;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        (pair_mean_photon(squeezed_cat_states(mid, r)) < nbar ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct WignerGrid {
    rvec re_axis;
    rvec im_axis;
    rmat values;  // values(i, j) = W(re_axis(i) + i im_axis(j))
};

inline rvec linspace(double lo, double hi, int n) {
    rvec v(n);
    if (n == 1) {
        v(0) = lo;
        return v;
    }
    for (int i = 0; i < n; ++i) v(i) = lo + (hi - lo) * i / (n - 1);
    return v;
}

// W(beta) = (2/pi) Tr[D(-beta) rho D(beta) P], evaluated as the displaced
// parity trace. The axis displacements are cached so each grid point costs
// two dense products instead of a fresh matrix exponential; the phase from
// composing D(x)D(iy) cancels inside the conjugation.
inline WignerGrid wigner(const cmat& rho, const rvec& re_axis, const rvec& im_axis) {
    const int dim = static_cast<int>(rho.rows());
    WignerGrid grid;
    grid.re_axis = re_axis;
    grid.im_axis = im_axis;
    grid.values.resize(re_axis.size(), im_axis.size());

    std::vector<cmat> dx(static_cast<size_t>(re_axis.size()));
    std::vector<cmat> dy(static_cast<size_t>(im_axis.size()));
    for (int i = 0; i < re_axis.size(); ++i) dx[static_cast<size_t>(i)] = displacement(dim, re_axis(i));
    for (int j = 0; j < im_axis.size(); ++j)
        dy[static_cast<size_t>(j)] = displacement(dim, cplx(0.0, im_axis(j)));

    const cmat p = parity_op(dim);
    for (int i = 0; i < re_axis.size(); ++i) {
        for (int j = 0; j < im_axis.size(); ++j) {
            const cmat d = dx[static_cast<size_t>(i)] * dy[static_cast<size_t>(j)];
            const cmat conj = d.adjoint() * rho * d;
            cplx tr = 0.0;
            for (int n = 0; n < dim; ++n) tr += conj(n, n) * p(n, n);
            grid.values(i, j) = (2.0 / M_PI) * std::real(tr);
        }
    }
    return grid;
}

inline WignerGrid wigner(const cvec& psi, const rvec& re_axis, const rvec& im_axis) {
    return wigner(projector(psi), re_axis, im_axis);
}

inline double wigner_cell_area(const WignerGrid& g) {
    const double dx = g.re_axis.size() > 1 ? g.re_axis(1) - g.re_axis(0) : 1.0;
    const double dy = g.im_axis.size() > 1 ? g.im_axis(1) - g.im_axis(0) : 1.0;
    return dx * dy;
}

inline double wigner_norm(const WignerGrid& g) { return g.values.sum() * wigner_cell_area(g); }

// nbar = integral of W(beta) |beta|^2 d^2 beta - 1/2, on the discretized grid.
inline double mean_photon_from_wigner(const WignerGrid& g) {
    const double defect = std::abs(wigner_norm(g) - 1.0);
    if (defect > 5e-2)
        warn("mean_photon_from_wigner: normalization defect " + std::to_string(defect) +
             "; grid likely under-resolved or too small");
    double s = 0.0;
    for (int i = 0; i < g.re_axis.size(); ++i)
        for (int j = 0; j < g.im_axis.size(); ++j)
            s += g.values(i, j) * (g.re_axis(i) * g.re_axis(i) + g.im_axis(j) * g.im_axis(j));
    return s * wigner_cell_area(g) - 0.5;
}

}  // namespace mooncat
