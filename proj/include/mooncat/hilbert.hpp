#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "mooncat/errors.hpp"

namespace mooncat {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;

inline constexpr cplx I_UNIT{0.0, 1.0};

inline void check_dim(int dim) {
    if (dim < 2) throw invalid_argument("Fock truncation must satisfy dim >= 2, got " + std::to_string(dim));
}

// Annihilation operator: <n-1|a|n> = sqrt(n).
inline cmat ladder(int dim) {
    check_dim(dim);
    cmat a = cmat::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline cmat number_op(int dim) {
    check_dim(dim);
    cmat n = cmat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

// Photon-number parity exp(i*pi*n): diagonal of alternating +/-1.
inline cmat parity_op(int dim) {
    check_dim(dim);
    cmat p = cmat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return p;
}

// Scaling-and-squaring Pade exponential (Eigen MatrixFunctions).
inline cmat expm(const cmat& m) { return m.exp(); }

// D(beta) = exp(beta a^dag - beta* a). Exactly unitary on the truncated
// space since the truncated generator stays anti-Hermitian.
inline cmat displacement(int dim, cplx beta) {
    check_dim(dim);
    if (std::norm(beta) > dim / 4.0)
        warn("displacement: |beta|^2 = " + std::to_string(std::norm(beta)) +
             " exceeds dim/4 = " + std::to_string(dim / 4.0) + "; truncation margin is thin");
    const cmat a = ladder(dim);
    return expm(beta * a.adjoint() - std::conj(beta) * a);
}

// S(r) = exp((r/2)(a^2 - a^dag^2)); squeezes the x = (a+a^dag)/2 quadrature
// variance to exp(-2r)/4 on vacuum for r > 0.
inline cmat squeeze_op(int dim, double r) {
    check_dim(dim);
    if (std::abs(r) > 2.0) throw invalid_argument("squeeze: |r| must be <= 2, got " + std::to_string(r));
    const double needed = 4.0 * std::ceil(std::exp(2.0 * std::abs(r)));
    if (dim < needed)
        warn("squeeze: dim = " + std::to_string(dim) + " below recommended " + std::to_string(needed));
    const cmat a = ladder(dim);
    return expm(0.5 * r * (a * a - (a * a).adjoint()));
}

inline cvec fock_state(int dim, int n) {
    check_dim(dim);
    if (n < 0 || n >= dim) throw invalid_argument("fock_state: level outside truncation");
    cvec v = cvec::Zero(dim);
    v(n) = 1.0;
    return v;
}

inline cvec vacuum_state(int dim) { return fock_state(dim, 0); }

inline cvec coherent_state(int dim, cplx alpha) {
    return displacement(dim, alpha) * vacuum_state(dim);
}

inline cmat thermal_state(int dim, double n_th) {
    check_dim(dim);
    if (n_th < 0.0) throw invalid_argument("thermal_state: n_th must be >= 0");
    cmat rho = cmat::Zero(dim, dim);
    if (n_th == 0.0) {
        rho(0, 0) = 1.0;
        return rho;
    }
    double z = 0.0;
    for (int n = 0; n < dim; ++n) {
        const double w = std::pow(n_th / (1.0 + n_th), n) / (1.0 + n_th);
        rho(n, n) = w;
        z += w;
    }
    rho /= z;
    return rho;
}

inline cmat projector(const cvec& psi) { return psi * psi.adjoint(); }

inline cplx expectation(const cmat& op, const cvec& psi) { return psi.dot(op * psi); }

inline cplx expectation(const cmat& op, const cmat& rho) { return (op * rho).trace(); }

inline double max_abs(const cmat& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const cmat& m, double tol = 1e-12) {
    return max_abs(m - m.adjoint()) < tol;
}

inline cmat hermitize(const cmat& m) { return 0.5 * (m + m.adjoint()); }

// Density-matrix sanity: unit trace, Hermitian, spectrum >= -eig_tol.
inline bool is_valid_density(const cmat& rho, double trace_tol = 1e-9, double eig_tol = 1e-9) {
    if (std::abs(rho.trace() - 1.0) > trace_tol) return false;
    if (!is_hermitian(rho, 1e-8)) return false;
    Eigen::SelfAdjointEigenSolver<cmat> es(hermitize(rho));
    return es.eigenvalues().minCoeff() > -eig_tol;
}

inline cmat kron(const cmat& a, const cmat& b) {
    cmat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace mooncat
