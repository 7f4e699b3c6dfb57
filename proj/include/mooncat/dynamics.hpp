#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "mooncat/hilbert.hpp"
#include "mooncat/rng.hpp"
#include "mooncat/states.hpp"

namespace mooncat {

// Reduced single-mode model: deformed two-photon dissipator plus the
// intrinsic memory noise channels and self-Kerr terms.
struct MoonModel {
    double alpha = 2.0;
    cplx lambda{0.0, 0.0};
    double kappa2 = 1.0;
    double kappa1 = 0.0;
    double n_th = 0.0;
    double kappa_phi = 0.0;
    double K4 = 0.0;
    double K6 = 0.0;
    int dim = 0;  // 0 = use default_dim()

    int default_dim() const {
        return 4 * static_cast<int>(std::ceil(alpha * alpha * (1.0 + std::abs(lambda)))) + 10;
    }
    int effective_dim() const { return dim > 0 ? dim : default_dim(); }

    void validate() const {
        if (alpha < 0.0 || kappa2 < 0.0 || kappa1 < 0.0 || n_th < 0.0 || kappa_phi < 0.0)
            throw invalid_argument("MoonModel: rates and alpha must be >= 0");
        if (effective_dim() < default_dim())
            throw truncation_error("MoonModel: dim " + std::to_string(effective_dim()) +
                                   " below required " + std::to_string(default_dim()));
    }
};

// Memory-buffer model before adiabatic elimination.
struct TwoModeModel {
    cplx g2{0.0, 0.0};
    cplx g_l{0.0, 0.0};
    cplx xi_d{0.0, 0.0};
    double kappa_b = 1.0;
    int dim_memory = 16;
    int dim_buffer = 5;
    double kappa1 = 0.0;
    double n_th = 0.0;

    double stabilized_alpha_sq() const {
        const cplx lam = lambda();
        return std::abs(-xi_d / (g2 * (1.0 + lam)));
    }
    cplx lambda() const { return g_l / g2; }
    double reduced_kappa2() const { return 4.0 * std::norm(g2) / kappa_b; }

    // Both published small-buffer conditions, as margin = kappa_b / (8 ...).
    double margin_sqrt_drive() const { return kappa_b / (8.0 * std::sqrt(std::abs(g2 * xi_d))); }
    double margin_linear() const {
        return kappa_b / (8.0 * std::abs(g2) * std::sqrt(stabilized_alpha_sq()));
    }
    // Gated on the stricter of the two margins.
    bool adiabatic() const { return std::min(margin_sqrt_drive(), margin_linear()) > 5.0; }

    void validate(int dim_cap = 400) const {
        if (dim_buffer < 3) throw invalid_argument("TwoModeModel: buffer dim must be >= 3");
        if (dim_memory < 2) throw invalid_argument("TwoModeModel: memory dim must be >= 2");
        if (kappa_b <= 0.0) throw invalid_argument("TwoModeModel: kappa_b must be > 0");
        if (dim_memory * dim_buffer > dim_cap)
            throw model_error("TwoModeModel: composite dim " + std::to_string(dim_memory * dim_buffer) +
                              " exceeds cap " + std::to_string(dim_cap));
    }
};

// L2(alpha, lambda) = sqrt(kappa2) (a^2 - alpha^2 + lambda (a^dag a - alpha^2))
inline cmat moon_dissipator(int dim, double alpha, cplx lambda, double kappa2 = 1.0) {
    const cmat a = ladder(dim);
    const double a2 = alpha * alpha;
    return std::sqrt(kappa2) *
           (a * a - a2 * cmat::Identity(dim, dim) + lambda * (a.adjoint() * a - a2 * cmat::Identity(dim, dim)));
}

// L2(r) = (sqrt(kappa2)/cosh^2 r) S(r) (a^2 - alpha'^2) S(r)^dag
inline cmat squeezed_dissipator(int dim, double alpha_prime, double r, double kappa2 = 1.0) {
    const cmat a = ladder(dim);
    const cmat s = squeeze_op(dim, r);
    const cmat core = a * a - (alpha_prime * alpha_prime) * cmat::Identity(dim, dim);
    const double ch = std::cosh(r);
    return (std::sqrt(kappa2) / (ch * ch)) * (s * core * s.adjoint());
}

// Generator of the master equation plus provenance. The dense superoperator
// is assembled on demand; dynamics and spectral analysis work from the
// operator list (full matrices get prohibitively large for two-mode models).
struct Liouvillian {
    int dim = 0;
    cmat hamiltonian;          // may be zero-sized when absent
    std::vector<cmat> jumps;
    std::uint64_t model_hash = 0;
    int parity_stride = 1;     // basis index n carries parity (n/stride) % 2

    bool has_hamiltonian() const { return hamiltonian.size() > 0; }
    int basis_parity(int n) const { return (n / parity_stride) % 2; }
};

namespace detail {
inline std::uint64_t hash_params(const std::string& tag, std::initializer_list<double> values) {
    std::ostringstream os;
    os << tag;
    os.precision(17);
    for (double v : values) os << ':' << v;
    return fnv1a64(os.str());
}
}  // namespace detail

inline Liouvillian build_moon_liouvillian(const MoonModel& m) {
    m.validate();
    const int dim = m.effective_dim();
    const cmat a = ladder(dim);
    const cmat ad = a.adjoint();

    Liouvillian L;
    L.dim = dim;
    L.parity_stride = 1;
    if (m.K4 != 0.0 || m.K6 != 0.0) {
        cmat h = -(m.K4 / 2.0) * (ad * ad * a * a);
        if (m.K6 != 0.0) h -= (m.K6 / 6.0) * (ad * ad * ad * a * a * a);
        L.hamiltonian = h;
    }
    L.jumps.push_back(moon_dissipator(dim, m.alpha, m.lambda, m.kappa2));
    if (m.kappa1 > 0.0) {
        L.jumps.push_back(std::sqrt(m.kappa1 * (1.0 + m.n_th)) * a);
        if (m.n_th > 0.0) L.jumps.push_back(std::sqrt(m.kappa1 * m.n_th) * ad);
    }
    if (m.kappa_phi > 0.0) L.jumps.push_back(std::sqrt(2.0 * m.kappa_phi) * (ad * a));
    L.model_hash = detail::hash_params(
        "moon", {m.alpha, m.lambda.real(), m.lambda.imag(), m.kappa2, m.kappa1, m.n_th,
                 m.kappa_phi, m.K4, m.K6, static_cast<double>(dim)});
    return L;
}

// Same channel structure with the squeezed-cat dissipator substituted.
inline Liouvillian build_squeezed_liouvillian(const MoonModel& m, double alpha_prime, double r) {
    MoonModel base = m;
    base.lambda = 2.0 * std::tanh(r);  // dim sizing on the equivalent deformation
    base.validate();
    const int dim = base.effective_dim();
    MoonModel noise = m;
    noise.dim = dim;
    noise.kappa2 = 0.0;
    noise.alpha = 0.0;
    noise.lambda = 0.0;
    Liouvillian L = build_moon_liouvillian(noise);
    L.jumps.insert(L.jumps.begin(), squeezed_dissipator(dim, alpha_prime, r, m.kappa2));
    L.model_hash = detail::hash_params(
        "squeezed", {alpha_prime, r, m.kappa2, m.kappa1, m.n_th, m.kappa_phi, m.K4, m.K6,
                     static_cast<double>(dim)});
    return L;
}

inline Liouvillian build_two_mode_liouvillian(const TwoModeModel& m, int dim_cap = 400) {
    m.validate(dim_cap);
    const int da = m.dim_memory;
    const int db = m.dim_buffer;
    const cmat a = kron(ladder(da), cmat::Identity(db, db));
    const cmat b = kron(cmat::Identity(da, da), ladder(db));
    const cmat bd = b.adjoint();

    Liouvillian L;
    L.dim = da * db;
    L.parity_stride = db;
    const cmat half = m.g2 * (a * a) * bd + m.g_l * (a.adjoint() * a) * bd + m.xi_d * bd;
    L.hamiltonian = half + half.adjoint();
    L.jumps.push_back(std::sqrt(m.kappa_b) * b);
    if (m.kappa1 > 0.0) {
        L.jumps.push_back(std::sqrt(m.kappa1 * (1.0 + m.n_th)) * a);
        if (m.n_th > 0.0) L.jumps.push_back(std::sqrt(m.kappa1 * m.n_th) * a.adjoint());
    }
    L.model_hash = detail::hash_params(
        "two_mode", {m.g2.real(), m.g2.imag(), m.g_l.real(), m.g_l.imag(), m.xi_d.real(),
                     m.xi_d.imag(), m.kappa_b, m.kappa1, m.n_th, static_cast<double>(da),
                     static_cast<double>(db)});
    return L;
}

inline cmat lindblad_rhs(const Liouvillian& L, const cmat& rho) {
    cmat out = cmat::Zero(L.dim, L.dim);
    if (L.has_hamiltonian()) out = -I_UNIT * (L.hamiltonian * rho - rho * L.hamiltonian);
    for (const cmat& j : L.jumps) {
        const cmat jr = j * rho;
        const cmat jdj = j.adjoint() * j;
        out += jr * j.adjoint() - 0.5 * (jdj * rho + rho * jdj);
    }
    return out;
}

// Column-major vectorization: vec(rho)[col*dim + row].
inline cvec vectorize(const cmat& rho) {
    return Eigen::Map<const cvec>(rho.data(), rho.size());
}

inline cmat unvectorize(const cvec& v, int dim) {
    return Eigen::Map<const cmat>(v.data(), dim, dim);
}

// Dense dim^2 x dim^2 superoperator; guarded because memory grows as dim^4.
inline cmat superoperator_matrix(const Liouvillian& L, int max_dim = 48) {
    if (L.dim > max_dim)
        throw model_error("superoperator_matrix: dim " + std::to_string(L.dim) + " exceeds cap " +
                          std::to_string(max_dim));
    const int d = L.dim;
    const cmat id = cmat::Identity(d, d);
    cmat sop = cmat::Zero(d * d, d * d);
    if (L.has_hamiltonian())
        sop += -I_UNIT * (kron(id, L.hamiltonian) - kron(L.hamiltonian.transpose(), id));
    for (const cmat& j : L.jumps) {
        const cmat jdj = j.adjoint() * j;
        sop += kron(j.conjugate(), j) - 0.5 * (kron(id, jdj) + kron(jdj.transpose(), id));
    }
    return sop;
}

// Largest column sum of the vectorized-identity functional; zero for a
// trace-preserving generator.
inline double trace_preservation_defect(const cmat& sop, int dim) {
    double worst = 0.0;
    for (int col = 0; col < sop.cols(); ++col) {
        cplx s = 0.0;
        for (int n = 0; n < dim; ++n) s += sop(n * dim + n, col);
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

// Superoperator-parity sectors under a -> -a. The generator commutes with
// rho -> P rho P whenever every channel has definite photon parity, so the
// Liouvillian block-diagonalizes over cells (m, n) keyed by the parity of
// m + n. The even block contains the stationary state and the parity
// observable's relaxation (the phase-flip carrier); the odd block holds the
// inter-well coherences whose slow eigenvalue is the bit-flip rate.
enum class RateSector { bit_flip, phase_flip };

inline std::vector<int> sector_cells(const Liouvillian& L, RateSector sector) {
    const int want = (sector == RateSector::phase_flip) ? 0 : 1;
    std::vector<int> cells;
    cells.reserve(static_cast<size_t>(L.dim) * L.dim / 2 + 1);
    for (int col = 0; col < L.dim; ++col)
        for (int row = 0; row < L.dim; ++row)
            if (((L.basis_parity(row) + L.basis_parity(col)) & 1) == want)
                cells.push_back(col * L.dim + row);
    return cells;
}

// Assembles the requested parity block of the superoperator directly from
// the operator list, without materializing the full dim^2 matrix.
inline cmat sector_block(const Liouvillian& L, RateSector sector) {
    const int d = L.dim;
    const std::vector<int> cells = sector_cells(L, sector);
    const int s = static_cast<int>(cells.size());
    std::vector<cmat> jdjs;
    jdjs.reserve(L.jumps.size());
    for (const cmat& j : L.jumps) jdjs.push_back(j.adjoint() * j);

    cmat block = cmat::Zero(s, s);
    for (int kc = 0; kc < s; ++kc) {
        const int p = cells[static_cast<size_t>(kc)] % d;  // row index of source cell
        const int q = cells[static_cast<size_t>(kc)] / d;  // col index of source cell
        for (int kr = 0; kr < s; ++kr) {
            const int m = cells[static_cast<size_t>(kr)] % d;
            const int n = cells[static_cast<size_t>(kr)] / d;
            cplx val = 0.0;
            if (L.has_hamiltonian()) {
                if (n == q) val += -I_UNIT * L.hamiltonian(m, p);
                if (m == p) val += I_UNIT * L.hamiltonian(q, n);
            }
            for (size_t t = 0; t < L.jumps.size(); ++t) {
                val += L.jumps[t](m, p) * std::conj(L.jumps[t](n, q));
                if (n == q) val -= 0.5 * jdjs[t](m, p);
                if (m == p) val -= 0.5 * jdjs[t](q, n);
            }
            block(kr, kc) = val;
        }
    }
    return block;
}

// -Re of the slowest surviving eigenvalue in the requested sector.
// n_stationary (-1 = by sector default) eigenvalues nearest zero are
// treated as stationary and skipped: one in the even sector for a generator
// with a unique steady state, none in the odd sector. Degenerate kernels
// (pure two-photon dissipation) need the count raised by the caller.
inline double spectral_gap_rate(const Liouvillian& L, RateSector sector, int n_stationary = -1) {
    if (n_stationary < 0) n_stationary = (sector == RateSector::phase_flip) ? 1 : 0;
    const cmat block = sector_block(L, sector);
    Eigen::ComplexEigenSolver<cmat> es(block, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw model_error("spectral_gap_rate: eigensolver failed to converge");
    std::vector<double> re(static_cast<size_t>(block.rows()));
    for (int i = 0; i < block.rows(); ++i) re[static_cast<size_t>(i)] = es.eigenvalues()(i).real();
    std::sort(re.begin(), re.end(), std::greater<double>());
    if (n_stationary >= static_cast<int>(re.size()))
        throw model_error("spectral_gap_rate: sector smaller than stationary count");
    const double scale = block.norm();
    for (int i = 0; i < n_stationary; ++i)
        if (std::abs(re[static_cast<size_t>(i)]) > 1e-9 * scale)
            warn("spectral_gap_rate: skipped eigenvalue " + std::to_string(re[static_cast<size_t>(i)]) +
                 " is not numerically stationary");
    return -re[static_cast<size_t>(n_stationary)];
}

struct SteadyStateResult {
    cmat rho;                       // hermitized, unit trace (primary kernel vector)
    bool degenerate = false;
    int kernel_dim = 0;
    std::vector<cmat> kernel_basis; // raw kernel vectors, both sectors
    double residual = 0.0;          // ||L rho_ss||_F
};

// Null space of the generator via per-sector eigendecomposition. A unique
// trace-class kernel vector is returned normalized; a degenerate kernel
// (the stabilized qubit manifold) is flagged with its basis.
inline SteadyStateResult steady_state(const Liouvillian& L, double zero_tol = 1e-10) {
    SteadyStateResult result;
    cmat traceful;
    for (RateSector sector : {RateSector::phase_flip, RateSector::bit_flip}) {
        const cmat block = sector_block(L, sector);
        Eigen::ComplexEigenSolver<cmat> es(block, /*computeEigenvectors=*/true);
        if (es.info() != Eigen::Success) throw model_error("steady_state: eigensolver failed");
        const double scale = std::max(1.0, block.norm());
        const std::vector<int> cells = sector_cells(L, sector);
        for (int i = 0; i < block.rows(); ++i) {
            if (std::abs(es.eigenvalues()(i)) > zero_tol * scale) continue;
            cmat rho = cmat::Zero(L.dim, L.dim);
            for (int k = 0; k < block.rows(); ++k) {
                const int cell = cells[static_cast<size_t>(k)];
                rho(cell % L.dim, cell / L.dim) = es.eigenvectors()(k, i);
            }
            result.kernel_basis.push_back(rho);
            if (sector == RateSector::phase_flip && std::abs(rho.trace()) > 1e-6 &&
                traceful.size() == 0)
                traceful = rho;
        }
    }
    result.kernel_dim = static_cast<int>(result.kernel_basis.size());
    if (result.kernel_dim == 0) throw model_error("steady_state: no kernel vector found");
    result.degenerate = result.kernel_dim > 1;
    if (traceful.size() == 0) traceful = result.kernel_basis.front();
    cmat rho = hermitize(traceful);
    rho /= rho.trace();
    result.rho = rho;
    result.residual = lindblad_rhs(L, rho).norm();
    return result;
}

struct TimeSeries {
    rvec times;
    Eigen::MatrixXcd values;     // rows: time points, cols: observables
    double max_trace_drift = 0.0;
    double max_hermiticity_defect = 0.0;
};

struct EvolveOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double initial_step = 0.0;   // 0 = auto
    double min_step_factor = 1e-12;
    long max_steps = 50'000'000;
};

// Adaptive Dormand-Prince 5(4) on the density matrix, sampling Tr(O rho)
// at the requested grid points.
inline TimeSeries evolve(const Liouvillian& L, const cmat& rho0, const rvec& t_grid,
                         const std::vector<cmat>& observables, const EvolveOptions& opt = {}) {
    if (t_grid.size() < 1) throw invalid_argument("evolve: empty time grid");
    for (int i = 1; i < t_grid.size(); ++i)
        if (t_grid(i) <= t_grid(i - 1)) throw invalid_argument("evolve: time grid must increase");
    if (rho0.rows() != L.dim || rho0.cols() != L.dim)
        throw invalid_argument("evolve: state dimension mismatch");

    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    TimeSeries out;
    out.times = t_grid;
    out.values.resize(t_grid.size(), static_cast<Eigen::Index>(observables.size()));

    auto record = [&](int idx, const cmat& rho) {
        for (size_t o = 0; o < observables.size(); ++o)
            out.values(idx, static_cast<Eigen::Index>(o)) = (observables[o] * rho).trace();
        out.max_trace_drift = std::max(out.max_trace_drift, std::abs(rho.trace() - 1.0));
        out.max_hermiticity_defect = std::max(out.max_hermiticity_defect, max_abs(rho - rho.adjoint()));
    };

    cmat rho = rho0;
    double t = t_grid(0);
    record(0, rho);
    if (t_grid.size() == 1) return out;

    auto err_norm = [&](const cmat& err, const cmat& y0, const cmat& y1) {
        double acc = 0.0;
        const int n = static_cast<int>(err.size());
        const cplx* pe = err.data();
        const cplx* p0 = y0.data();
        const cplx* p1 = y1.data();
        for (int i = 0; i < n; ++i) {
            const double sc = opt.atol + opt.rtol * std::max(std::abs(p0[i]), std::abs(p1[i]));
            const double r = std::abs(pe[i]) / sc;
            acc += r * r;
        }
        return std::sqrt(acc / n);
    };

    const double span = t_grid(t_grid.size() - 1) - t_grid(0);
    double h_ctrl = opt.initial_step > 0.0 ? opt.initial_step : span * 1e-6;
    const double h_min = span * opt.min_step_factor;
    cmat k1 = lindblad_rhs(L, rho);
    long steps = 0;

    for (int target = 1; target < t_grid.size(); ++target) {
        const double t_end = t_grid(target);
        while (t < t_end) {
            if (++steps > opt.max_steps) throw stiffness_error("evolve: step budget exhausted");
            const double h = std::min(h_ctrl, t_end - t);
            const bool clipped = h < h_ctrl;
            const cmat k2 = lindblad_rhs(L, rho + h * (a21 * k1));
            const cmat k3 = lindblad_rhs(L, rho + h * (a31 * k1 + a32 * k2));
            const cmat k4 = lindblad_rhs(L, rho + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const cmat k5 = lindblad_rhs(L, rho + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const cmat k6 = lindblad_rhs(L, rho + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const cmat y5 = rho + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const cmat k7 = lindblad_rhs(L, y5);
            const cmat err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double en = err_norm(err, rho, y5);
            double factor = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
            factor = std::clamp(factor, 0.2, 5.0);
            if (en <= 1.0) {
                t += h;
                rho = y5;
                k1 = k7;  // first-same-as-last
                if (!clipped) h_ctrl = h * factor;
                else h_ctrl = std::max(h_ctrl, h * factor);
            } else {
                h_ctrl = h * std::min(factor, 0.9);
            }
            if (h_ctrl < h_min)
                throw stiffness_error(
                    "evolve: step size collapsed; rate hierarchy too stiff for explicit integration "
                    "(consider smaller kappa ratios or the spectral method)");
        }
        record(target, rho);
    }
    return out;
}

}  // namespace mooncat
