#pragma once

#include <cmath>
#include <numbers>
#include <sstream>

#include "cohwalk/hilbert.hpp"

namespace cohwalk {

/// Parameters of one discrete-time walk experiment.
///
/// The lattice interval must contain [x0 - N, x0 + N] so that N steps never
/// reach a boundary; the default constructor-from-parameters picks exactly
/// that interval.
struct WalkConfig {
    double theta_deg        = 45.0;  // coin angle, degrees
    int num_steps           = 2;     // N
    int intermediate_step   = 1;     // M
    int initial_position    = 0;     // x0
    double initial_h_weight = 0.0;   // p, weight of |H><H| in the initial coin
    LatticeBounds bounds{-2, 2};
};

inline void validate(const WalkConfig& cfg) {
    if (cfg.num_steps < 1)
        throw invalid_input("walk: N must be positive, got "
                            + std::to_string(cfg.num_steps));
    if (cfg.intermediate_step <= 0 || cfg.intermediate_step >= cfg.num_steps) {
        throw invalid_input("walk: intermediate step M=" + std::to_string(cfg.intermediate_step)
                            + " must satisfy 0 < M < N=" + std::to_string(cfg.num_steps));
    }
    if (cfg.initial_h_weight < 0.0 || cfg.initial_h_weight > 1.0)
        throw invalid_input("walk: initial H weight " + std::to_string(cfg.initial_h_weight)
                            + " outside [0, 1]");
    if (!cfg.bounds.contains(cfg.initial_position - cfg.num_steps)
        || !cfg.bounds.contains(cfg.initial_position + cfg.num_steps)) {
        std::ostringstream os;
        os << "walk: lattice bounds [" << cfg.bounds.min_x << ", " << cfg.bounds.max_x
           << "] cannot hold " << cfg.num_steps << " steps from x0=" << cfg.initial_position;
        throw invalid_input(os.str());
    }
}

inline WalkConfig make_walk_config(double theta_deg, int num_steps, int intermediate_step,
                                   int initial_position = 0, double initial_h_weight = 0.0) {
    WalkConfig cfg{theta_deg, num_steps, intermediate_step, initial_position,
                   initial_h_weight,
                   LatticeBounds{initial_position - num_steps, initial_position + num_steps}};
    validate(cfg);
    return cfg;
}

/// True when position x is reachable from x0 in exactly `steps` steps:
/// inside the light cone and of the right parity.
inline bool parity_allowed(int x, int x0, int steps) {
    const int d = x - x0;
    return std::abs(d) <= steps && ((d + steps) % 2) == 0;
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// Coin flip [[cos t, sin t], [sin t, -cos t]]; unitary and Hermitian.
inline Eigen::Matrix2cd coin_operator(double theta_deg) {
    const double theta = theta_deg * std::numbers::pi / 180.0;
    Eigen::Matrix2cd c;
    c << std::cos(theta), std::sin(theta),
         std::sin(theta), -std::cos(theta);
    return c;
}

/// Conditional shift |x,H> -> |x+1,H>, |x,V> -> |x-1,V>. The two columns
/// that would leave the lattice are zero; evolution guards detect any
/// amplitude flowing through them.
inline Matrix shift_operator(const LatticeBounds& b) {
    Matrix s = Matrix::Zero(b.dim(), b.dim());
    for (int x = b.min_x; x <= b.max_x; ++x) {
        if (x + 1 <= b.max_x)
            s(mode_index({x + 1, Coin::H}, b), mode_index({x, Coin::H}, b)) = 1.0;
        if (x - 1 >= b.min_x)
            s(mode_index({x - 1, Coin::V}, b), mode_index({x, Coin::V}, b)) = 1.0;
    }
    return s;
}

/// One walk step U = S (1_x (X) C). Fused S*C: the coin mixes (x,H),(x,V)
/// on-site, then H moves right and V moves left.
inline Matrix step_unitary(double theta_deg, const LatticeBounds& b) {
    const Eigen::Matrix2cd c = coin_operator(theta_deg);
    Matrix u = Matrix::Zero(b.dim(), b.dim());
    for (int x = b.min_x; x <= b.max_x; ++x) {
        const Eigen::Index col_h = mode_index({x, Coin::H}, b);
        const Eigen::Index col_v = mode_index({x, Coin::V}, b);
        if (x + 1 <= b.max_x) {
            const Eigen::Index row = mode_index({x + 1, Coin::H}, b);
            u(row, col_h) = c(0, 0);
            u(row, col_v) = c(0, 1);
        }
        if (x - 1 >= b.min_x) {
            const Eigen::Index row = mode_index({x - 1, Coin::V}, b);
            u(row, col_h) = c(1, 0);
            u(row, col_v) = c(1, 1);
        }
    }
    return u;
}

inline Matrix step_unitary(const WalkConfig& cfg) {
    validate(cfg);
    return step_unitary(cfg.theta_deg, cfg.bounds);
}

/// Unitary completion of the walk step with cyclic boundary shifts. Walks
/// that respect the bounds never populate the wrap entries, so statistics
/// coincide with step_unitary; unlike it, this matrix is exactly unitary and
/// safe to feed to spectral routines (e.g. the Hamiltonian embedding).
inline Matrix step_unitary_cyclic(double theta_deg, const LatticeBounds& b) {
    const Eigen::Matrix2cd c = coin_operator(theta_deg);
    Matrix u = step_unitary(theta_deg, b);
    const Eigen::Index wrap_h = mode_index({b.min_x, Coin::H}, b);
    const Eigen::Index wrap_v = mode_index({b.max_x, Coin::V}, b);
    u(wrap_h, mode_index({b.max_x, Coin::H}, b)) = c(0, 0);
    u(wrap_h, mode_index({b.max_x, Coin::V}, b)) = c(0, 1);
    u(wrap_v, mode_index({b.min_x, Coin::H}, b)) = c(1, 0);
    u(wrap_v, mode_index({b.min_x, Coin::V}, b)) = c(1, 1);
    return u;
}

// ---------------------------------------------------------------------------
// Evolution
// ---------------------------------------------------------------------------

namespace detail {

inline void check_norm_kept(double before, double after, int step) {
    if (std::abs(after - before) > 1e-10) {
        std::ostringstream os;
        os << "evolution lost norm at step " << step
           << " (" << before << " -> " << after
           << "): amplitude reached the lattice boundary; enlarge the bounds";
        throw invalid_input(os.str());
    }
}

/// Applies `u` to a state vector `steps` times, guarding norm preservation.
inline Vector apply_steps(const Matrix& u, Vector psi, int steps) {
    double norm = psi.squaredNorm();
    for (int k = 0; k < steps; ++k) {
        psi = u * psi;
        const double after = psi.squaredNorm();
        check_norm_kept(norm, after, k + 1);
        norm = after;
    }
    return psi;
}

/// Conjugates `rho` by `u` `steps` times, guarding trace preservation.
inline Matrix apply_steps(const Matrix& u, Matrix rho, int steps) {
    double trace = rho.trace().real();
    for (int k = 0; k < steps; ++k) {
        rho = u * rho * u.adjoint();
        const double after = rho.trace().real();
        check_norm_kept(trace, after, k + 1);
        trace = after;
    }
    return rho;
}

/// Step application for evolutions that legitimately lose norm (per-arm
/// attenuation); callers are responsible for renormalizing.
inline Vector apply_steps_unguarded(const Matrix& a, Vector psi, int steps) {
    for (int k = 0; k < steps; ++k)
        psi = a * psi;
    return psi;
}

/// Walk step with per-step intensity transmissions eta_h, eta_v on the two
/// shift arms: rows of right-moved (H) modes scale by sqrt(eta_h), rows of
/// left-moved (V) modes by sqrt(eta_v). Unit transmissions return the
/// unitary step unchanged.
inline Matrix attenuated_step(double theta_deg, const LatticeBounds& b,
                              double eta_h, double eta_v) {
    Matrix a = step_unitary(theta_deg, b);
    if (eta_h == 1.0 && eta_v == 1.0) return a;
    const double amp_h = std::sqrt(eta_h);
    const double amp_v = std::sqrt(eta_v);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        a.row(i) *= (mode_at(i, b).coin == Coin::H) ? amp_h : amp_v;
    return a;
}

} // namespace detail

/// rho0 = |x0><x0| (X) (p |H><H| + (1-p) |V><V|).
inline DensityMatrix initial_state(const WalkConfig& cfg) {
    validate(cfg);
    Matrix rho = Matrix::Zero(cfg.bounds.dim(), cfg.bounds.dim());
    const Eigen::Index ih = mode_index({cfg.initial_position, Coin::H}, cfg.bounds);
    const Eigen::Index iv = mode_index({cfg.initial_position, Coin::V}, cfg.bounds);
    rho(ih, ih) = cfg.initial_h_weight;
    rho(iv, iv) = 1.0 - cfg.initial_h_weight;
    return DensityMatrix{cfg.bounds, std::move(rho)};
}

inline PureState evolve(const PureState& state, const WalkConfig& cfg, int steps) {
    if (steps < 0 || steps > cfg.num_steps)
        throw invalid_input("evolve: steps " + std::to_string(steps)
                            + " outside [0, N=" + std::to_string(cfg.num_steps) + "]");
    if (state.bounds != cfg.bounds)
        throw invalid_input("evolve: state bounds differ from config bounds");
    return PureState{state.bounds,
                     detail::apply_steps(step_unitary(cfg), state.amplitudes, steps)};
}

inline DensityMatrix evolve(const DensityMatrix& state, const WalkConfig& cfg, int steps) {
    if (steps < 0 || steps > cfg.num_steps)
        throw invalid_input("evolve: steps " + std::to_string(steps)
                            + " outside [0, N=" + std::to_string(cfg.num_steps) + "]");
    if (state.bounds != cfg.bounds)
        throw invalid_input("evolve: state bounds differ from config bounds");
    return DensityMatrix{state.bounds,
                         detail::apply_steps(step_unitary(cfg), state.entries, steps)};
}

// ---------------------------------------------------------------------------
// Measurement statistics
// ---------------------------------------------------------------------------

/// P_{x0,p}(x, c, steps): diagonal of the evolved initial state.
inline ProbabilityDistribution one_time_distribution(const WalkConfig& cfg, int steps) {
    return diagonal_distribution(evolve(initial_state(cfg), cfg, steps));
}

/// P_{x0,p}(x, c, N | y, c', M): evolve M steps, project on |y,c'>,
/// renormalize, evolve the remaining N - M steps, read the diagonal.
inline ProbabilityDistribution conditional_distribution(const WalkConfig& cfg,
                                                        int y, Coin c_prime) {
    validate(cfg);
    const Matrix u = step_unitary(cfg);
    const Eigen::Index idx = mode_index({y, c_prime}, cfg.bounds);

    Matrix rho_m = detail::apply_steps(u, initial_state(cfg).entries,
                                       cfg.intermediate_step);
    const double occupation = rho_m(idx, idx).real();
    if (occupation <= tol::occupation) {
        std::ostringstream os;
        os << "conditioning on the unoccupied mode " << to_string({y, c_prime})
           << " at step " << cfg.intermediate_step
           << " (probability " << occupation << ")";
        throw invalid_input(os.str());
    }

    Matrix collapsed = Matrix::Zero(rho_m.rows(), rho_m.cols());
    collapsed(idx, idx) = rho_m(idx, idx) / occupation;
    collapsed = detail::apply_steps(u, std::move(collapsed),
                                    cfg.num_steps - cfg.intermediate_step);
    return make_distribution(cfg.bounds, collapsed.diagonal().real());
}

} // namespace cohwalk
