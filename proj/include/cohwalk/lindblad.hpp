#pragma once

#include <set>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "cohwalk/hilbert.hpp"

namespace cohwalk {

/// Generator of a Lindblad (GKSL) master equation:
/// d rho / dt = -i [H, rho] + sum_j c_j (L_j rho L_j+ - 1/2 {L_j+ L_j, rho}).
struct LindbladGenerator {
    Matrix hamiltonian;
    std::vector<Matrix> jump_ops;
    std::vector<double> rates;

    Eigen::Index dim() const { return hamiltonian.rows(); }
};

inline void validate(const LindbladGenerator& gen) {
    const Eigen::Index d = gen.dim();
    if (d == 0 || gen.hamiltonian.cols() != d)
        throw invalid_input("lindblad: Hamiltonian must be a nonempty square matrix");
    if (!is_hermitian(gen.hamiltonian))
        throw invalid_input("lindblad: Hamiltonian is not Hermitian within tolerance");
    if (gen.jump_ops.size() != gen.rates.size())
        throw invalid_input("lindblad: " + std::to_string(gen.jump_ops.size())
                            + " jump operators but " + std::to_string(gen.rates.size())
                            + " rates");
    for (std::size_t j = 0; j < gen.jump_ops.size(); ++j) {
        if (gen.jump_ops[j].rows() != d || gen.jump_ops[j].cols() != d)
            throw invalid_input("lindblad: jump operator " + std::to_string(j)
                                + " has mismatched dimension");
        if (gen.rates[j] < 0.0)
            throw invalid_input("lindblad: rate " + std::to_string(gen.rates[j])
                                + " is negative; not of Lindblad form");
    }
}

/// Ordered outcome labels of the measured observable, identified with the
/// computational basis. Degenerate observables are rejected.
struct ObservableBasis {
    std::vector<std::string> labels;

    Eigen::Index dim() const { return static_cast<Eigen::Index>(labels.size()); }
};

inline void validate(const ObservableBasis& basis) {
    if (basis.labels.empty())
        throw invalid_input("observable basis is empty");
    std::set<std::string> unique(basis.labels.begin(), basis.labels.end());
    if (unique.size() != basis.labels.size())
        throw invalid_input("observable basis has repeated outcome labels; "
                            "degenerate observables are not supported");
}

inline ObservableBasis computational_basis(Eigen::Index d) {
    ObservableBasis basis;
    basis.labels.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i)
        basis.labels.push_back(std::to_string(i));
    return basis;
}

/// rho0 = sum_x p_x |x><x|, diagonal in the measured basis.
struct DiagonalInitialState {
    RealVector populations;
};

inline void validate(const DiagonalInitialState& state) {
    if (state.populations.size() == 0)
        throw invalid_input("diagonal initial state is empty");
    if (state.populations.minCoeff() < -tol::prob_clamp)
        throw invalid_input("diagonal initial state has negative population "
                            + std::to_string(state.populations.minCoeff()));
    if (std::abs(state.populations.sum() - 1.0) > tol::trace_one)
        throw invalid_input("diagonal initial state populations sum to "
                            + std::to_string(state.populations.sum()));
}

inline Matrix to_density(const DiagonalInitialState& state) {
    validate(state);
    Matrix rho = Matrix::Zero(state.populations.size(), state.populations.size());
    rho.diagonal() = state.populations.cast<Complex>();
    return rho;
}

// ---------------------------------------------------------------------------
// Generator action and propagation
// ---------------------------------------------------------------------------

/// Action of the generator on a state: -i[H, rho] + dissipators. The result
/// is traceless for any input.
inline Matrix lindblad_apply(const LindbladGenerator& gen, const Matrix& rho) {
    validate(gen);
    if (rho.rows() != gen.dim() || rho.cols() != gen.dim())
        throw invalid_input("lindblad_apply: state dimension "
                            + std::to_string(rho.rows()) + " does not match generator dimension "
                            + std::to_string(gen.dim()));
    const Complex i_unit(0.0, 1.0);
    Matrix out = -i_unit * (gen.hamiltonian * rho - rho * gen.hamiltonian);
    for (std::size_t j = 0; j < gen.jump_ops.size(); ++j) {
        const Matrix& l = gen.jump_ops[j];
        const Matrix ldl = l.adjoint() * l;
        out += gen.rates[j] * (l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl));
    }
    return out;
}

/// The d^2 x d^2 matrix of the generator acting on column-major vectorized
/// states, vec(A rho B) = (B^T (x) A) vec(rho).
inline Matrix liouvillian_matrix(const LindbladGenerator& gen) {
    validate(gen);
    const Eigen::Index d = gen.dim();
    const Matrix id = Matrix::Identity(d, d);
    const Complex i_unit(0.0, 1.0);

    Matrix sop = -i_unit * (Eigen::kroneckerProduct(id, gen.hamiltonian)
                            - Eigen::kroneckerProduct(gen.hamiltonian.transpose(), id));
    for (std::size_t j = 0; j < gen.jump_ops.size(); ++j) {
        const Matrix& l = gen.jump_ops[j];
        const Matrix ldl = l.adjoint() * l;
        sop += gen.rates[j]
             * (Eigen::kroneckerProduct(l.conjugate(), l)
                - 0.5 * Eigen::kroneckerProduct(id, ldl)
                - 0.5 * Eigen::kroneckerProduct(ldl.transpose(), id)).eval();
    }
    return sop;
}

/// e^{L t} as a dense superoperator matrix.
inline Matrix propagator(const LindbladGenerator& gen, double t) {
    if (t < 0.0)
        throw invalid_input("propagator: negative time " + std::to_string(t)
                            + "; backward Lindblad propagation is undefined");
    return (liouvillian_matrix(gen) * t).exp();
}

namespace detail {

inline Matrix apply_superop(const Matrix& sop, const Matrix& rho) {
    const Eigen::Index d = rho.rows();
    const Eigen::Map<const Vector> vec(rho.data(), d * d);
    Vector out = sop * vec;
    return Eigen::Map<const Matrix>(out.data(), d, d);
}

/// tr{ P_x E_dt P_y E_s rho0 } with precomputed propagators; the shared form
/// behind both the public joint probability and the generalized quantifiers.
inline double joint_from_propagators(const Matrix& prop_s, const Matrix& prop_dt,
                                     const Matrix& rho0, Eigen::Index x, Eigen::Index y) {
    const Matrix rho_s = apply_superop(prop_s, rho0);
    Matrix projected = Matrix::Zero(rho0.rows(), rho0.cols());
    projected(y, y) = rho_s(y, y);
    return apply_superop(prop_dt, projected)(x, x).real();
}

} // namespace detail

/// rho_t = e^{L t} rho0; trace preservation and positivity are enforced as
/// post-conditions of the propagation.
inline Matrix lindblad_propagate(const LindbladGenerator& gen, const Matrix& rho0, double t) {
    validate(gen);
    if (rho0.rows() != gen.dim() || rho0.cols() != gen.dim())
        throw invalid_input("lindblad_propagate: state dimension does not match generator");
    if (t < 0.0)
        throw invalid_input("lindblad_propagate: negative time " + std::to_string(t));
    if (t == 0.0) return rho0;

    Matrix rho_t = detail::apply_superop(propagator(gen, t), rho0);
    const double trace_err = std::abs(rho_t.trace() - rho0.trace());
    if (trace_err > 1e-10)
        throw numerical_error("lindblad_propagate: trace drifted by "
                              + std::to_string(trace_err));
    const double lambda_min = min_eigenvalue((rho_t + rho_t.adjoint()) / 2.0);
    if (lambda_min < -tol::psd)
        throw numerical_error("lindblad_propagate: state lost positivity, eigenvalue "
                              + std::to_string(lambda_min));
    return rho_t;
}

/// Two-time joint probability P(x, t; y, s) in regression form:
/// tr{ P_x e^{L(t-s)} P_y e^{L s} rho0 }.
inline double regression_joint(const LindbladGenerator& gen, const ObservableBasis& basis,
                               const DiagonalInitialState& rho0,
                               Eigen::Index x, double t, Eigen::Index y, double s) {
    validate(gen);
    validate(basis);
    if (basis.dim() != gen.dim())
        throw invalid_input("regression_joint: basis dimension does not match generator");
    if (x < 0 || x >= basis.dim() || y < 0 || y >= basis.dim())
        throw invalid_input("regression_joint: outcome index outside the basis");
    if (s < 0.0 || s > t)
        throw invalid_input("regression_joint: times must satisfy 0 <= s <= t, got s="
                            + std::to_string(s) + ", t=" + std::to_string(t));
    const Matrix prop_s = propagator(gen, s);
    const Matrix prop_dt = propagator(gen, t - s);
    return detail::joint_from_propagators(prop_s, prop_dt, to_density(rho0), x, y);
}

/// Coherences generated up to time s and detected at time t:
/// || (Delta e^{L(t-s)} Delta e^{L s} - Delta e^{L t}) rho0 ||_1.
inline double generalized_C(const LindbladGenerator& gen, const ObservableBasis& basis,
                            const DiagonalInitialState& rho0, double s, double t) {
    validate(gen);
    validate(basis);
    if (basis.dim() != gen.dim())
        throw invalid_input("generalized_C: basis dimension does not match generator");
    if (s < 0.0 || s > t)
        throw invalid_input("generalized_C: times must satisfy 0 <= s <= t");

    const Matrix rho = to_density(rho0);
    const Matrix prop_s = propagator(gen, s);
    const Matrix prop_dt = propagator(gen, t - s);
    const Matrix prop_t = propagator(gen, t);

    const Matrix dephased_path = total_dephasing(
        detail::apply_superop(prop_dt, total_dephasing(detail::apply_superop(prop_s, rho))));
    const Matrix direct_path = total_dephasing(detail::apply_superop(prop_t, rho));
    return trace_norm_diagonal(dephased_path - direct_path);
}

/// Non-classicality of the two-time statistics:
/// sum_x | sum_y P(x, t; y, s) - P(x, t) |, with the joint probabilities in
/// regression form.
inline double generalized_K(const LindbladGenerator& gen, const ObservableBasis& basis,
                            const DiagonalInitialState& rho0, double s, double t) {
    validate(gen);
    validate(basis);
    if (basis.dim() != gen.dim())
        throw invalid_input("generalized_K: basis dimension does not match generator");
    if (s < 0.0 || s > t)
        throw invalid_input("generalized_K: times must satisfy 0 <= s <= t");

    const Eigen::Index d = gen.dim();
    const Matrix rho = to_density(rho0);
    const Matrix prop_s = propagator(gen, s);
    const Matrix prop_dt = propagator(gen, t - s);
    const RealVector prob_t =
        detail::apply_superop(propagator(gen, t), rho).diagonal().real();

    // sum_y tr{P_x e^{L(t-s)} P_y e^{Ls} rho0} for all x at once: one
    // propagator application per intermediate outcome y.
    const Matrix rho_s = detail::apply_superop(prop_s, rho);
    RealVector composed = RealVector::Zero(d);
    for (Eigen::Index y = 0; y < d; ++y) {
        Matrix projected = Matrix::Zero(d, d);
        projected(y, y) = rho_s(y, y);
        composed += detail::apply_superop(prop_dt, projected).diagonal().real();
    }
    return (composed - prob_t).cwiseAbs().sum();
}

/// Hermitian H with e^{-iH} = U for a unitary U, via the Schur form. Used to
/// embed one discrete step per unit time into a dissipation-free generator;
/// the branch of the logarithm is immaterial at integer times.
inline Matrix hamiltonian_from_unitary(const Matrix& u) {
    if (u.rows() != u.cols())
        throw invalid_input("hamiltonian_from_unitary: matrix is not square");
    const double unitarity = (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()))
                                 .cwiseAbs()
                                 .maxCoeff();
    if (unitarity > 1e-10)
        throw invalid_input("hamiltonian_from_unitary: input deviates from unitarity by "
                            + std::to_string(unitarity));
    Eigen::ComplexSchur<Matrix> schur(u);
    const Matrix& q = schur.matrixU();
    Vector phases(u.rows());
    for (Eigen::Index k = 0; k < u.rows(); ++k)
        phases[k] = Complex(-std::arg(schur.matrixT()(k, k)), 0.0);
    return q * phases.asDiagonal() * q.adjoint();
}

} // namespace cohwalk
