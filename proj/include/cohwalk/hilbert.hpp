#pragma once

#include <algorithm>
#include <complex>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "cohwalk/errors.hpp"

namespace cohwalk {

using Complex    = std::complex<double>;
using Matrix     = Eigen::MatrixXcd;
using Vector     = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
// Shared numerical tolerances for state invariants.
inline constexpr double hermitian   = 1e-12;
inline constexpr double trace_one   = 1e-12;
inline constexpr double psd         = 1e-10;   // smallest eigenvalue >= -psd
inline constexpr double norm_one    = 1e-12;
inline constexpr double prob_sum    = 1e-10;
inline constexpr double prob_clamp  = 1e-12;   // negative roundoff clamped to 0
inline constexpr double off_diag    = 1e-12;
inline constexpr double occupation  = 1e-12;   // conditioning events below this are empty
} // namespace tol

/// Coin (polarisation) basis label. H shifts right, V shifts left.
enum class Coin : int { H = 0, V = 1 };

inline char coin_char(Coin c) { return c == Coin::H ? 'H' : 'V'; }

inline Coin other(Coin c) { return c == Coin::H ? Coin::V : Coin::H; }

/// Closed position interval [min_x, max_x] of the walker lattice.
struct LatticeBounds {
    int min_x = 0;
    int max_x = 0;

    int sites() const { return max_x - min_x + 1; }
    Eigen::Index dim() const { return 2 * static_cast<Eigen::Index>(sites()); }
    bool contains(int x) const { return x >= min_x && x <= max_x; }

    friend bool operator==(const LatticeBounds&, const LatticeBounds&) = default;
};

/// One basis label |x, c> of the position (X) coin space.
struct Mode {
    int position = 0;
    Coin coin    = Coin::H;

    friend bool operator==(const Mode&, const Mode&) = default;
};

inline std::string to_string(const Mode& m) {
    std::ostringstream os;
    os << "(" << m.position << "," << coin_char(m.coin) << ")";
    return os.str();
}

/// Position-major, coin-minor (H before V) index of a mode. Bijective and
/// contiguous over the bounds.
inline Eigen::Index mode_index(const Mode& m, const LatticeBounds& b) {
    if (!b.contains(m.position)) {
        std::ostringstream os;
        os << "mode position " << m.position << " outside lattice bounds ["
           << b.min_x << ", " << b.max_x << "]";
        throw invalid_input(os.str());
    }
    return 2 * static_cast<Eigen::Index>(m.position - b.min_x)
         + static_cast<Eigen::Index>(m.coin);
}

/// Inverse of mode_index.
inline Mode mode_at(Eigen::Index i, const LatticeBounds& b) {
    if (i < 0 || i >= b.dim()) {
        std::ostringstream os;
        os << "mode index " << i << " outside [0, " << b.dim() << ")";
        throw invalid_input(os.str());
    }
    return Mode{b.min_x + static_cast<int>(i / 2),
                (i % 2 == 0) ? Coin::H : Coin::V};
}

/// Complex amplitude vector over the modes of a bounded lattice.
struct PureState {
    LatticeBounds bounds;
    Vector amplitudes;
};

/// Hermitian unit-trace complex matrix over the modes of a bounded lattice.
struct DensityMatrix {
    LatticeBounds bounds;
    Matrix entries;
};

/// Real distribution over the modes of a bounded lattice.
struct ProbabilityDistribution {
    LatticeBounds bounds;
    RealVector probs;

    double at(const Mode& m) const { return probs[mode_index(m, bounds)]; }
};

// ---------------------------------------------------------------------------
// Validators
// ---------------------------------------------------------------------------

inline bool is_hermitian(const Matrix& m, double tolerance = tol::hermitian) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

inline double min_eigenvalue(const Matrix& hermitian_matrix) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_matrix,
                                                 Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

/// Checks the three density-matrix invariants (Hermiticity, unit trace, PSD)
/// and throws naming the first violated one.
inline void validate_density(const Matrix& rho, const std::string& context = "") {
    const std::string where = context.empty() ? "" : context + ": ";
    if (rho.rows() != rho.cols())
        throw invalid_input(where + "density matrix is not square");
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol::hermitian) {
        throw numerical_error(where + "density matrix not Hermitian, max deviation "
                              + std::to_string(herm));
    }
    const double tr_err = std::abs(rho.trace() - Complex(1.0, 0.0));
    if (tr_err > tol::trace_one) {
        throw numerical_error(where + "density matrix trace deviates from 1 by "
                              + std::to_string(tr_err));
    }
    const double lambda_min = min_eigenvalue((rho + rho.adjoint()) / 2.0);
    if (lambda_min < -tol::psd) {
        throw numerical_error(where + "density matrix has negative eigenvalue "
                              + std::to_string(lambda_min));
    }
}

inline void validate_density(const DensityMatrix& rho, const std::string& context = "") {
    if (rho.entries.rows() != rho.bounds.dim())
        throw invalid_input("density matrix dimension does not match its bounds");
    validate_density(rho.entries, context);
}

/// Clamps tiny negative roundoff to zero and verifies every entry lies in
/// [-prob_clamp, 1 + prob_clamp]. Normalization is checked only when asked:
/// lossy pipelines legitimately produce pre-normalization weights.
inline ProbabilityDistribution make_distribution(const LatticeBounds& bounds,
                                                 RealVector raw,
                                                 bool require_normalized = true) {
    if (raw.size() != bounds.dim())
        throw invalid_input("distribution size does not match lattice bounds");
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        if (raw[i] < -tol::prob_clamp || raw[i] > 1.0 + tol::prob_clamp) {
            throw numerical_error("probability entry " + std::to_string(raw[i])
                                  + " at mode " + to_string(mode_at(i, bounds))
                                  + " outside [0, 1]");
        }
        raw[i] = std::clamp(raw[i], 0.0, 1.0);
    }
    if (require_normalized) {
        const double total = raw.sum();
        if (std::abs(total - 1.0) > tol::prob_sum)
            throw numerical_error("distribution sums to " + std::to_string(total)
                                  + ", expected 1");
    }
    return ProbabilityDistribution{bounds, std::move(raw)};
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Total dephasing map: zeroes every off-diagonal element in the measured
/// (position, coin) basis, leaving the diagonal untouched.
inline Matrix total_dephasing(const Matrix& rho) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    out.diagonal() = rho.diagonal();
    return out;
}

inline DensityMatrix total_dephasing(const DensityMatrix& rho) {
    return DensityMatrix{rho.bounds, total_dephasing(rho.entries)};
}

/// Trace norm of a diagonal matrix: the sum of absolute diagonal values.
/// Off-diagonal content beyond tolerance signals misuse (the general trace
/// norm via singular values is deliberately not provided).
inline double trace_norm_diagonal(const Matrix& m) {
    if (m.rows() != m.cols())
        throw invalid_input("trace_norm_diagonal: matrix is not square");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (i != j && std::abs(m(i, j)) > tol::off_diag) {
                throw numerical_error(
                    "trace_norm_diagonal: off-diagonal entry of magnitude "
                    + std::to_string(std::abs(m(i, j))) + " at (" + std::to_string(i)
                    + "," + std::to_string(j) + "); input must be diagonal");
            }
        }
    }
    return m.diagonal().cwiseAbs().sum();
}

/// Convex mixture p * a + (1-p) * b.
inline DensityMatrix mix(const DensityMatrix& a, const DensityMatrix& b, double p) {
    if (p < 0.0 || p > 1.0)
        throw invalid_input("mix: weight " + std::to_string(p) + " outside [0, 1]");
    if (a.bounds != b.bounds || a.entries.rows() != b.entries.rows())
        throw invalid_input("mix: operands live on different mode spaces");
    return DensityMatrix{a.bounds, p * a.entries + (1.0 - p) * b.entries};
}

/// |m><m| basis vector on the given bounds.
inline PureState basis_state(const Mode& m, const LatticeBounds& b) {
    Vector amps = Vector::Zero(b.dim());
    amps[mode_index(m, b)] = Complex(1.0, 0.0);
    return PureState{b, std::move(amps)};
}

/// Diagonal of a density matrix as a probability distribution.
inline ProbabilityDistribution diagonal_distribution(const DensityMatrix& rho,
                                                     bool require_normalized = true) {
    return make_distribution(rho.bounds, rho.entries.diagonal().real(),
                             require_normalized);
}

inline ProbabilityDistribution measured_distribution(const PureState& psi,
                                                     bool require_normalized = true) {
    return make_distribution(psi.bounds, psi.amplitudes.cwiseAbs2(),
                             require_normalized);
}

} // namespace cohwalk
