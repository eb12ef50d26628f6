#pragma once

#include <vector>

#include "cohwalk/walk.hpp"

namespace cohwalk {

namespace tol {
inline constexpr double identity = 1e-10;   // |K - C| contract for unitary walks
inline constexpr double intensity = 1e-12;  // surviving-intensity floor for renormalization
}

/// All three quantifiers of one configuration. The identity K = C makes the
/// last three fields agree within tol::identity for any valid unitary walk.
struct QuantifierReport {
    double theta_deg        = 0.0;
    int initial_position    = 0;
    double initial_h_weight = 0.0;
    int num_steps           = 0;
    int intermediate_step   = 0;
    double kolmogorov_k     = 0.0;
    double coherence_superop = 0.0;
    double coherence_prob    = 0.0;
};

namespace detail {

struct PureBranch {
    double weight;
    Vector state;
};

/// The mixed initial coin of a walk as its convex pure-branch decomposition;
/// every statistic below is linear in rho0, so branches combine at the
/// intensity level.
inline std::vector<PureBranch> initial_branches(const WalkConfig& cfg) {
    std::vector<PureBranch> out;
    const double p = cfg.initial_h_weight;
    if (p > 0.0)
        out.push_back({p, basis_state({cfg.initial_position, Coin::H}, cfg.bounds).amplitudes});
    if (p < 1.0)
        out.push_back({1.0 - p, basis_state({cfg.initial_position, Coin::V}, cfg.bounds).amplitudes});
    return out;
}

/// Weighted branch intensities, renormalized to a distribution; how an
/// intensity measurement reads out a (possibly attenuated) ensemble.
inline RealVector normalized_intensity(const std::vector<PureBranch>& branches) {
    RealVector total = RealVector::Zero(branches.front().state.size());
    for (const auto& b : branches)
        total += b.weight * b.state.cwiseAbs2();
    const double sum = total.sum();
    if (sum <= tol::intensity)
        throw numerical_error("surviving intensity " + std::to_string(sum)
                              + " too small to renormalize");
    return total / sum;
}

inline RealVector normalized(RealVector intensity) {
    const double sum = intensity.sum();
    if (sum <= tol::intensity)
        throw numerical_error("surviving intensity " + std::to_string(sum)
                              + " too small to renormalize");
    return intensity / sum;
}

/// Normalized statistics of a fresh `steps`-step run started in basis mode
/// `idx` under the given step matrix.
inline RealVector fresh_walk_distribution(const Matrix& step, Eigen::Index idx, int steps) {
    Vector psi = Vector::Zero(step.rows());
    psi[idx] = Complex(1.0, 0.0);
    return normalized(apply_steps_unguarded(step, std::move(psi), steps).cwiseAbs2());
}

/// The two tables of the composition experiment: the direct N-step
/// distribution and the composition of an m-step run with fresh (N-m)-step
/// runs from every occupied intermediate mode. Per-arm transmissions
/// eta_h = eta_v = 1 give the ideal walk.
struct CompositionTables {
    RealVector direct;    // P(x, c, N)
    RealVector composed;  // sum_y P_y(x, c, N-m) P(y, c', m)
};

inline CompositionTables one_time_composition(const WalkConfig& cfg, int m,
                                              double eta_h, double eta_v) {
    validate(cfg);
    const Matrix step = attenuated_step(cfg.theta_deg, cfg.bounds, eta_h, eta_v);
    const int remaining = cfg.num_steps - m;

    auto branches = initial_branches(cfg);
    for (auto& b : branches)
        b.state = apply_steps_unguarded(step, std::move(b.state), m);
    const RealVector prob_m = normalized_intensity(branches);

    RealVector composed = RealVector::Zero(step.rows());
    for (Eigen::Index y = 0; y < prob_m.size(); ++y) {
        if (prob_m[y] <= tol::occupation) continue;
        composed += prob_m[y] * fresh_walk_distribution(step, y, remaining);
    }

    for (auto& b : branches)
        b.state = apply_steps_unguarded(step, std::move(b.state), remaining);
    return CompositionTables{normalized_intensity(branches), std::move(composed)};
}

/// Conditional statistics of one intermediate-measurement run: the branch
/// states at step M are masked by the out-coupling (amplitude 1 on the
/// measured mode, coherent residual on every other mode), evolved over the
/// remaining steps, and read out as a renormalized intensity. The residual
/// carries the half-wave phase flip of the switching, -sqrt(epsilon); this
/// sign shifts the resulting non-classicality upward, toward the
/// randomizing limit, the displacement imperfect extinction produces in
/// practice.
inline RealVector imperfect_conditional(const Matrix& step,
                                        const std::vector<PureBranch>& branches_at_m,
                                        Eigen::Index y, int remaining, double epsilon) {
    if (epsilon == 0.0) {
        // Perfect out-coupling collapses every branch onto the measured
        // basis mode itself.
        return fresh_walk_distribution(step, y, remaining);
    }
    const double residual_amplitude = -std::sqrt(epsilon);
    RealVector intensity = RealVector::Zero(step.rows());
    for (const auto& b : branches_at_m) {
        Vector masked = residual_amplitude * b.state;
        masked[y] = b.state[y];
        intensity += b.weight
                   * apply_steps_unguarded(step, std::move(masked), remaining).cwiseAbs2();
    }
    return normalized(std::move(intensity));
}

/// Two-time composition sum_x |sum_y P(x,N|y,M) P(y,M) - P(x,N)| with
/// optional per-arm attenuation and imperfect out-coupling of the
/// intermediate measurement; unit transmissions and epsilon = 0 give the
/// ideal quantifier.
inline double composed_two_time_K(const WalkConfig& cfg,
                                  double eta_h, double eta_v, double epsilon) {
    validate(cfg);
    const Matrix step = attenuated_step(cfg.theta_deg, cfg.bounds, eta_h, eta_v);
    const int remaining = cfg.num_steps - cfg.intermediate_step;

    auto branches = initial_branches(cfg);
    for (auto& b : branches)
        b.state = apply_steps_unguarded(step, std::move(b.state), cfg.intermediate_step);
    const RealVector prob_m = normalized_intensity(branches);

    RealVector composed = RealVector::Zero(step.rows());
    for (Eigen::Index y = 0; y < prob_m.size(); ++y) {
        if (prob_m[y] <= tol::occupation) continue;
        composed += prob_m[y] * imperfect_conditional(step, branches, y, remaining, epsilon);
    }

    for (auto& b : branches)
        b.state = apply_steps_unguarded(step, std::move(b.state), remaining);
    const RealVector prob_n = normalized_intensity(branches);
    return (composed - prob_n).cwiseAbs().sum();
}

} // namespace detail

/// Violation of the Kolmogorov consistency condition:
/// sum_x | sum_y P(x,N | y,M) P(y,M) - P(x,N) |. Conditioning events with
/// probability below tol::occupation contribute nothing and are skipped.
inline double kolmogorov_K(const WalkConfig& cfg) {
    return detail::composed_two_time_K(cfg, 1.0, 1.0, 0.0);
}

/// Coherence generated up to step M and detected at step N, in superoperator
/// form: || (Delta U^{N-M} Delta U^{M} - Delta U^{N}) rho0 ||_1.
inline double coherence_C_superop(const WalkConfig& cfg) {
    validate(cfg);
    const Matrix u = step_unitary(cfg);
    const Matrix rho0 = initial_state(cfg).entries;
    const int remaining = cfg.num_steps - cfg.intermediate_step;

    Matrix dephased_path = total_dephasing(
        detail::apply_steps(u, rho0, cfg.intermediate_step));
    dephased_path = total_dephasing(
        detail::apply_steps(u, std::move(dephased_path), remaining));

    const Matrix direct_path = total_dephasing(
        detail::apply_steps(u, rho0, cfg.num_steps));

    return trace_norm_diagonal(dephased_path - direct_path);
}

/// Same quantity assembled from one-time probability distributions only:
/// sum_x | sum_y P_y(x, N-M) P(y, M) - P(x, N) |.
inline double coherence_C_prob(const WalkConfig& cfg) {
    const auto tables = detail::one_time_composition(cfg, cfg.intermediate_step, 1.0, 1.0);
    return (tables.composed - tables.direct).cwiseAbs().sum();
}

/// Computes all three quantifiers and enforces K = C_prob = C_superop within
/// tol::identity. A violation is an implementation bug, not a physical
/// outcome, hence the hard error.
inline QuantifierReport verify_identity(const WalkConfig& cfg) {
    QuantifierReport report{cfg.theta_deg, cfg.initial_position, cfg.initial_h_weight,
                            cfg.num_steps, cfg.intermediate_step,
                            kolmogorov_K(cfg), coherence_C_superop(cfg),
                            coherence_C_prob(cfg)};
    if (std::abs(report.kolmogorov_k - report.coherence_prob) > tol::identity) {
        throw numerical_error("K = C identity violated: K = "
                              + std::to_string(report.kolmogorov_k) + ", C = "
                              + std::to_string(report.coherence_prob));
    }
    if (std::abs(report.coherence_superop - report.coherence_prob) > tol::identity) {
        throw numerical_error("coherence quantifier forms disagree: superoperator "
                              + std::to_string(report.coherence_superop) + ", probability "
                              + std::to_string(report.coherence_prob));
    }
    return report;
}

/// Worst-case imperfect intermediate measurement: the post-measurement
/// ensemble is replaced by the flat distribution over the 2(M+1)
/// parity-allowed modes at step M, then evolved to N and compared with the
/// unperturbed statistics. Requires N = 2M.
inline double randomizing_K(const WalkConfig& cfg) {
    validate(cfg);
    if (cfg.num_steps != 2 * cfg.intermediate_step) {
        throw invalid_input("randomizing_K requires N = 2M, got N="
                            + std::to_string(cfg.num_steps) + ", M="
                            + std::to_string(cfg.intermediate_step));
    }
    const Matrix u = step_unitary(cfg);
    const int m = cfg.intermediate_step;
    const int remaining = cfg.num_steps - m;
    const double flat_weight = 1.0 / (2.0 * (m + 1));

    RealVector composed = RealVector::Zero(u.rows());
    for (int x = cfg.initial_position - m; x <= cfg.initial_position + m; x += 2) {
        for (Coin c : {Coin::H, Coin::V}) {
            const Eigen::Index idx = mode_index({x, c}, cfg.bounds);
            composed += flat_weight * detail::fresh_walk_distribution(u, idx, remaining);
        }
    }

    auto branches = detail::initial_branches(cfg);
    for (auto& b : branches)
        b.state = detail::apply_steps_unguarded(u, std::move(b.state), cfg.num_steps);
    const RealVector prob_n = detail::normalized_intensity(branches);
    return (composed - prob_n).cwiseAbs().sum();
}

/// The three tables behind the difference plots: the unperturbed N-step
/// distribution, the composition of two N/2-step halves, and their signed
/// difference. The L1 norm of the difference is the probability-form
/// coherence quantifier at M = N/2.
struct DifferenceTables {
    ProbabilityDistribution unperturbed;  // P(x, c, N)
    ProbabilityDistribution composed;     // sum_y P_y(x, c, N/2) P(y, c', N/2)
    RealVector difference;                // composed - unperturbed, signed
};

inline DifferenceTables visualize_difference(const WalkConfig& cfg) {
    validate(cfg);
    if (cfg.num_steps % 2 != 0)
        throw invalid_input("difference tables need an even N (the composition "
                            "splits the walk at M = N/2), got N="
                            + std::to_string(cfg.num_steps));
    const auto tables = detail::one_time_composition(cfg, cfg.num_steps / 2, 1.0, 1.0);
    return DifferenceTables{make_distribution(cfg.bounds, tables.direct),
                            make_distribution(cfg.bounds, tables.composed),
                            tables.composed - tables.direct};
}

} // namespace cohwalk
