#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "cohwalk/quantifiers.hpp"

namespace cohwalk {

/// Inhomogeneous loss of the apparatus: per-step intensity transmissions of
/// the two shift arms and the intensity fraction surviving an out-coupling
/// event. Homogeneous loss (eta_h = eta_v) cancels in every normalized
/// statistic.
struct LossModel {
    double eta_h = 1.0;
    double eta_v = 1.0;
    double residual_transmission = 0.0;  // epsilon
};

inline void validate(const LossModel& loss) {
    if (loss.eta_h <= 0.0 || loss.eta_h > 1.0 || loss.eta_v <= 0.0 || loss.eta_v > 1.0)
        throw invalid_input("loss model: transmissions must lie in (0, 1], got eta_h="
                            + std::to_string(loss.eta_h) + ", eta_v="
                            + std::to_string(loss.eta_v));
    if (loss.residual_transmission < 0.0 || loss.residual_transmission > 1.0)
        throw invalid_input("loss model: residual transmission "
                            + std::to_string(loss.residual_transmission)
                            + " outside [0, 1]");
}

/// Parameter uncertainties of one Monte-Carlo error estimation: the coin
/// angle inaccuracy in degrees, the relative spreads of the per-arm
/// transmissions and of the residual transmission, the sample count, and the
/// seed that makes the run reproducible.
struct PerturbationSpec {
    double theta_jitter_deg  = 0.5;
    double coupling_jitter   = 0.02;
    double extinction_jitter = 0.02;
    int samples              = 1000;
    std::uint64_t seed       = 1;
};

inline void validate(const PerturbationSpec& spec) {
    if (spec.theta_jitter_deg < 0.0 || spec.coupling_jitter < 0.0
        || spec.extinction_jitter < 0.0)
        throw invalid_input("perturbation spec: jitters must be nonnegative");
    if (spec.samples < 1)
        throw invalid_input("perturbation spec: sample count must be positive, got "
                            + std::to_string(spec.samples));
}

/// One simulated instance. The parameter columns hold the realization of the
/// reference (step-M) run and the residual transmission of the first
/// out-coupling run; under drift, later runs of the same instance realize
/// their own values.
struct SampleRecord {
    int index = 0;
    double theta_deg = 0.0;
    double eta_h = 1.0;
    double eta_v = 1.0;
    double epsilon = 0.0;
    double k_value = 0.0;
    double c_value = 0.0;
};

struct ErrorBars {
    double mean_k = 0.0;
    double std_k  = 0.0;
    double mean_c = 0.0;
    double std_c  = 0.0;
    std::vector<SampleRecord> records;
};

// ---------------------------------------------------------------------------
// Lossy statistics
// ---------------------------------------------------------------------------

/// Normalized distribution after `steps` attenuated walk steps. Equal arm
/// transmissions reproduce the lossless distribution: the common factor
/// cancels on renormalization.
inline ProbabilityDistribution lossy_one_time_distribution(const WalkConfig& cfg,
                                                           const LossModel& loss,
                                                           int steps) {
    validate(cfg);
    validate(loss);
    if (steps < 0 || steps > cfg.num_steps)
        throw invalid_input("lossy_one_time_distribution: steps "
                            + std::to_string(steps) + " outside [0, N]");
    const Matrix step = detail::attenuated_step(cfg.theta_deg, cfg.bounds,
                                                loss.eta_h, loss.eta_v);
    auto branches = detail::initial_branches(cfg);
    for (auto& b : branches)
        b.state = detail::apply_steps_unguarded(step, std::move(b.state), steps);
    return make_distribution(cfg.bounds, detail::normalized_intensity(branches));
}

/// Conditional distribution with imperfect out-coupling at step M: the
/// measured mode keeps amplitude 1; every other mode keeps the coherent
/// residual of the switching. epsilon = 0 reproduces the perfect projective
/// conditional.
inline ProbabilityDistribution imperfect_conditional_distribution(const WalkConfig& cfg,
                                                                  const LossModel& loss,
                                                                  int y, Coin c_prime) {
    validate(cfg);
    validate(loss);
    const Matrix step = detail::attenuated_step(cfg.theta_deg, cfg.bounds,
                                                loss.eta_h, loss.eta_v);
    const Eigen::Index idx = mode_index({y, c_prime}, cfg.bounds);

    auto branches = detail::initial_branches(cfg);
    for (auto& b : branches)
        b.state = detail::apply_steps_unguarded(step, std::move(b.state),
                                                cfg.intermediate_step);
    const RealVector prob_m = detail::normalized_intensity(branches);
    if (loss.residual_transmission == 0.0 && prob_m[idx] <= tol::occupation) {
        throw invalid_input("conditioning on the unoccupied mode "
                            + to_string({y, c_prime}) + " at step "
                            + std::to_string(cfg.intermediate_step)
                            + " with perfect extinction");
    }
    return make_distribution(cfg.bounds,
                             detail::imperfect_conditional(step, branches, idx,
                                                           cfg.num_steps - cfg.intermediate_step,
                                                           loss.residual_transmission));
}

/// K evaluated the way the apparatus measures it: every distribution in the
/// two-time composition comes from the attenuated evolution, and the
/// intermediate measurement uses the imperfect out-coupling.
inline double perturbed_kolmogorov_K(const WalkConfig& cfg, const LossModel& loss) {
    validate(loss);
    return detail::composed_two_time_K(cfg, loss.eta_h, loss.eta_v,
                                       loss.residual_transmission);
}

/// C evaluated from the attenuated one-time statistics only; no intermediate
/// measurement is involved, so the residual transmission does not enter.
inline double perturbed_coherence_C(const WalkConfig& cfg, const LossModel& loss) {
    validate(loss);
    const auto tables = detail::one_time_composition(cfg, cfg.intermediate_step,
                                                     loss.eta_h, loss.eta_v);
    return (tables.composed - tables.direct).cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// Monte-Carlo sampling
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline double uniform_01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

/// Uniform draw in [center - half_width, center + half_width].
inline double uniform_around(std::uint64_t& state, double center, double half_width) {
    return center + half_width * (2.0 * uniform_01(state) - 1.0);
}

/// One run's realized parameters: the coin angle within its absolute
/// inaccuracy, the arm transmissions within their relative uncertainty.
/// Transmissions jittered above 1 are rescaled by the common factor, which
/// leaves every normalized statistic unchanged.
struct RunDraw {
    double theta_deg;
    double eta_h;
    double eta_v;
};

inline RunDraw draw_run(std::uint64_t& stream, const WalkConfig& cfg,
                        const PerturbationSpec& spec, const LossModel& nominal) {
    RunDraw run;
    run.theta_deg = uniform_around(stream, cfg.theta_deg, spec.theta_jitter_deg);
    run.eta_h = nominal.eta_h * uniform_around(stream, 1.0, spec.coupling_jitter);
    run.eta_v = nominal.eta_v * uniform_around(stream, 1.0, spec.coupling_jitter);
    const double over = std::max({run.eta_h, run.eta_v, 1.0});
    run.eta_h /= over;
    run.eta_v /= over;
    return run;
}

inline Matrix drawn_step(const RunDraw& run, const LatticeBounds& bounds) {
    return attenuated_step(run.theta_deg, bounds, run.eta_h, run.eta_v);
}

/// Distribution translated by `shift` lattice sites; weight outside the
/// bounds must be zero.
inline RealVector translate(const RealVector& probs, const LatticeBounds& b, int shift) {
    RealVector out = RealVector::Zero(probs.size());
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        if (probs[i] == 0.0) continue;
        Mode m = mode_at(i, b);
        m.position += shift;
        out[mode_index(m, b)] = probs[i];
    }
    return out;
}

} // namespace detail

/// Simulates `samples` instances of the full measurement scheme and returns
/// means and standard deviations of K and C as the error estimate.
///
/// Every experimental run inside one instance (the step-M reference run, the
/// step-N reference run, each out-coupling run, the fresh-start runs behind
/// the composition) realizes its own parameter draw within the uncertainty
/// ranges: the apparatus is realigned between runs and drifts in between, so
/// run-to-run inconsistency is the dominant error mechanism. K uses the
/// imperfect out-coupling pipeline; C uses unperturbed (measurement-free)
/// evolutions only, so the residual transmission never enters it. The
/// fresh-start statistics behind C come from one drifted run per initial
/// coin, translated across starting positions.
///
/// Per-sample streams are derived from the seed and the sample index, so
/// results do not depend on evaluation order. Draw order within a run:
/// theta, eta_h, eta_v; out-coupling runs then draw epsilon.
inline ErrorBars sample_quantifiers(const WalkConfig& cfg, const PerturbationSpec& spec,
                                    const LossModel& nominal = {}) {
    validate(cfg);
    validate(spec);
    validate(nominal);
    const int m = cfg.intermediate_step;
    const int remaining = cfg.num_steps - m;

    ErrorBars bars;
    bars.records.reserve(static_cast<std::size_t>(spec.samples));
    for (int i = 0; i < spec.samples; ++i) {
        std::uint64_t stream =
            spec.seed ^ (static_cast<std::uint64_t>(i) + 1) * 0xD1B54A32D192ED03ull;

        SampleRecord rec;
        rec.index = i;
        rec.epsilon = nominal.residual_transmission;

        // --- K: step-M run, one out-coupling run per occupied mode, step-N run.
        const auto run_m = detail::draw_run(stream, cfg, spec, nominal);
        rec.theta_deg = run_m.theta_deg;
        rec.eta_h = run_m.eta_h;
        rec.eta_v = run_m.eta_v;
        const Matrix step_m = detail::drawn_step(run_m, cfg.bounds);
        auto branches = detail::initial_branches(cfg);
        for (auto& b : branches)
            b.state = detail::apply_steps_unguarded(step_m, std::move(b.state), m);
        const RealVector prob_m = detail::normalized_intensity(branches);

        RealVector composed = RealVector::Zero(prob_m.size());
        bool first_outcoupling = true;
        for (Eigen::Index y = 0; y < prob_m.size(); ++y) {
            if (prob_m[y] <= tol::occupation) continue;
            const auto run_c = detail::draw_run(stream, cfg, spec, nominal);
            const double epsilon =
                std::clamp(nominal.residual_transmission
                               * detail::uniform_around(stream, 1.0, spec.extinction_jitter),
                           0.0, 1.0);
            if (first_outcoupling) {
                rec.epsilon = epsilon;
                first_outcoupling = false;
            }
            const Matrix step_c = detail::drawn_step(run_c, cfg.bounds);
            auto cond_branches = detail::initial_branches(cfg);
            for (auto& b : cond_branches)
                b.state = detail::apply_steps_unguarded(step_c, std::move(b.state), m);
            composed += prob_m[y]
                      * detail::imperfect_conditional(step_c, cond_branches, y,
                                                      remaining, epsilon);
        }

        const Matrix step_n = detail::drawn_step(detail::draw_run(stream, cfg, spec, nominal),
                                                 cfg.bounds);
        auto n_branches = detail::initial_branches(cfg);
        for (auto& b : n_branches)
            b.state = detail::apply_steps_unguarded(step_n, std::move(b.state), cfg.num_steps);
        const RealVector prob_n = detail::normalized_intensity(n_branches);
        rec.k_value = (composed - prob_n).cwiseAbs().sum();

        // --- C: step-M run, one fresh run per initial coin (translated across
        // starting positions), step-N run.
        const Matrix cstep_m = detail::drawn_step(detail::draw_run(stream, cfg, spec, nominal),
                                                  cfg.bounds);
        auto c_branches = detail::initial_branches(cfg);
        for (auto& b : c_branches)
            b.state = detail::apply_steps_unguarded(cstep_m, std::move(b.state), m);
        const RealVector cprob_m = detail::normalized_intensity(c_branches);

        std::array<RealVector, 2> fresh_base;
        for (Coin c : {Coin::H, Coin::V}) {
            const Matrix fstep = detail::drawn_step(detail::draw_run(stream, cfg, spec, nominal),
                                                    cfg.bounds);
            fresh_base[static_cast<int>(c)] = detail::fresh_walk_distribution(
                fstep, mode_index({cfg.initial_position, c}, cfg.bounds), remaining);
        }
        RealVector c_composed = RealVector::Zero(cprob_m.size());
        for (Eigen::Index y = 0; y < cprob_m.size(); ++y) {
            if (cprob_m[y] <= tol::occupation) continue;
            const Mode mode = mode_at(y, cfg.bounds);
            c_composed += cprob_m[y]
                        * detail::translate(fresh_base[static_cast<int>(mode.coin)],
                                            cfg.bounds,
                                            mode.position - cfg.initial_position);
        }
        const Matrix cstep_n = detail::drawn_step(detail::draw_run(stream, cfg, spec, nominal),
                                                  cfg.bounds);
        auto cn_branches = detail::initial_branches(cfg);
        for (auto& b : cn_branches)
            b.state = detail::apply_steps_unguarded(cstep_n, std::move(b.state), cfg.num_steps);
        rec.c_value = (c_composed - detail::normalized_intensity(cn_branches)).cwiseAbs().sum();

        bars.records.push_back(rec);
    }

    // Variance around the first sample as shift keeps the all-identical case
    // exactly zero.
    const double k0 = bars.records.front().k_value;
    const double c0 = bars.records.front().c_value;
    double k_sum = 0.0, c_sum = 0.0, k_sq = 0.0, c_sq = 0.0;
    for (const auto& rec : bars.records) {
        k_sum += rec.k_value - k0;
        c_sum += rec.c_value - c0;
        k_sq += (rec.k_value - k0) * (rec.k_value - k0);
        c_sq += (rec.c_value - c0) * (rec.c_value - c0);
    }
    const double n = static_cast<double>(spec.samples);
    bars.mean_k = k0 + k_sum / n;
    bars.mean_c = c0 + c_sum / n;
    bars.std_k = std::sqrt(std::max(0.0, k_sq / n - (k_sum / n) * (k_sum / n)));
    bars.std_c = std::sqrt(std::max(0.0, c_sq / n - (c_sum / n) * (c_sum / n)));
    return bars;
}

} // namespace cohwalk
