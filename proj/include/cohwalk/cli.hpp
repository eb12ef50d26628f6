#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cohwalk/config.hpp"
#include "cohwalk/csv.hpp"
#include "cohwalk/fock.hpp"
#include "cohwalk/manifest.hpp"
#include "cohwalk/quantifiers.hpp"
#include "cohwalk/svg.hpp"

namespace cohwalk::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;     // malformed / inconsistent configuration
inline constexpr int exit_numerical = 3;  // violated numerical contract
inline constexpr int exit_io = 4;         // filesystem failure

struct Options {
    std::string config_path;
    std::string output_dir;    // --output; overrides config and environment
    bool dense = false;        // emit the full parity-allowed grid
    bool sweep = false;        // quantify: sweep the reference angles
    std::optional<int> steps;  // simulate: override the step count
};

namespace detail {

inline const double reference_angles[] = {0.0, 7.0, 11.0, 23.0, 34.0, 47.0};

inline std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg,
                                                const Options& opt) {
    if (!opt.output_dir.empty()) return opt.output_dir;
    if (!cfg.output.directory.empty()) return cfg.output.directory;
    if (const char* env = std::getenv("COHWALK_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

inline std::string initial_label(double p) {
    if (p == 1.0) return "H";
    if (p == 0.0) return "V";
    return "p=" + csv::format(p);
}

/// Distribution-like CSV: rows sorted by position then coin, zero rows
/// suppressed unless `dense`, in which case the full parity-allowed grid for
/// `steps` steps from x0 is emitted.
inline std::string mode_table(const ProbabilityDistribution& dist, int x0, int steps,
                              bool dense, const std::string& value_header) {
    csv::Table table({"position", "coin", value_header});
    for (Eigen::Index i = 0; i < dist.probs.size(); ++i) {
        const Mode m = mode_at(i, dist.bounds);
        const double v = dist.probs[i];
        if (dense ? parity_allowed(m.position, x0, steps) : v != 0.0)
            table.add_row({csv::format(m.position), std::string(1, coin_char(m.coin)),
                           csv::format(v)});
    }
    return table.content();
}

inline std::string signed_mode_table(const RealVector& values, const LatticeBounds& bounds,
                                     int x0, int steps, bool dense,
                                     const std::string& value_header) {
    csv::Table table({"position", "coin", value_header});
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const Mode m = mode_at(i, bounds);
        if (dense ? parity_allowed(m.position, x0, steps) : values[i] != 0.0)
            table.add_row({csv::format(m.position), std::string(1, coin_char(m.coin)),
                           csv::format(values[i])});
    }
    return table.content();
}

inline svg::BarPanel distribution_panel(const std::string& title, const RealVector& values,
                                        const LatticeBounds& bounds, int x0, int steps) {
    svg::BarPanel panel;
    panel.title = title;
    svg::BarSeries v_series{"V", "#1565c0", {}};
    svg::BarSeries h_series{"H", "#c62828", {}};
    for (int x = x0 - steps; x <= x0 + steps; x += 2) {
        panel.positions.push_back(x);
        v_series.values.push_back(values[mode_index({x, Coin::V}, bounds)]);
        h_series.values.push_back(values[mode_index({x, Coin::H}, bounds)]);
    }
    panel.series = {v_series, h_series};
    return panel;
}

// --- subcommand bodies (throw on failure; run() maps to exit codes) -------

inline void simulate(const ExperimentConfig& cfg, const Options& opt, RunManifest& manifest,
                     const std::filesystem::path& dir) {
    const int steps = opt.steps.value_or(cfg.walk.num_steps);
    if (steps < 0 || steps > cfg.walk.num_steps)
        throw invalid_input("simulate: --steps " + std::to_string(steps)
                            + " outside [0, N=" + std::to_string(cfg.walk.num_steps) + "]");
    const auto dist = one_time_distribution(cfg.walk, steps);
    manifest.emit(dir, "simulate.csv",
                  mode_table(dist, cfg.walk.initial_position, steps, opt.dense, "probability"));
    std::cout << "simulate: wrote P(x, c, " << steps << ") for theta="
              << cfg.walk.theta_deg << " deg\n";
}

inline void quantify(const ExperimentConfig& cfg, const Options& opt, RunManifest& manifest,
                     const std::filesystem::path& dir) {
    csv::Table table({"theta_deg", "initial", "N", "M", "K", "C_superop", "C_prob"});
    std::vector<std::pair<double, double>> points;

    auto add = [&](const WalkConfig& w) {
        const QuantifierReport r = verify_identity(w);
        table.add_row({csv::format(r.theta_deg), initial_label(r.initial_h_weight),
                       csv::format(r.num_steps), csv::format(r.intermediate_step),
                       csv::format(r.kolmogorov_k), csv::format(r.coherence_superop),
                       csv::format(r.coherence_prob)});
        points.emplace_back(r.coherence_prob, r.kolmogorov_k);
    };

    if (opt.sweep) {
        for (double theta : reference_angles) {
            for (double p : {0.0, 1.0}) {
                WalkConfig w = cfg.walk;
                w.theta_deg = theta;
                w.initial_h_weight = p;
                add(w);
            }
        }
    } else {
        add(cfg.walk);
    }
    manifest.emit(dir, "quantify.csv", table.content());
    if (cfg.output.svg)
        manifest.emit(dir, "quantify.svg",
                      svg::identity_scatter("coherence C", "non-classicality K", points));
    std::cout << "quantify: " << points.size() << " configuration(s), K = C verified\n";
}

inline void table1(const ExperimentConfig& cfg, const Options&, RunManifest& manifest,
                   const std::filesystem::path& dir) {
    if (cfg.walk.num_steps != 20 || cfg.walk.intermediate_step != 10)
        throw invalid_input("table1 requires N=20 and M=10, got N="
                            + std::to_string(cfg.walk.num_steps) + ", M="
                            + std::to_string(cfg.walk.intermediate_step));
    csv::Table table({"theta_deg", "initial", "theory_K", "randomizing_K"});
    for (double theta : reference_angles) {
        for (double p : {0.0, 1.0}) {
            WalkConfig w = cfg.walk;
            w.theta_deg = theta;
            w.initial_h_weight = p;
            table.add_row({csv::format(theta), initial_label(p),
                           csv::format(kolmogorov_K(w)), csv::format(randomizing_K(w))});
        }
    }
    manifest.emit(dir, "table1.csv", table.content());
    std::cout << "table1: wrote theory and randomizing K over the reference grid\n";
}

inline void visualize(const ExperimentConfig& cfg, const Options& opt, RunManifest& manifest,
                      const std::filesystem::path& dir) {
    const auto tables = visualize_difference(cfg.walk);  // rejects odd N
    const int x0 = cfg.walk.initial_position;
    const int n = cfg.walk.num_steps;
    manifest.emit(dir, "visualize_a.csv",
                  mode_table(tables.unperturbed, x0, n, opt.dense, "probability"));
    manifest.emit(dir, "visualize_b.csv",
                  mode_table(tables.composed, x0, n, opt.dense, "probability"));
    manifest.emit(dir, "visualize_c.csv",
                  signed_mode_table(tables.difference, cfg.walk.bounds, x0, n, opt.dense,
                                    "difference"));
    if (cfg.output.svg) {
        const auto& b = cfg.walk.bounds;
        manifest.emit(dir, "visualize.svg",
                      svg::bar_panels({distribution_panel("(a) direct", tables.unperturbed.probs, b, x0, n),
                                       distribution_panel("(b) composed", tables.composed.probs, b, x0, n),
                                       distribution_panel("(c) difference", tables.difference, b, x0, n)}));
    }
    std::cout << "visualize: sum |difference| = "
              << csv::format(tables.difference.cwiseAbs().sum()) << "\n";
}

inline void montecarlo(const ExperimentConfig& cfg, const Options&, RunManifest& manifest,
                       const std::filesystem::path& dir) {
    const ErrorBars bars = sample_quantifiers(cfg.walk, cfg.montecarlo, cfg.loss);
    csv::Table summary({"mean_K", "std_K", "mean_C", "std_C"});
    summary.add_row({csv::format(bars.mean_k), csv::format(bars.std_k),
                     csv::format(bars.mean_c), csv::format(bars.std_c)});
    manifest.emit(dir, "montecarlo_summary.csv", summary.content());

    csv::Table samples({"sample", "theta_deg", "eta_H", "eta_V", "epsilon", "K", "C"});
    for (const auto& rec : bars.records)
        samples.add_row({csv::format(rec.index), csv::format(rec.theta_deg),
                         csv::format(rec.eta_h), csv::format(rec.eta_v),
                         csv::format(rec.epsilon), csv::format(rec.k_value),
                         csv::format(rec.c_value)});
    manifest.emit(dir, "montecarlo_samples.csv", samples.content());
    std::cout << "montecarlo: K = " << csv::format(bars.mean_k) << " +/- "
              << csv::format(bars.std_k) << ", C = " << csv::format(bars.mean_c)
              << " +/- " << csv::format(bars.std_c) << "\n";
}

inline void lindblad_check(const ExperimentConfig& cfg, const Options&, RunManifest& manifest,
                           const std::filesystem::path& dir) {
    if (!cfg.lindblad)
        throw invalid_input("config: missing 'lindblad' section");
    const LindbladSection& sec = *cfg.lindblad;
    const double k = generalized_K(sec.generator, sec.basis, sec.initial_state,
                                   sec.time_s, sec.time_t);
    const double c = generalized_C(sec.generator, sec.basis, sec.initial_state,
                                   sec.time_s, sec.time_t);
    csv::Table table({"s", "t", "K", "C", "difference"});
    table.add_row({csv::format(sec.time_s), csv::format(sec.time_t),
                   csv::format(k), csv::format(c), csv::format(k - c)});
    manifest.emit(dir, "lindblad_check.csv", table.content());
    std::cout << "lindblad-check: K = " << csv::format(k) << ", C = " << csv::format(c)
              << ", difference = " << csv::format(k - c) << "\n";
    if (std::abs(k - c) > tol::identity)
        throw numerical_error("generalized K = C identity violated: |K - C| = "
                              + csv::format(std::abs(k - c)));
}

} // namespace detail

/// Runs one subcommand against a config file and maps failures onto the
/// documented exit codes. Every successful run writes a manifest listing the
/// emitted files with content checksums.
inline int run(const std::string& command, const Options& opt) {
    try {
        const ExperimentConfig cfg = load_config(opt.config_path);
        const std::filesystem::path dir = detail::resolve_output_dir(cfg, opt);
        const std::uint64_t seed = (command == "montecarlo") ? cfg.montecarlo.seed : 0;
        RunManifest manifest(command, cfg.path, cfg.raw, seed);

        if (command == "simulate") detail::simulate(cfg, opt, manifest, dir);
        else if (command == "quantify") detail::quantify(cfg, opt, manifest, dir);
        else if (command == "table1") detail::table1(cfg, opt, manifest, dir);
        else if (command == "visualize") detail::visualize(cfg, opt, manifest, dir);
        else if (command == "montecarlo") detail::montecarlo(cfg, opt, manifest, dir);
        else if (command == "lindblad-check") detail::lindblad_check(cfg, opt, manifest, dir);
        else throw invalid_input("unknown command '" + command + "'");

        manifest.write(dir);
        return exit_ok;
    } catch (const invalid_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const numerical_error& e) {
        std::cerr << "numerical contract violated: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return exit_io;
    }
}

} // namespace cohwalk::cli
