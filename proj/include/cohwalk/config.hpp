#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cohwalk/lindblad.hpp"
#include "cohwalk/montecarlo.hpp"
#include "cohwalk/walk.hpp"

namespace cohwalk {

/// A Lindblad generator task: either explicit matrices or the embedding of
/// the config's walk (one step per unit time), plus measurement times.
struct LindbladSection {
    bool from_walk = false;
    LindbladGenerator generator;
    ObservableBasis basis;
    DiagonalInitialState initial_state;
    double time_s = 0.0;
    double time_t = 0.0;
};

struct OutputSection {
    std::string directory;  // empty: fall back to env / cwd
    bool csv = true;
    bool svg = false;
};

/// Parsed experiment configuration file (JSON).
struct ExperimentConfig {
    WalkConfig walk;
    LossModel loss;
    PerturbationSpec montecarlo;
    std::optional<LindbladSection> lindblad;
    OutputSection output;
    std::string raw;  // file bytes, for the manifest hash
    std::string path;
};

namespace detail {

using nlohmann::json;

template <typename T>
T field(const json& section, const std::string& section_name, const std::string& key) {
    if (!section.contains(key))
        throw invalid_input("config: section '" + section_name + "' is missing field '"
                            + key + "'");
    try {
        return section.at(key).get<T>();
    } catch (const json::exception& e) {
        throw invalid_input("config: field '" + section_name + "." + key + "': " + e.what());
    }
}

template <typename T>
T field_or(const json& section, const std::string& section_name, const std::string& key,
           T fallback) {
    if (!section.contains(key)) return fallback;
    return field<T>(section, section_name, key);
}

/// Dense complex matrix as nested arrays of [re, im] pairs.
inline Matrix parse_complex_matrix(const json& rows, const std::string& what) {
    if (!rows.is_array() || rows.empty())
        throw invalid_input("config: '" + what + "' must be a nonempty array of rows");
    const Eigen::Index nrows = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index ncols = static_cast<Eigen::Index>(rows.front().size());
    Matrix m(nrows, ncols);
    for (Eigen::Index i = 0; i < nrows; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != ncols)
            throw invalid_input("config: '" + what + "' row " + std::to_string(i)
                                + " has inconsistent length");
        for (Eigen::Index j = 0; j < ncols; ++j) {
            const auto& cell = row.at(static_cast<std::size_t>(j));
            if (!cell.is_array() || cell.size() != 2)
                throw invalid_input("config: '" + what + "' entry (" + std::to_string(i)
                                    + "," + std::to_string(j) + ") must be a [re, im] pair");
            m(i, j) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
        }
    }
    return m;
}

inline WalkConfig parse_walk(const json& doc) {
    if (!doc.contains("walk"))
        throw invalid_input("config: missing 'walk' section");
    const json& w = doc.at("walk");

    const double theta = field<double>(w, "walk", "theta_deg");
    const int n = field<int>(w, "walk", "N");
    const int m = field<int>(w, "walk", "M");
    const int x0 = field_or<int>(w, "walk", "x0", 0);

    if (!w.contains("initial"))
        throw invalid_input("config: section 'walk' is missing field 'initial' "
                            "(\"H\", \"V\", or a number p)");
    const json& init = w.at("initial");
    double p = 0.0;
    if (init.is_string()) {
        const std::string s = init.get<std::string>();
        if (s == "H") p = 1.0;
        else if (s == "V") p = 0.0;
        else throw invalid_input("config: walk.initial string must be \"H\" or \"V\", got \""
                                 + s + "\"");
    } else if (init.is_number()) {
        p = init.get<double>();
    } else {
        throw invalid_input("config: walk.initial must be \"H\", \"V\", or a number p");
    }
    return make_walk_config(theta, n, m, x0, p);
}

inline LindbladSection parse_lindblad(const json& sec, const WalkConfig& walk) {
    LindbladSection out;
    if (field_or<bool>(sec, "lindblad", "from_walk", false)) {
        out.from_walk = true;
        if (walk.num_steps > 8)
            throw invalid_input("config: lindblad.from_walk needs walk.N <= 8 "
                                "(the superoperator grows as (2(2N+1))^2)");
        const Matrix u = step_unitary_cyclic(walk.theta_deg, walk.bounds);
        out.generator = LindbladGenerator{hamiltonian_from_unitary(u), {}, {}};
        out.basis.labels.reserve(static_cast<std::size_t>(walk.bounds.dim()));
        for (Eigen::Index i = 0; i < walk.bounds.dim(); ++i)
            out.basis.labels.push_back(to_string(mode_at(i, walk.bounds)));
        RealVector pops = RealVector::Zero(walk.bounds.dim());
        pops[mode_index({walk.initial_position, Coin::H}, walk.bounds)] = walk.initial_h_weight;
        pops[mode_index({walk.initial_position, Coin::V}, walk.bounds)] =
            1.0 - walk.initial_h_weight;
        out.initial_state = DiagonalInitialState{std::move(pops)};
        out.time_s = walk.intermediate_step;
        out.time_t = walk.num_steps;
        return out;
    }

    out.generator.hamiltonian =
        parse_complex_matrix(sec.at("hamiltonian"), "lindblad.hamiltonian");
    if (sec.contains("jump_operators")) {
        const auto& jumps = sec.at("jump_operators");
        for (std::size_t j = 0; j < jumps.size(); ++j)
            out.generator.jump_ops.push_back(
                parse_complex_matrix(jumps.at(j), "lindblad.jump_operators[" + std::to_string(j) + "]"));
        out.generator.rates = field<std::vector<double>>(sec, "lindblad", "rates");
    }
    validate(out.generator);

    const Eigen::Index d = out.generator.dim();
    if (sec.contains("labels")) {
        out.basis.labels = field<std::vector<std::string>>(sec, "lindblad", "labels");
        if (out.basis.dim() != d)
            throw invalid_input("config: lindblad.labels count does not match the generator dimension");
    } else {
        out.basis = computational_basis(d);
    }
    validate(out.basis);

    const auto pops = field<std::vector<double>>(sec, "lindblad", "initial_populations");
    if (static_cast<Eigen::Index>(pops.size()) != d)
        throw invalid_input("config: lindblad.initial_populations count does not match dimension");
    out.initial_state.populations = Eigen::Map<const RealVector>(pops.data(),
                                                                 static_cast<Eigen::Index>(pops.size()));
    validate(out.initial_state);

    out.time_s = field<double>(sec, "lindblad", "s");
    out.time_t = field<double>(sec, "lindblad", "t");
    if (out.time_s < 0.0 || out.time_s > out.time_t)
        throw invalid_input("config: lindblad times must satisfy 0 <= s <= t");
    return out;
}

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text, const std::string& path = "") {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw invalid_input("config: " + std::string(e.what()));
    }

    ExperimentConfig cfg;
    cfg.raw = text;
    cfg.path = path;
    cfg.walk = detail::parse_walk(doc);

    if (doc.contains("loss")) {
        const json& l = doc.at("loss");
        cfg.loss.eta_h = detail::field_or<double>(l, "loss", "eta_H", 1.0);
        cfg.loss.eta_v = detail::field_or<double>(l, "loss", "eta_V", 1.0);
        cfg.loss.residual_transmission =
            detail::field_or<double>(l, "loss", "residual_transmission", 0.0);
        validate(cfg.loss);
    }
    if (doc.contains("montecarlo")) {
        const json& m = doc.at("montecarlo");
        cfg.montecarlo.theta_jitter_deg =
            detail::field_or<double>(m, "montecarlo", "theta_jitter", 0.5);
        cfg.montecarlo.coupling_jitter =
            detail::field_or<double>(m, "montecarlo", "coupling_jitter", 0.02);
        cfg.montecarlo.extinction_jitter =
            detail::field_or<double>(m, "montecarlo", "extinction_jitter", 0.02);
        cfg.montecarlo.samples = detail::field_or<int>(m, "montecarlo", "samples", 1000);
        cfg.montecarlo.seed = detail::field_or<std::uint64_t>(m, "montecarlo", "seed", 1);
        validate(cfg.montecarlo);
    }
    if (doc.contains("lindblad"))
        cfg.lindblad = detail::parse_lindblad(doc.at("lindblad"), cfg.walk);

    if (doc.contains("output")) {
        const nlohmann::json& o = doc.at("output");
        cfg.output.directory = detail::field_or<std::string>(o, "output", "directory", "");
        if (o.contains("formats")) {
            cfg.output.csv = false;
            cfg.output.svg = false;
            for (const auto& f : o.at("formats")) {
                const std::string fmt = f.get<std::string>();
                if (fmt == "csv") cfg.output.csv = true;
                else if (fmt == "svg") cfg.output.svg = true;
                else throw invalid_input("config: unknown output format '" + fmt + "'");
            }
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw invalid_input("config: cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

} // namespace cohwalk
