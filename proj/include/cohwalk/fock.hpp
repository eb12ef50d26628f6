#pragma once

#include <vector>

#include "cohwalk/walk.hpp"

namespace cohwalk {

/// Single-photon amplitudes A_i(N) over the 2(N+1) parity-allowed modes
/// after N steps from position 0.
struct AmplitudeProfile {
    std::vector<Mode> modes;  // position-major, H before V
    Vector amplitudes;
};

/// Second-quantized single-photon walk: U^N applied to a photon created in
/// (0, initial_coin). The amplitudes coincide with the first-quantized
/// pure-state evolution restricted to the parity-allowed modes.
inline AmplitudeProfile single_photon_amplitudes(double theta_deg, int num_steps,
                                                 Coin initial_coin = Coin::H) {
    if (num_steps < 0)
        throw invalid_input("single_photon_amplitudes: negative step count");
    const LatticeBounds bounds{-num_steps, num_steps};
    Vector psi = basis_state({0, initial_coin}, bounds).amplitudes;
    if (num_steps > 0) {
        const Matrix u = step_unitary(theta_deg, bounds);
        psi = detail::apply_steps(u, std::move(psi), num_steps);
    }

    AmplitudeProfile profile;
    profile.modes.reserve(2 * (num_steps + 1));
    profile.amplitudes.resize(2 * (num_steps + 1));
    Eigen::Index k = 0;
    for (int x = -num_steps; x <= num_steps; x += 2) {
        for (Coin c : {Coin::H, Coin::V}) {
            profile.modes.push_back({x, c});
            profile.amplitudes[k++] = psi[mode_index({x, c}, bounds)];
        }
    }
    const double norm = profile.amplitudes.squaredNorm();
    if (std::abs(norm - 1.0) > tol::norm_one)
        throw numerical_error("amplitude profile norm deviates from 1 by "
                              + std::to_string(std::abs(norm - 1.0)));
    return profile;
}

/// Fock amplitudes of two indistinguishable photons evolved from the same
/// initial mode: entry (i, j) with i < j holds the |1_i, 1_j> amplitude
/// sqrt(2) A_i A_j, entry (i, i) the |2_i> amplitude A_i^2; zero below the
/// diagonal. The squared entries sum to 1.
inline Matrix two_photon_amplitudes(const AmplitudeProfile& profile) {
    const Eigen::Index n = profile.amplitudes.size();
    Matrix amps = Matrix::Zero(n, n);
    const double sqrt2 = std::sqrt(2.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        amps(i, i) = profile.amplitudes[i] * profile.amplitudes[i];
        for (Eigen::Index j = i + 1; j < n; ++j)
            amps(i, j) = sqrt2 * profile.amplitudes[i] * profile.amplitudes[j];
    }
    return amps;
}

/// Fraction of detection events at each mode for the evolved two-photon
/// state: half the mean photon number, summed from the |1_m, 1_j> and |2_m>
/// contributions. Equals |A_m(N)|^2 mode by mode.
inline RealVector two_photon_distribution(double theta_deg, int num_steps,
                                          Coin initial_coin = Coin::H) {
    if (num_steps > 8)
        throw invalid_input("two_photon_distribution: N=" + std::to_string(num_steps)
                            + " exceeds the supported range (N <= 8)");
    const AmplitudeProfile profile =
        single_photon_amplitudes(theta_deg, num_steps, initial_coin);
    const Matrix amps = two_photon_amplitudes(profile);
    const Eigen::Index n = amps.rows();

    RealVector events = RealVector::Zero(n);
    for (Eigen::Index m = 0; m < n; ++m) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == m) continue;
            const Complex pair = (j > m) ? amps(m, j) : amps(j, m);
            sum += std::norm(pair);               // one of two photons at m
        }
        sum += 2.0 * std::norm(amps(m, m));       // both photons at m
        events[m] = 0.5 * sum;
    }
    return events;
}

/// Per-mode weight of a one-photon detection event for a coherent input
/// |alpha>: exp(-|alpha|^2) |alpha|^2 |A_m(N)|^2. The mode dependence is the
/// single-photon distribution times an alpha-only prefactor.
inline RealVector coherent_state_distribution(Complex alpha, double theta_deg,
                                              int num_steps, Coin initial_coin = Coin::H) {
    const AmplitudeProfile profile =
        single_photon_amplitudes(theta_deg, num_steps, initial_coin);
    const double mean_photons = std::norm(alpha);
    return std::exp(-mean_photons) * mean_photons * profile.amplitudes.cwiseAbs2();
}

} // namespace cohwalk
