#include <catch2/catch.hpp>

#include <cstring>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "cohwalk/montecarlo.hpp"

using namespace cohwalk;

namespace {

/// Independent dense oracle: builds D * S * (1 (X) C) from scratch and
/// propagates the raw non-unitary matrix.
ProbabilityDistribution lossy_oracle(double theta_deg, const WalkConfig& cfg,
                                     double eta_h, double eta_v, int steps) {
    const int sites = cfg.bounds.sites();
    const Eigen::Index dim = cfg.bounds.dim();
    const double theta = theta_deg * std::numbers::pi / 180.0;
    Eigen::Matrix2cd coin;
    coin << std::cos(theta), std::sin(theta), std::sin(theta), -std::cos(theta);
    const Matrix cfull = Eigen::kroneckerProduct(Matrix::Identity(sites, sites), coin);
    Matrix shift = Matrix::Zero(dim, dim);
    for (int x = 0; x < sites; ++x) {
        if (x + 1 < sites) shift(2 * (x + 1), 2 * x) = 1.0;
        if (x - 1 >= 0) shift(2 * (x - 1) + 1, 2 * x + 1) = 1.0;
    }
    Matrix d = Matrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        d(i, i) = (i % 2 == 0) ? std::sqrt(eta_h) : std::sqrt(eta_v);
    const Matrix a = d * shift * cfull;

    Vector psi = Vector::Zero(dim);
    psi[mode_index({cfg.initial_position, cfg.initial_h_weight == 1.0 ? Coin::H : Coin::V},
                   cfg.bounds)] = 1.0;
    for (int k = 0; k < steps; ++k) psi = a * psi;
    RealVector inten = psi.cwiseAbs2();
    inten /= inten.sum();
    return make_distribution(cfg.bounds, inten);
}

} // namespace

TEST_CASE("lossy one-time distributions", "[montecarlo]") {
    SECTION("homogeneous loss cancels exactly under normalization") {
        const auto cfg = make_walk_config(38.0, 8, 3, 0, 0.3);
        const auto lossless = lossy_one_time_distribution(cfg, LossModel{}, 8);
        for (double common : {0.9, 0.5}) {
            const auto lossy =
                lossy_one_time_distribution(cfg, LossModel{common, common, 0.0}, 8);
            CHECK((lossy.probs - lossless.probs).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SECTION("killing one arm leaves the ballistic branch") {
        const auto cfg = make_walk_config(45.0, 2, 1, 0, 1.0);
        const auto dist = lossy_one_time_distribution(cfg, LossModel{1.0, 1e-12, 0.0}, 1);
        CHECK(dist.at({1, Coin::H}) == Approx(1.0).margin(1e-9));
    }
    SECTION("inhomogeneous arm loss matches the dense matrix oracle") {
        const auto cfg = make_walk_config(45.0, 4, 2, 0, 0.0);
        const auto got = lossy_one_time_distribution(cfg, LossModel{0.98, 1.0, 0.0}, 4);
        const auto expected = lossy_oracle(45.0, cfg, 0.98, 1.0, 4);
        CHECK((got.probs - expected.probs).cwiseAbs().maxCoeff() < 1e-12);
        // frozen oracle values
        CHECK(got.at({-2, Coin::V}) == Approx(0.568095737214669).margin(1e-12));
        CHECK(got.at({4, Coin::H}) == Approx(0.059409684788950).margin(1e-12));
        CHECK(got.at({-4, Coin::V}) == Approx(0.064409947530008).margin(1e-12));
    }
    SECTION("degenerate surviving intensity is an error") {
        const auto cfg = make_walk_config(45.0, 20, 10, 0, 0.0);
        REQUIRE_THROWS_AS(lossy_one_time_distribution(cfg, LossModel{1e-12, 1e-12, 0.0}, 20),
                          numerical_error);
    }
    SECTION("loss model field ranges are enforced") {
        REQUIRE_THROWS_AS(validate(LossModel{0.0, 1.0, 0.0}), invalid_input);
        REQUIRE_THROWS_AS(validate(LossModel{1.0, 1.1, 0.0}), invalid_input);
        REQUIRE_THROWS_AS(validate(LossModel{1.0, 1.0, -0.1}), invalid_input);
    }
}

TEST_CASE("imperfect conditional distributions", "[montecarlo]") {
    const auto cfg = make_walk_config(23.0, 20, 10, 0, 0.0);

    SECTION("perfect extinction reproduces the projective conditional") {
        const auto at_m = one_time_distribution(cfg, 10);
        for (Eigen::Index y = 0; y < at_m.probs.size(); ++y) {
            if (at_m.probs[y] < 1e-3) continue;
            const Mode mode = mode_at(y, cfg.bounds);
            const auto imperfect =
                imperfect_conditional_distribution(cfg, LossModel{}, mode.position, mode.coin);
            const auto exact = conditional_distribution(cfg, mode.position, mode.coin);
            CHECK((imperfect.probs - exact.probs).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SECTION("conditioning on an empty mode requires residual light") {
        const auto ballistic = make_walk_config(0.0, 6, 2, 0, 1.0);
        REQUIRE_THROWS_AS(
            imperfect_conditional_distribution(ballistic, LossModel{}, 0, Coin::V),
            invalid_input);
        CHECK_NOTHROW(imperfect_conditional_distribution(ballistic, LossModel{1, 1, 0.02},
                                                         0, Coin::V));
    }
    SECTION("residual transmission shifts K toward the randomizing value") {
        const double ideal = kolmogorov_K(cfg);
        const double shifted = perturbed_kolmogorov_K(cfg, LossModel{1, 1, 0.02});
        const double randomizing = randomizing_K(cfg);
        CHECK(ideal < shifted);
        CHECK(shifted < randomizing);
    }
    SECTION("zero loss recovers the ideal quantifiers bit for bit") {
        CHECK(perturbed_kolmogorov_K(cfg, LossModel{}) == kolmogorov_K(cfg));
        CHECK(perturbed_coherence_C(cfg, LossModel{}) == coherence_C_prob(cfg));
    }
    SECTION("residual transmission never enters C") {
        CHECK(perturbed_coherence_C(cfg, LossModel{1, 1, 0.3})
              == perturbed_coherence_C(cfg, LossModel{1, 1, 0.0}));
    }
}

TEST_CASE("quantifier sampling", "[montecarlo]") {
    const auto cfg = make_walk_config(11.0, 20, 10, 0, 0.0);

    SECTION("no jitter means no spread and the ideal means") {
        PerturbationSpec spec;
        spec.theta_jitter_deg = 0.0;
        spec.coupling_jitter = 0.0;
        spec.extinction_jitter = 0.0;
        spec.samples = 7;
        const auto bars = sample_quantifiers(cfg, spec);
        CHECK(bars.std_k == 0.0);
        CHECK(bars.std_c == 0.0);
        CHECK(bars.mean_k == kolmogorov_K(cfg));
        CHECK(bars.mean_c == coherence_C_prob(cfg));
        REQUIRE(bars.records.size() == 7);
    }
    SECTION("identical seeds reproduce identical samples") {
        PerturbationSpec spec;
        spec.samples = 40;
        spec.seed = 991;
        const auto a = sample_quantifiers(cfg, spec, LossModel{1, 1, 0.02});
        const auto b = sample_quantifiers(cfg, spec, LossModel{1, 1, 0.02});
        REQUIRE(a.records.size() == b.records.size());
        CHECK(std::memcmp(a.records.data(), b.records.data(),
                          a.records.size() * sizeof(SampleRecord)) == 0);
        CHECK(a.mean_k == b.mean_k);
        CHECK(a.std_k == b.std_k);

        spec.seed = 992;
        const auto c = sample_quantifiers(cfg, spec, LossModel{1, 1, 0.02});
        CHECK(c.mean_k != a.mean_k);
    }
    SECTION("drawn parameters stay within their declared ranges") {
        PerturbationSpec spec;
        spec.samples = 60;
        spec.seed = 4;
        const auto bars = sample_quantifiers(cfg, spec, LossModel{1, 1, 0.02});
        for (const auto& rec : bars.records) {
            CHECK(std::abs(rec.theta_deg - 11.0) <= 0.5 + 1e-12);
            CHECK(rec.eta_h <= 1.0);
            CHECK(rec.eta_v <= 1.0);
            CHECK(rec.eta_h >= 0.98 / 1.02 - 1e-12);
            CHECK(rec.epsilon == Approx(0.02).epsilon(0.021));
            CHECK(rec.k_value >= 0.0);
            CHECK(rec.c_value >= 0.0);
        }
    }
    SECTION("spec validation") {
        PerturbationSpec bad;
        bad.samples = 0;
        REQUIRE_THROWS_AS(validate(bad), invalid_input);
        bad.samples = 10;
        bad.coupling_jitter = -0.1;
        REQUIRE_THROWS_AS(validate(bad), invalid_input);
    }
}
