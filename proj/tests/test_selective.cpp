#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>

#include "oracles.hpp"
#include "qpath/nonselective.hpp"
#include "qpath/random.hpp"
#include "qpath/selective.hpp"

using Catch::Approx;
using namespace qpath;

namespace {
const Constants kNatural;
}

TEST_CASE("step_with_outcome composes evolve and collapse") {
    const GaussianState s{0.2, -0.5, 1.1, 0.3};
    const MeterConfig meter{1.4, 0.25};
    const double xbar = 0.9;
    const GaussianState direct = step_with_outcome(s, meter, std::nullopt, xbar, kNatural);
    const GaussianState manual =
        collapse_update(free_evolve(s, meter.tau, kNatural), xbar, meter.sigma, kNatural);
    CHECK(direct.a == manual.a);
    CHECK(direct.b_mom == manual.b_mom);
    CHECK(direct.delta == manual.delta);
    CHECK(direct.eps == manual.eps);
}

TEST_CASE("feedback displacement: forced-outcome shifts") {
    // Validated against the grid oracle's displace() in the oracle suite:
    // the displacement acts as pure shifts of the packet centre.
    const GaussianState s{0.0, 0.0, 1.0, 0.0};
    const MeterConfig meter{5.0, 0.1};
    const FeedbackConfig fb{1.0};
    const double xbar = 2.0;
    const GaussianState without = step_with_outcome(s, meter, std::nullopt, xbar, kNatural);
    const GaussianState with = step_with_outcome(s, meter, fb, xbar, kNatural);
    CHECK(with.a - without.a == Approx(-0.2).epsilon(1e-14));
    CHECK(with.b_mom - without.b_mom == Approx(-0.1).epsilon(1e-14));
    CHECK(with.delta == without.delta);
    CHECK(with.eps == without.eps);
}

TEST_CASE("feedback gains tie the control constant to the measurement strength") {
    const FeedbackConfig fb{2.0};
    CHECK(fb.gamma1(kNatural) == Approx(1.0 / 8.0));
    CHECK(fb.gamma2() == Approx(0.5));
    CHECK(fb.required_diffusion(kNatural) == Approx(8.0));
    // gamma1 = hbar / D for the consistent D
    CHECK(fb.gamma1(kNatural) == Approx(kNatural.hbar / fb.required_diffusion(kNatural)));
}

TEST_CASE("weak-meter regime: a step degenerates to free evolution") {
    const GaussianState s{0.4, 0.8, 1.2, -0.2};
    const MeterConfig meter{1e12, 0.3};
    RandomStream stream = make_stream(11);
    const StepResult result = step(s, meter, std::nullopt, stream, kNatural);
    const GaussianState free_only = free_evolve(s, meter.tau, kNatural);
    CHECK(result.state.a == Approx(free_only.a).margin(1e-5));
    CHECK(result.state.b_mom == Approx(free_only.b_mom).margin(1e-9));
    CHECK(result.state.delta == Approx(free_only.delta).epsilon(1e-9));
    CHECK(outcome_pdf(free_only, meter.sigma).variance == Approx(meter.sigma / 2.0).epsilon(1e-9));
}

TEST_CASE("simulate_ensemble: determinism and record invariants") {
    const GaussianState s0{0.0, 0.0, 1.0, 0.0};
    const MeterConfig meter{2.0, 0.05};
    const auto run1 = simulate_ensemble(s0, meter, 40, 8, std::nullopt, 321, kNatural);
    const auto run2 = simulate_ensemble(s0, meter, 40, 8, std::nullopt, 321, kNatural);
    REQUIRE(run1.size() == run2.size());
    for (std::size_t i = 0; i < run1.size(); ++i) {
        REQUIRE(run1[i].outcomes.size() == 40);
        REQUIRE(run1[i].times.size() == run1[i].outcomes.size());
        REQUIRE(run1[i].states.size() == run1[i].outcomes.size());
        for (std::size_t r = 0; r < 40; ++r) {
            CHECK(run1[i].outcomes[r] == run2[i].outcomes[r]);  // bit-identical
            CHECK(run1[i].times[r] == Approx(double(r + 1) * meter.tau));
            CHECK(uncertainty_product(run1[i].states[r], kNatural) == Approx(0.25).epsilon(1e-12));
        }
    }
    const auto other_seed = simulate_ensemble(s0, meter, 40, 8, std::nullopt, 322, kNatural);
    CHECK(other_seed[0].outcomes[0] != run1[0].outcomes[0]);
    CHECK_THROWS_AS(simulate_ensemble(s0, meter, 40, 0, std::nullopt, 1, kNatural), ConfigError);
}

TEST_CASE("simulate_ensemble: worker count does not change the records") {
    const GaussianState s0{0.5, 0.0, 1.0, 0.5};
    const MeterConfig meter{1.0, 0.1};
    const auto serial = simulate_ensemble(s0, meter, 25, 12, FeedbackConfig{1.0}, 99, kNatural, 1);
    const auto threaded = simulate_ensemble(s0, meter, 25, 12, FeedbackConfig{1.0}, 99, kNatural, 4);
    for (std::size_t i = 0; i < serial.size(); ++i)
        for (std::size_t r = 0; r < serial[i].outcomes.size(); ++r)
            CHECK(serial[i].outcomes[r] == threaded[i].outcomes[r]);
}

TEST_CASE("rejects non-finite meter variance in simulation") {
    const GaussianState s0{0.0, 0.0, 1.0, 0.0};
    const MeterConfig degenerate{std::numeric_limits<double>::infinity(), 0.1};
    CHECK_THROWS_AS(simulate_ensemble(s0, degenerate, 5, 2, FeedbackConfig{1.0}, 1, kNatural),
                    ConfigError);
    CHECK_THROWS_AS(simulate_ensemble(s0, degenerate, 5, 2, std::nullopt, 1, kNatural), ConfigError);
}

TEST_CASE("width parameters reach a fixed point independent of the initial width") {
    const MeterConfig meter{4.0, 0.2};  // D = 0.8
    auto settle = [&](double delta0) {
        GaussianState s{0.0, 0.0, delta0, 0.0};
        RandomStream stream = make_stream(5);
        for (int r = 0; r < 400; ++r) s = step(s, meter, std::nullopt, stream, kNatural).state;
        return s;
    };
    const GaussianState narrow = settle(0.05);
    const GaussianState wide = settle(20.0);
    CHECK(narrow.delta == Approx(wide.delta).epsilon(1e-9));
    CHECK(narrow.eps == Approx(wide.eps).epsilon(1e-9));
    // Near the small-tau stationary point delta* = sqrt(2 hbar D / m), eps* = 1.
    CHECK(narrow.delta == Approx(std::sqrt(2.0 * 0.8)).epsilon(0.15));
    CHECK(narrow.eps == Approx(1.0).epsilon(0.15));
}

TEST_CASE("without feedback the ensemble reproduces the nonselective width law") {
    const GaussianState s0{0.0, 0.0, 1.0, 0.0};
    const double D = 1.0, t_final = 1.0;
    const std::size_t n_steps = 100, n_traj = 4000;
    const MeterConfig meter{D / (t_final / double(n_steps)), t_final / double(n_steps)};
    const EnsembleMoments moments = ensemble_moments(s0, meter, n_steps, n_traj, std::nullopt,
                                                     2024, kNatural, n_steps / 4);
    for (std::size_t k = 0; k < moments.times.size(); ++k) {
        const double expected =
            sigma_x2_of_t(s0, moments.times[k], ContinuousLimit{D}, kNatural);
        CHECK(std::abs(moments.mean_x2[k] - expected) <= 3.0 * moments.se_x2[k]);
    }
}

TEST_CASE("damped_oscillator_reference: null, closed form, decay") {
    CHECK(damped_oscillator_reference(0.0, 0.0, 1.0, 5.0) == 0.0);

    for (double t : {0.3, 1.0, 2.5}) {
        const double closed = std::exp(-t / 2.0) * (std::cos(t / 2.0) + std::sin(t / 2.0));
        CHECK(damped_oscillator_reference(1.0, 0.0, 1.0, t) == Approx(closed).epsilon(1e-12));
        CHECK(oracles::oscillator_rk4(1.0, 0.0, 1.0, t) == Approx(closed).epsilon(1e-9));
    }
    for (double t : {0.4, 1.7}) {
        CHECK(damped_oscillator_reference(0.7, -1.3, 0.8, t) ==
              Approx(oracles::oscillator_rk4(0.7, -1.3, 0.8, t)).epsilon(1e-8));
    }
    CHECK(std::abs(damped_oscillator_reference(3.0, 2.0, 0.5, 40.0)) < 1e-10);
    CHECK_THROWS_AS(damped_oscillator_reference(1.0, 0.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("with feedback the ensemble mean follows the damped oscillator") {
    const double t_c = 1.0, tau = 0.01;
    const FeedbackConfig fb{t_c};
    const double D = fb.required_diffusion(kNatural);
    const MeterConfig meter{D / tau, tau};
    const GaussianState s0{1.0, 0.0, std::sqrt(2.0 * D), 1.0};
    const std::size_t n_steps = 400;  // t up to 4 t_c
    const EnsembleMoments moments =
        ensemble_moments(s0, meter, n_steps, 3000, fb, 515151, kNatural, 50);
    const double adot0 = s0.b_mom / kNatural.mass - s0.a / t_c;
    for (std::size_t k = 0; k < moments.times.size(); ++k) {
        const double ref = damped_oscillator_reference(s0.a, adot0, t_c, moments.times[k]);
        CHECK(std::abs(moments.mean_a[k] - ref) <= 3.0 * moments.se_a[k] + 0.01);
    }
}
