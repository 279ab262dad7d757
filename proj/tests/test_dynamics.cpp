#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support.hpp"

using namespace fmhd;
using testing_support::band_limited_state;
using testing_support::max_abs;
using testing_support::rel_l2;
using testing_support::spectral;

namespace {

StateVector uniform_m(const Grid& g) {
    StateVector s(g);
    s.m(2, 0, 0, 0) = 1.0;
    return s;
}

// Copies every mode of a coarse state into a finer grid with the same box.
StateVector embed(const StateVector& coarse, const Grid& fine) {
    StateVector out(fine, coarse.time);
    const Grid& g = coarse.grid();
    auto index = [&](int k) { return std::size_t(k < 0 ? int(fine.n()) + k : k); };
    for (std::size_t i = 0; i < g.n(); ++i)
        for (std::size_t j = 0; j < g.n(); ++j)
            for (std::size_t k = 0; k < g.n(); ++k) {
                if (!g.in_dealias_mask(i, j, k)) continue;
                const std::size_t a = index(g.integer_wavenumber(i)), b = index(g.integer_wavenumber(j)),
                                  c = index(g.integer_wavenumber(k));
                for (std::size_t comp = 0; comp < 3; ++comp) {
                    out.v(comp, a, b, c) = coarse.v(comp, i, j, k);
                    out.B(comp, a, b, c) = coarse.B(comp, i, j, k);
                    out.m(comp, a, b, c) = coarse.m(comp, i, j, k);
                }
            }
    return out;
}

double state_rel_diff(const StateVector& a, const StateVector& b) {
    const double num = std::sqrt(inner(a.v - b.v, a.v - b.v) + inner(a.B - b.B, a.B - b.B) + inner(a.m - b.m, a.m - b.m));
    return num / std::max(state_norm(a), state_norm(b));
}

}  // namespace

TEST(Rhs, ZeroForRestState) {
    const Grid g(16);
    const auto s = uniform_m(g);
    const Truncation t = Truncation::full(g);
    EXPECT_EQ(max_abs(rhs_velocity(s, {}, t)), 0.0);
    EXPECT_EQ(max_abs(rhs_magnetic(s, {}, t)), 0.0);
    EXPECT_LT(max_abs(rhs_magnetisation(s, {}, t)), 1e-16);
}

TEST(Rhs, VelocitySingleMode) {
    const Grid g(16);
    auto s = uniform_m(g);
    s.v = spectral(g, [](double x, double, double) { return std::array{0.0, 0.0, std::sin(x)}; });
    PhysicalParams p;
    p.mu = 0.7;
    const auto expect = spectral(g, [](double x, double, double) { return std::array{0.0, 0.0, -0.7 * std::sin(x)}; });
    EXPECT_LT(max_abs(rhs_velocity(s, p, Truncation::full(g)) - expect), 1e-15);
}

TEST(Rhs, MagneticSingleMode) {
    const Grid g(16);
    auto s = uniform_m(g);
    s.B = spectral(g, [](double x, double, double) { return std::array{0.0, 0.0, std::sin(x)}; });
    PhysicalParams p;
    p.eta = 0.3;
    const auto expect = spectral(g, [](double x, double, double) { return std::array{0.0, 0.0, -0.3 * std::sin(x)}; });
    EXPECT_LT(max_abs(rhs_magnetic(s, p, Truncation::full(g)) - expect), 1e-15);
}

TEST(Rhs, MagnetisationUniformFields) {
    const Grid g(8);
    auto s = uniform_m(g);
    s.B(0, 0, 0, 0) = 1.0;
    const auto r = rhs_magnetisation(s, {}, Truncation::full(g));
    EXPECT_NEAR(r(0, 0, 0, 0).real(), 1.0, 1e-15);
    EXPECT_NEAR(r(1, 0, 0, 0).real(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(r(2, 0, 0, 0)), 0.0, 1e-15);
    EXPECT_LT(max_abs(rhs_magnetic(s, {}, Truncation::full(g))), 1e-15);
}

TEST(Rhs, MatchesFiniteDifferenceOracle) {
    const Grid g(32);
    const auto s = band_limited_state(g, 21, 1, 0.5, 0.3);
    PhysicalParams p{0.8, 1.3, -0.6, 0.9};
    const auto t = Truncation::full(g);
    const auto oracle = testing_support::fd::rhs(s, p);
    EXPECT_LT(rel_l2(rhs_velocity(s, p, t), oracle.v), 1e-4);
    EXPECT_LT(rel_l2(rhs_magnetic(s, p, t), oracle.B), 1e-4);
    EXPECT_LT(rel_l2(rhs_magnetisation(s, p, t), oracle.m), 1e-4);
}

TEST(Rhs, InductionMatchesIdentityExpansion) {
    const Grid g(16);
    const auto s = random_state(g, 5, 6.0, 0.5, 2);
    PhysicalParams p;
    p.eta = 0.4;
    auto expect = convective(s.B, s.v) - convective(s.v, s.B);
    expect += p.eta * laplacian(s.B);
    EXPECT_LT(rel_l2(rhs_magnetic(s, p, Truncation::full(g)), expect), 1e-11);
    EXPECT_LT(divergence_residual(rhs_magnetic(s, p, Truncation::full(g))), 1e-12);
}

TEST(Rhs, OutputsRespectTruncation) {
    const Grid g(16);
    const auto s = random_state(g, 2, 6.0, 0.3);
    const Truncation t{2.0};
    const auto r = rhs_all(s, {}, t);
    for (const auto* f : {&r.v, &r.B, &r.m})
        for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t j = 0; j < 16; ++j)
                for (std::size_t k = 0; k < 16; ++k) {
                    if (t.retains(g, i, j, k)) continue;
                    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ((*f)(c, i, j, k), cplx(0.0));
                }
}

TEST(Rhs, NonFiniteInputNamesTheTerm) {
    const Grid g(8);
    auto s = uniform_m(g);
    s.v(0, 0, 1, 0) = std::numeric_limits<double>::quiet_NaN();
    s.v(0, 0, 7, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
        (void)rhs_velocity(s, {}, Truncation::full(g));
        FAIL() << "expected NonFiniteError";
    } catch (const NonFiniteError& e) {
        EXPECT_NE(std::string(e.what()).find("term"), std::string::npos);
    }
}

TEST(Scheme, NamesRoundTrip) {
    for (auto s : {Scheme::imex_euler, Scheme::etd_rk4, Scheme::rk4_explicit}) EXPECT_EQ(parse_scheme(to_string(s)), s);
    EXPECT_THROW(parse_scheme("rk45"), Error);
    EXPECT_EQ(scheme_order(Scheme::imex_euler), 1);
    EXPECT_EQ(scheme_order(Scheme::etd_rk4), 4);
}

TEST(Scheme, TimeStepperValidation) {
    const Grid g(16);
    const PhysicalParams p;
    EXPECT_NEAR(default_time_step(g, p), 0.25 * 9.0 / 256.0, 1e-15);  // k_cut = 16/3
    EXPECT_THROW((TimeStepper{Scheme::etd_rk4, 0.0}.validate(g, p)), Error);
    EXPECT_THROW((TimeStepper{Scheme::etd_rk4, -1e-3}.validate(g, p)), Error);
    const double lim = stability_limit(g, p);
    EXPECT_NO_THROW((TimeStepper{Scheme::rk4_explicit, lim}.validate(g, p)));
    EXPECT_THROW((TimeStepper{Scheme::rk4_explicit, 1.01 * lim}.validate(g, p)), Error);
    EXPECT_NO_THROW((TimeStepper{Scheme::rk4_explicit, 10 * lim, false}.validate(g, p)));
    EXPECT_NO_THROW((TimeStepper{Scheme::etd_rk4, 10 * lim}.validate(g, p)));
}

TEST(TruncationTest, Validation) {
    const Grid g(16);
    EXPECT_THROW(Truncation{0.0}.validate(g), Error);
    EXPECT_THROW(Truncation{5.5}.validate(g), Error);
    EXPECT_NO_THROW(Truncation::full(g).validate(g));
    EXPECT_DOUBLE_EQ(Truncation::full(g).k_max, 16.0 / 3.0);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 16; ++j)
            for (std::size_t k = 0; k < 16; ++k) {
                if (!Truncation{2.0}.retains(g, i, j, k)) continue;
                EXPECT_TRUE(g.in_dealias_mask(i, j, k));
                ++kept;
            }
    EXPECT_EQ(kept, 125u);
}

TEST(Step, HeatKernelFactorWithNonlinearOff) {
    const Grid g(16);
    PhysicalParams p{0.7, 1.1, 1.0, 0.4};
    StateVector s(g);
    auto mode = [&](double a) {
        return spectral(g, [a](double x, double, double) { return std::array{0.0, 0.0, a * std::sin(x)}; });
    };
    s.v = mode(1.0);
    s.B = mode(1.0);
    s.m = mode(1.0);
    const double dt = 0.01;
    for (auto scheme : {Scheme::imex_euler, Scheme::etd_rk4}) {
        const auto out = step(s, TimeStepper{scheme, dt}, p, Truncation::full(g), ModelOptions{false, false});
        EXPECT_LT(max_abs(out.v - mode(std::exp(-p.mu * dt))), 1e-15) << to_string(scheme);
        EXPECT_LT(max_abs(out.B - mode(std::exp(-p.eta * dt))), 1e-15) << to_string(scheme);
        EXPECT_LT(max_abs(out.m - mode(std::exp(-p.chi * dt))), 1e-15) << to_string(scheme);
        EXPECT_DOUBLE_EQ(out.time, dt);
    }
}

TEST(Step, ZeroStateStaysZero) {
    const Grid g(8);
    for (auto scheme : {Scheme::imex_euler, Scheme::etd_rk4, Scheme::rk4_explicit}) {
        const auto out = step(StateVector(g), TimeStepper{scheme, 1e-3}, {}, Truncation::full(g));
        EXPECT_EQ(max_abs(out.v) + max_abs(out.B) + max_abs(out.m), 0.0);
    }
}

TEST(Step, KeepsFieldsSolenoidal) {
    const Grid g(16);
    auto s = random_state(g, 8, 6.0, 0.3);
    const Integrator integ(g, TimeStepper{Scheme::etd_rk4, default_time_step(g, {})}, {}, Truncation::full(g));
    for (int k = 0; k < 10; ++k) {
        s = integ.step(s);
        EXPECT_LT(divergence_residual(s.v), 1e-12);
        EXPECT_LT(divergence_residual(s.B), 1e-12);
    }
}

TEST(Step, FrozenMagnetisationDoesNotMove) {
    const Grid g(16);
    const auto s = random_state(g, 3, 6.0, 0.2);
    const auto out = step(s, TimeStepper{Scheme::etd_rk4, 0.005}, {}, Truncation::full(g), ModelOptions{true, true});
    EXPECT_LT(max_abs(out.m - s.m), 1e-16);
    EXPECT_GT(max_abs(out.v - s.v), 1e-6);
}

TEST(Step, SchemesAgreeOnShortInterval) {
    const Grid g(16);
    const auto s0 = random_state(g, 4, 6.0, 0.1);
    const double dt = 1e-3;
    auto advance = [&](Scheme sc) {
        auto r = simulate(s0, 0.02, TimeStepper{sc, dt}, {}, Truncation::full(g), SimulateOptions{1000, false, {}});
        return r.final_state;
    };
    const auto a = advance(Scheme::etd_rk4), b = advance(Scheme::rk4_explicit), c = advance(Scheme::imex_euler);
    EXPECT_LT(state_rel_diff(a, b), 1e-9);
    EXPECT_LT(state_rel_diff(a, c), 1e-3);
}

TEST(Simulate, EmptyIntervalRecordsInitialOnly) {
    const Grid g(8);
    const auto s0 = random_state(g, 1, 6.0, 0.1);
    const auto r = simulate(s0, 0.0, TimeStepper{Scheme::etd_rk4, 0.01}, {}, Truncation::full(g));
    EXPECT_EQ(r.diagnostics.size(), 1u);
    EXPECT_EQ(r.trajectory.advanced(), 0u);
    EXPECT_EQ(r.steps_taken, 0u);
    EXPECT_TRUE(r.final_state == s0);
    EXPECT_THROW(simulate(s0, -1.0, TimeStepper{Scheme::etd_rk4, 0.01}, {}, Truncation::full(g)), Error);
}

TEST(Simulate, RowCountAndStepLanding) {
    const Grid g(8);
    const auto s0 = random_state(g, 1, 6.0, 0.1);
    const auto r = simulate(s0, 0.1, TimeStepper{Scheme::etd_rk4, 0.0145}, {}, Truncation::full(g), SimulateOptions{3, true, {}});
    EXPECT_EQ(r.steps_taken, 7u);
    EXPECT_LE(r.dt_used, 0.0145);
    EXPECT_DOUBLE_EQ(r.final_state.time, 0.1);
    EXPECT_EQ(r.diagnostics.size(), 1u + 7u / 3u);
    EXPECT_EQ(r.trajectory.steps, (std::vector<std::size_t>{0, 3, 6}));
}

TEST(Simulate, AmplitudeZeroStaysZero) {
    const Grid g(16);
    const auto s0 = random_state(g, 1, 6.0, 0.0);
    const auto r = simulate(s0, 0.1, TimeStepper{Scheme::etd_rk4, default_time_step(g, {})}, {}, Truncation::full(g));
    EXPECT_FALSE(r.blow_up);
    for (const auto& row : r.diagnostics.rows()) {
        EXPECT_EQ(row.l2_v, 0.0);
        EXPECT_EQ(row.l2_B, 0.0);
        EXPECT_LT(row.h1_m - std::sqrt(g.volume()), 1e-12);
        EXPECT_LT(row.unit_drift_m, 1e-14);
    }
}

TEST(Simulate, BlowUpIsReportedWithPartialResults) {
    const Grid g(16);
    const auto s0 = random_state(g, 1, 6.0, 0.01);
    const double dt = 0.05;  // far above the explicit limit
    const auto r = simulate(s0, 1.0, TimeStepper{Scheme::rk4_explicit, dt, false}, {}, Truncation::full(g));
    ASSERT_TRUE(r.blow_up.has_value());
    EXPECT_LT(r.steps_taken, 20u);
    EXPECT_EQ(r.diagnostics.size(), r.steps_taken + 1);
    EXPECT_NEAR(r.blow_up->last_valid_time, dt * double(r.steps_taken), 1e-12);
    ASSERT_TRUE(r.diagnostics.blow_up_time());
    EXPECT_EQ(*r.diagnostics.blow_up_time(), r.blow_up->last_valid_time);
}

TEST(Simulate, ResolutionIndependentForBandLimitedData) {
    const Grid coarse(16), fine(32);
    const auto s0 = random_state(coarse, 6, 6.0, 1e-3);
    const TimeStepper st{Scheme::etd_rk4, default_time_step(coarse, {})};
    const Truncation t = Truncation::full(coarse);
    const SimulateOptions quiet{1000, false, {}};
    const auto a = simulate(galerkin_projection(s0, t), 0.1, st, {}, t, quiet).final_state;
    const auto b = simulate(embed(galerkin_projection(s0, t), fine), 0.1, st, {}, t, quiet).final_state;
    EXPECT_LT(state_rel_diff(embed(a, fine), b), 1e-8);
}
