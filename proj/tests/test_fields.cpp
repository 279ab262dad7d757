#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "support.hpp"

using namespace fmhd;
using testing_support::direct_dft;
using testing_support::sample;

TEST(Grid, RejectsBadSizes) {
    EXPECT_THROW(Grid(2), Error);
    EXPECT_THROW(Grid(6), Error);
    EXPECT_THROW(Grid(12), Error);
    EXPECT_THROW(Grid(16, -1.0), Error);
    EXPECT_THROW(Grid(16, 2.0, 0.0), Error);
    EXPECT_THROW(Grid(16, 2.0, 1.5), Error);
    EXPECT_NO_THROW(Grid(4));
}

TEST(Grid, WavenumberSetPerAxis) {
    const Grid g(8);
    std::vector<int> ks;
    for (std::size_t j = 0; j < 8; ++j) ks.push_back(g.integer_wavenumber(j));
    EXPECT_EQ(ks, (std::vector<int>{0, 1, 2, 3, 4, -3, -2, -1}));
    EXPECT_DOUBLE_EQ(g.derivative_wavenumber(4), 0.0);
    EXPECT_DOUBLE_EQ(g.derivative_wavenumber(5), -3.0);
    const Grid scaled(8, 4.0 * std::numbers::pi);
    EXPECT_DOUBLE_EQ(scaled.wavenumber(2), 1.0);
}

TEST(Grid, DealiasMaskCountsModes) {
    for (std::size_t n : {8u, 16u, 32u}) {
        const Grid g(n);
        const int expected = int(std::floor(2.0 / 3.0 * double(n / 2)));
        EXPECT_EQ(g.dealias_index(), expected);
        std::size_t kept = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) kept += g.in_dealias_mask(i, j, k);
        const std::size_t side = 2 * expected + 1;
        EXPECT_EQ(kept, side * side * side);
    }
    EXPECT_EQ(Grid(16, 2 * std::numbers::pi, 0.5).dealias_index(), 4);
}

TEST(Transform, ConstantFieldHasOnlyMeanMode) {
    const Grid g(8);
    const auto s = to_spectral(PhysicalField(g, 1.75));
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t q = 0; q < g.cube_size(); ++q) {
            if (q == 0)
                EXPECT_NEAR(std::abs(s.component(c)[q] - cplx(1.75, 0.0)), 0.0, 1e-15);
            else
                EXPECT_LT(std::abs(s.component(c)[q]), 1e-15);
        }
}

TEST(Transform, SineMatchesDirectDft) {
    const Grid g(8);
    const auto f = sample(g, [](double x, double, double) { return std::array{std::sin(x), 0.0, 0.0}; });
    const auto s = to_spectral(f);
    EXPECT_NEAR(std::abs(s(0, 1, 0, 0) - cplx(0.0, -0.5)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s(0, 7, 0, 0) - cplx(0.0, 0.5)), 0.0, 1e-15);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            for (std::size_t k = 0; k < 8; ++k) {
                const cplx oracle =
                    direct_dft(f, 0, g.integer_wavenumber(i), g.integer_wavenumber(j), g.integer_wavenumber(k));
                EXPECT_NEAR(std::abs(s(0, i, j, k) - oracle), 0.0, 1e-14);
            }
}

TEST(Transform, RandomFieldMatchesDirectDft) {
    const Grid g(4);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    PhysicalField f(g);
    for (auto& v : f.values()) v = u(rng);
    const auto s = to_spectral(f);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                for (std::size_t k = 0; k < 4; ++k) {
                    const cplx oracle =
                        direct_dft(f, c, g.integer_wavenumber(i), g.integer_wavenumber(j), g.integer_wavenumber(k));
                    EXPECT_NEAR(std::abs(s(c, i, j, k) - oracle), 0.0, 1e-14);
                }
    EXPECT_EQ(s.conjugate_asymmetry(), 0.0);
}

TEST(Transform, RejectsNonFiniteInput) {
    const Grid g(8);
    PhysicalField f(g);
    f.at(1, 17) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(to_spectral(f), Error);
    f.at(1, 17) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(to_spectral(f), Error);
}

TEST(Transform, InverseOfZeroAndMean) {
    const Grid g(8);
    const auto zero = to_physical(SpectralField(g));
    for (double v : zero.values()) EXPECT_EQ(v, 0.0);
    SpectralField s(g);
    s(2, 0, 0, 0) = -3.5;
    const auto p = to_physical(s);
    for (std::size_t q = 0; q < g.cube_size(); ++q) EXPECT_NEAR(p.at(2, q), -3.5, 1e-15);
}

TEST(Transform, TwoModeFieldMatchesDirectSum) {
    const Grid g(8);
    SpectralField s(g);
    // mode (1, -2, 0) and its mirror, plus a real (0, 0, 3) pair on component 1
    const cplx a(0.3, -0.7), b(1.1, 0.4);
    s(0, 1, g.n() - 2, 0) = a;
    s(0, g.n() - 1, 2, 0) = std::conj(a);
    s(1, 0, 0, 3) = b;
    s(1, 0, 0, g.n() - 3) = std::conj(b);
    const auto p = to_physical(s);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            for (std::size_t k = 0; k < 8; ++k) {
                const double x = g.coordinate(i), y = g.coordinate(j), z = g.coordinate(k);
                const double v0 = 2.0 * (a * std::polar(1.0, x - 2.0 * y)).real();
                const double v1 = 2.0 * (b * std::polar(1.0, 3.0 * z)).real();
                EXPECT_NEAR(p(0, i, j, k), v0, 1e-14);
                EXPECT_NEAR(p(1, i, j, k), v1, 1e-14);
                EXPECT_EQ(p(2, i, j, k), 0.0);
            }
}

TEST(Transform, BrokenConjugateSymmetryIsAnError) {
    const Grid g(8);
    SpectralField s(g);
    s(0, 1, 0, 0) = cplx(0.0, 1.0);  // mirror left at zero
    EXPECT_THROW(to_physical(s), Error);
}

TEST(Transform, RoundTripsBothOrders) {
    const Grid g(16);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    PhysicalField f(g);
    for (auto& v : f.values()) v = nd(rng);
    const auto back = to_physical(to_spectral(f));
    double scale = 0.0;
    for (double v : f.values()) scale = std::max(scale, std::abs(v));
    EXPECT_LT(testing_support::max_abs_diff(back, f) / scale, 1e-13);

    const auto s = random_field(g, rng, 1.0, 1.0);
    EXPECT_LT(testing_support::rel_l2(to_spectral(to_physical(s)), s), 1e-13);
}

TEST(Transform, Parseval) {
    const Grid g(16, 3.0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    PhysicalField f(g);
    for (auto& v : f.values()) v = nd(rng);
    double mean_sq = 0.0;
    for (double v : f.values()) mean_sq += v * v;
    mean_sq /= double(g.cube_size());
    const auto s = to_spectral(f);
    double coeff_sq = 0.0;
    for (const auto& c : s.coeffs()) coeff_sq += std::norm(c);
    EXPECT_NEAR(coeff_sq / mean_sq, 1.0, 1e-12);
    EXPECT_NEAR(inner(s, s) / (mean_sq * g.volume()), 1.0, 1e-12);
}

TEST(RandomState, ZeroAmplitude) {
    const Grid g(16);
    const auto s = random_state(g, 9, 6.0, 0.0);
    EXPECT_EQ(l2_norm(s.v), 0.0);
    EXPECT_EQ(l2_norm(s.B), 0.0);
    const auto m = to_physical(s.m);
    for (std::size_t q = 0; q < g.cube_size(); ++q) {
        EXPECT_NEAR(m.at(0, q), 0.0, 1e-15);
        EXPECT_NEAR(m.at(1, q), 0.0, 1e-15);
        EXPECT_NEAR(m.at(2, q), 1.0, 1e-15);
    }
}

TEST(RandomState, AdmissibleForManySeeds) {
    const Grid g(16);
    for (std::uint64_t seed : {1u, 2u, 3u, 42u, 1000u}) {
        const auto s = random_state(g, seed, 6.0, 0.3);
        EXPECT_LT(divergence_residual(s.v), 1e-13);
        EXPECT_LT(divergence_residual(s.B), 1e-13);
        EXPECT_LT(unit_drift(s.m), 1e-13);
        EXPECT_LT(s.v.conjugate_asymmetry(), 1e-15);
        EXPECT_GT(l2_norm(s.v), 0.0);
    }
}

TEST(RandomState, DeterministicAndSeedDependent) {
    const Grid g(16);
    EXPECT_TRUE(random_state(g, 7) == random_state(g, 7));
    EXPECT_FALSE(random_state(g, 7) == random_state(g, 8));
}

TEST(RandomState, AmplitudeIsRms) {
    const Grid g(16);
    const auto s = random_state(g, 4, 6.0, 0.25);
    EXPECT_NEAR(l2_norm(s.v) / std::sqrt(g.volume()), 0.25, 1e-14);
    EXPECT_NEAR(l2_norm(s.B) / std::sqrt(g.volume()), 0.25, 1e-14);
}

TEST(RandomState, RejectsRoughSpectrum) {
    EXPECT_THROW(random_state(Grid(8), 1, 3.0), Error);
}

TEST(Checkpoint, RoundTripIsExact) {
    const Grid g(8, 3.0);
    auto s = random_state(g, 12, 6.0, 0.2);
    s.time = 0.123456789;
    const auto path = std::filesystem::temp_directory_path() / "fmhd_test_checkpoint.fmhd";
    write_checkpoint(path, s);
    EXPECT_EQ(std::filesystem::file_size(path), 28u + 3u * 3u * 512u * 16u);
    const auto back = read_checkpoint(path);
    EXPECT_TRUE(back == s);
    EXPECT_EQ(back.grid().box_length(), 3.0);
    std::filesystem::remove(path);
}

TEST(Checkpoint, HeaderLayout) {
    const Grid g(4);
    StateVector s(g, 2.0);
    const auto bytes = encode_checkpoint(s);
    ASSERT_EQ(bytes.size(), 28u + 3u * 3u * 64u * 16u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FMHD");
    EXPECT_EQ(bytes[4], 1);  // version, little-endian
    EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
    EXPECT_EQ(bytes[8], 4);  // n
    // time = 2.0 is 0x4000000000000000, stored after the f64 box length
    EXPECT_EQ(bytes[27], 0x40);
    for (int b = 20; b < 27; ++b) EXPECT_EQ(bytes[b], 0);
}

TEST(Checkpoint, RejectsCorruptInput) {
    const Grid g(4);
    auto bytes = encode_checkpoint(StateVector(g));
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(decode_checkpoint(bad), Error);
    bad = bytes;
    bad.pop_back();
    EXPECT_THROW(decode_checkpoint(bad), Error);
    bad = bytes;
    bad[4] = 9;
    EXPECT_THROW(decode_checkpoint(bad), Error);
}
