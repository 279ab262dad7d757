#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include "fmhd/calculus.hpp"
#include "fmhd/field.hpp"
#include "fmhd/transform.hpp"

namespace fmhd {

/// Random real vector field with spectrum ~ (1 + |k|)^-decay_exponent inside
/// the dealias mask (and |k_i| <= band_limit when given), scaled so that its
/// root-mean-square value equals `rms`. The mean mode is left at zero.
inline SpectralField random_field(const Grid& grid, std::mt19937_64& rng, double decay_exponent, double rms,
                                  std::optional<int> band_limit = std::nullopt) {
    SpectralField f(grid);
    if (rms == 0.0) return f;
    const std::size_t n = grid.n();
    const int limit = band_limit ? std::min(*band_limit, grid.dealias_index()) : grid.dealias_index();
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                const int a = grid.integer_wavenumber(i), b = grid.integer_wavenumber(j),
                          c = grid.integer_wavenumber(k);
                if (std::abs(a) > limit || std::abs(b) > limit || std::abs(c) > limit) continue;
                if (a == 0 && b == 0 && c == 0) continue;
                const std::size_t q = grid.flat(i, j, k);
                const std::size_t qm = grid.flat(grid.mirror(i), grid.mirror(j), grid.mirror(k));
                if (qm < q) continue;  // filled as the mirror of an earlier mode
                const double kmag = grid.wavenumber_scale() * std::sqrt(double(a * a + b * b + c * c));
                const double weight = std::pow(1.0 + kmag, -decay_exponent);
                for (std::size_t comp = 0; comp < 3; ++comp) {
                    const double re = normal(rng), im = normal(rng);
                    auto data = f.component(comp);
                    if (qm == q) {
                        data[q] = cplx(weight * re, 0.0);
                    } else {
                        data[q] = weight * cplx(re, im);
                        data[qm] = std::conj(data[q]);
                    }
                }
            }
    const double current = l2_norm(f) / std::sqrt(grid.volume());
    if (current > 0.0) f *= rms / current;
    return f;
}

/// Smooth admissible initial data: divergence-free v and B, and a unit-length
/// magnetisation obtained by normalising e_z plus a random perturbation at
/// every collocation point. Reproducible from `seed`.
inline StateVector random_state(const Grid& grid, std::uint64_t seed, double decay_exponent = 6.0,
                                double amplitude = 0.1, std::optional<int> band_limit = std::nullopt) {
    if (!(decay_exponent >= 4.0)) throw Error("random_state: decay_exponent must be >= 4");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw Error("random_state: amplitude must be >= 0");
    std::mt19937_64 rng(seed);
    StateVector s(grid, 0.0);

    s.v = leray_project(random_field(grid, rng, decay_exponent, 1.0, band_limit));
    s.B = leray_project(random_field(grid, rng, decay_exponent, 1.0, band_limit));
    for (auto* f : {&s.v, &s.B}) {
        const double rms = l2_norm(*f) / std::sqrt(grid.volume());
        if (rms > 0.0) *f *= amplitude / rms;
    }

    const auto perturbation = detail::to_physical_fast(random_field(grid, rng, decay_exponent, amplitude, band_limit));
    PhysicalField m(grid);
    const std::size_t size = grid.cube_size();
    for (std::size_t q = 0; q < size; ++q) {
        const double x = perturbation.at(0, q), y = perturbation.at(1, q), z = 1.0 + perturbation.at(2, q);
        const double len = std::sqrt(x * x + y * y + z * z);
        if (!(len > 0.0)) throw Error("random_state: perturbation cancelled the magnetisation");
        m.at(0, q) = x / len;
        m.at(1, q) = y / len;
        m.at(2, q) = z / len;
    }
    s.m = to_spectral(m);
    return s;
}

}  // namespace fmhd
