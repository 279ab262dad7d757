#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "fmhd/fft.hpp"
#include "fmhd/field.hpp"

namespace fmhd {

/// Forward transform to Fourier-series coefficients (divides by n^3, so the
/// k = 0 mode carries the mean). The result is exactly conjugate symmetric.
template <std::size_t C>
SpectralFieldT<C> to_spectral(const PhysicalFieldT<C>& f) {
    if (!f.all_finite()) throw Error("to_spectral: physical field contains non-finite values");
    SpectralFieldT<C> out(f.grid());
    std::size_t c = 0;
    for (; c + 1 < C; c += 2)
        detail::forward_pair(f.grid(), f.component(c), f.component(c + 1), out.component(c), out.component(c + 1));
    if (c < C) detail::forward_pair(f.grid(), f.component(c), {}, out.component(c), {});
    return out;
}

/// Inverse transform. An imaginary residue above 1e-12 of the field's
/// magnitude means the coefficients are not conjugate symmetric.
template <std::size_t C>
PhysicalFieldT<C> to_physical(const SpectralFieldT<C>& f) {
    const Grid& grid = f.grid();
    PhysicalFieldT<C> out(grid);
    auto& plan = detail::plan_for(grid.n());
    auto buf = plan.buffer();
    for (std::size_t c = 0; c < C; ++c) {
        auto src = f.component(c);
        std::copy(src.begin(), src.end(), buf.begin());
        plan.backward();
        double scale = 0.0, residue = 0.0;
        auto dst = out.component(c);
        for (std::size_t q = 0; q < plan.size(); ++q) {
            dst[q] = buf[q].real();
            scale = std::max(scale, std::abs(buf[q].real()));
            residue = std::max(residue, std::abs(buf[q].imag()));
        }
        if (!(residue <= 1e-12 * scale) && residue > 0.0)
            throw Error("to_physical: broken conjugate symmetry (imaginary residue " + std::to_string(residue) +
                        "), spectral state is corrupted");
    }
    return out;
}

namespace detail {

/// Batched inverse transforms, two spectra per complex FFT. Assumes every
/// input is conjugate symmetric (produced by this library).
inline void inverse_batch(const Grid& grid, std::span<const std::pair<std::span<const cplx>, std::span<double>>> jobs) {
    std::size_t j = 0;
    for (; j + 1 < jobs.size(); j += 2)
        inverse_pair(grid, jobs[j].first, jobs[j + 1].first, jobs[j].second, jobs[j + 1].second);
    if (j < jobs.size()) inverse_pair(grid, jobs[j].first, {}, jobs[j].second, {});
}

inline void forward_batch(const Grid& grid, std::span<const std::pair<std::span<const double>, std::span<cplx>>> jobs) {
    std::size_t j = 0;
    for (; j + 1 < jobs.size(); j += 2)
        forward_pair(grid, jobs[j].first, jobs[j + 1].first, jobs[j].second, jobs[j + 1].second);
    if (j < jobs.size()) forward_pair(grid, jobs[j].first, {}, jobs[j].second, {});
}

/// Unchecked inverse transform used inside the hot loops.
template <std::size_t C>
PhysicalFieldT<C> to_physical_fast(const SpectralFieldT<C>& f) {
    PhysicalFieldT<C> out(f.grid());
    std::vector<std::pair<std::span<const cplx>, std::span<double>>> jobs;
    for (std::size_t c = 0; c < C; ++c) jobs.emplace_back(f.component(c), out.component(c));
    inverse_batch(f.grid(), jobs);
    return out;
}

template <std::size_t C>
SpectralFieldT<C> to_spectral_fast(const PhysicalFieldT<C>& f) {
    SpectralFieldT<C> out(f.grid());
    std::vector<std::pair<std::span<const double>, std::span<cplx>>> jobs;
    for (std::size_t c = 0; c < C; ++c) jobs.emplace_back(f.component(c), out.component(c));
    forward_batch(f.grid(), jobs);
    return out;
}

}  // namespace detail
}  // namespace fmhd
