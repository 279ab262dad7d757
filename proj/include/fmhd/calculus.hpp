#pragma once

// Spectral differential operators and pointwise algebra on periodic fields.
// Derivatives use i*k with the Nyquist wavenumber zeroed; the Laplacian uses
// the full -|k|^2 symbol.

#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "fmhd/field.hpp"
#include "fmhd/transform.hpp"

namespace fmhd {

namespace detail {

/// Calls fn(q, kx, ky, kz, k2) for every mode, where k* are derivative
/// wavenumbers and k2 is the full |k|^2.
template <class Fn>
void for_each_mode(const Grid& grid, Fn&& fn) {
    const std::size_t n = grid.n();
    std::vector<double> kd(n), kf(n);
    for (std::size_t j = 0; j < n; ++j) {
        kd[j] = grid.derivative_wavenumber(j);
        kf[j] = grid.wavenumber(j);
    }
    std::size_t q = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k, ++q)
                fn(q, kd[i], kd[j], kd[k], kf[i] * kf[i] + kf[j] * kf[j] + kf[k] * kf[k]);
}

inline constexpr cplx I{0.0, 1.0};

}  // namespace detail

/// Zeroes every mode outside the grid's dealias mask.
template <std::size_t C>
void apply_dealias(SpectralFieldT<C>& f) {
    const Grid& g = f.grid();
    const std::size_t n = g.n();
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k)
                    if (!g.in_dealias_mask(i, j, k)) f(c, i, j, k) = 0.0;
}

/// Spectral partial derivative of one component along `axis`.
template <std::size_t C>
SpectralFieldT<1> partial(const SpectralFieldT<C>& u, std::size_t component, std::size_t axis) {
    SpectralFieldT<1> out(u.grid());
    auto src = u.component(component);
    auto dst = out.component(0);
    detail::for_each_mode(u.grid(), [&](std::size_t q, double kx, double ky, double kz, double) {
        const double k = axis == 0 ? kx : (axis == 1 ? ky : kz);
        dst[q] = detail::I * k * src[q];
    });
    return out;
}

/// curl u, i k x u(k) per mode.
inline SpectralField curl(const SpectralField& u) {
    SpectralField out(u.grid());
    auto ux = u.component(0), uy = u.component(1), uz = u.component(2);
    auto ox = out.component(0), oy = out.component(1), oz = out.component(2);
    detail::for_each_mode(u.grid(), [&](std::size_t q, double kx, double ky, double kz, double) {
        ox[q] = detail::I * (ky * uz[q] - kz * uy[q]);
        oy[q] = detail::I * (kz * ux[q] - kx * uz[q]);
        oz[q] = detail::I * (kx * uy[q] - ky * ux[q]);
    });
    return out;
}

inline ScalarSpectralField divergence(const SpectralField& u) {
    ScalarSpectralField out(u.grid());
    auto ux = u.component(0), uy = u.component(1), uz = u.component(2);
    auto o = out.component(0);
    detail::for_each_mode(u.grid(), [&](std::size_t q, double kx, double ky, double kz, double) {
        o[q] = detail::I * (kx * ux[q] + ky * uy[q] + kz * uz[q]);
    });
    return out;
}

/// Gradient of a scalar field.
inline SpectralField gradient(const ScalarSpectralField& p) {
    SpectralField out(p.grid());
    auto s = p.component(0);
    auto ox = out.component(0), oy = out.component(1), oz = out.component(2);
    detail::for_each_mode(p.grid(), [&](std::size_t q, double kx, double ky, double kz, double) {
        ox[q] = detail::I * kx * s[q];
        oy[q] = detail::I * ky * s[q];
        oz[q] = detail::I * kz * s[q];
    });
    return out;
}

template <std::size_t C>
SpectralFieldT<C> laplacian(const SpectralFieldT<C>& u) {
    SpectralFieldT<C> out(u.grid());
    for (std::size_t c = 0; c < C; ++c) {
        auto s = u.component(c);
        auto o = out.component(c);
        detail::for_each_mode(u.grid(), [&](std::size_t q, double, double, double, double k2) { o[q] = -k2 * s[q]; });
    }
    return out;
}

/// All nine partials d_j u_i, returned in physical space at index 3*i + j.
inline TensorField gradient_vec(const SpectralField& u) {
    const Grid& g = u.grid();
    std::array<SpectralFieldT<1>, 9> parts;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) parts[3 * i + j] = partial(u, i, j);
    TensorField out(g);
    std::vector<std::pair<std::span<const cplx>, std::span<double>>> jobs;
    for (std::size_t c = 0; c < 9; ++c) jobs.emplace_back(parts[c].component(0), out.component(c));
    detail::inverse_batch(g, jobs);
    return out;
}

/// Leray projection: (I - k k^T / |k|^2) per mode, k = 0 passes through.
inline SpectralField leray_project(const SpectralField& w) {
    SpectralField out = w;
    auto ox = out.component(0), oy = out.component(1), oz = out.component(2);
    detail::for_each_mode(w.grid(), [&](std::size_t q, double kx, double ky, double kz, double) {
        const double kk = kx * kx + ky * ky + kz * kz;
        if (kk == 0.0) return;
        const cplx kdotw = (kx * ox[q] + ky * oy[q] + kz * oz[q]) / kk;
        ox[q] -= kx * kdotw;
        oy[q] -= ky * kdotw;
        oz[q] -= kz * kdotw;
    });
    return out;
}

inline PhysicalField cross(const PhysicalField& u, const PhysicalField& v) {
    require_same_grid(u.grid(), v.grid(), "cross");
    PhysicalField out(u.grid());
    const std::size_t size = u.grid().cube_size();
    for (std::size_t q = 0; q < size; ++q) {
        const double a0 = u.at(0, q), a1 = u.at(1, q), a2 = u.at(2, q);
        const double b0 = v.at(0, q), b1 = v.at(1, q), b2 = v.at(2, q);
        out.at(0, q) = a1 * b2 - a2 * b1;
        out.at(1, q) = a2 * b0 - a0 * b2;
        out.at(2, q) = a0 * b1 - a1 * b0;
    }
    return out;
}

inline ScalarPhysicalField dot(const PhysicalField& u, const PhysicalField& v) {
    require_same_grid(u.grid(), v.grid(), "dot");
    ScalarPhysicalField out(u.grid());
    const std::size_t size = u.grid().cube_size();
    for (std::size_t q = 0; q < size; ++q)
        out.at(0, q) = u.at(0, q) * v.at(0, q) + u.at(1, q) * v.at(1, q) + u.at(2, q) * v.at(2, q);
    return out;
}

/// Pointwise s * u for a scalar s.
inline PhysicalField scale(const ScalarPhysicalField& s, const PhysicalField& u) {
    require_same_grid(s.grid(), u.grid(), "scale");
    PhysicalField out(u.grid());
    const std::size_t size = u.grid().cube_size();
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t q = 0; q < size; ++q) out.at(c, q) = s.at(0, q) * u.at(c, q);
    return out;
}

/// (u . grad) w in physical space, given u and grad w = gradient_vec(w).
inline PhysicalField directional_derivative(const PhysicalField& u, const TensorField& grad_w) {
    require_same_grid(u.grid(), grad_w.grid(), "directional_derivative");
    PhysicalField out(u.grid());
    const std::size_t size = u.grid().cube_size();
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t q = 0; q < size; ++q)
            out.at(i, q) = u.at(0, q) * grad_w.at(3 * i + 0, q) + u.at(1, q) * grad_w.at(3 * i + 1, q) +
                           u.at(2, q) * grad_w.at(3 * i + 2, q);
    return out;
}

/// (u . grad) w evaluated pseudo-spectrally and dealiased.
inline SpectralField convective(const SpectralField& u, const SpectralField& w) {
    require_same_grid(u.grid(), w.grid(), "convective");
    auto out = detail::to_spectral_fast(directional_derivative(detail::to_physical_fast(u), gradient_vec(w)));
    apply_dealias(out);
    return out;
}

/// L2 inner product over the box, from Fourier coefficients (Parseval).
template <std::size_t C>
double inner(const SpectralFieldT<C>& a, const SpectralFieldT<C>& b) {
    require_same_grid(a.grid(), b.grid(), "inner");
    double s = 0.0;
    auto ca = a.coeffs(), cb = b.coeffs();
    for (std::size_t q = 0; q < ca.size(); ++q) s += (std::conj(ca[q]) * cb[q]).real();
    return s * a.grid().volume();
}

template <std::size_t C>
double l2_norm(const SpectralFieldT<C>& a) {
    return std::sqrt(std::max(0.0, inner(a, a)));
}

/// Relative spectral divergence residual ||div u|| / ||grad u||; zero for zero fields.
inline double divergence_residual(const SpectralField& u) {
    double num = 0.0, den = 0.0;
    auto ux = u.component(0), uy = u.component(1), uz = u.component(2);
    detail::for_each_mode(u.grid(), [&](std::size_t q, double kx, double ky, double kz, double) {
        num += std::norm(kx * ux[q] + ky * uy[q] + kz * uz[q]);
        den += (kx * kx + ky * ky + kz * kz) * (std::norm(ux[q]) + std::norm(uy[q]) + std::norm(uz[q]));
    });
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace fmhd
