#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fmhd/grid.hpp"

namespace fmhd {

using cplx = std::complex<double>;

/// C-component field stored as Fourier-series coefficients on the full
/// complex cube, laid out (component, kx, ky, kz) with kz fastest.
template <std::size_t C>
class SpectralFieldT {
public:
    static constexpr std::size_t components = C;

    SpectralFieldT() = default;
    explicit SpectralFieldT(Grid grid) : grid_(std::move(grid)), coeffs_(C * grid_.cube_size()) {}

    const Grid& grid() const noexcept { return grid_; }
    std::span<cplx> coeffs() noexcept { return coeffs_; }
    std::span<const cplx> coeffs() const noexcept { return coeffs_; }

    std::span<cplx> component(std::size_t c) noexcept {
        return std::span<cplx>(coeffs_).subspan(c * grid_.cube_size(), grid_.cube_size());
    }
    std::span<const cplx> component(std::size_t c) const noexcept {
        return std::span<const cplx>(coeffs_).subspan(c * grid_.cube_size(), grid_.cube_size());
    }

    cplx& operator()(std::size_t c, std::size_t i, std::size_t j, std::size_t k) noexcept {
        return coeffs_[c * grid_.cube_size() + grid_.flat(i, j, k)];
    }
    const cplx& operator()(std::size_t c, std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return coeffs_[c * grid_.cube_size() + grid_.flat(i, j, k)];
    }

    SpectralFieldT& operator+=(const SpectralFieldT& o) {
        require_same_grid(grid_, o.grid_, "SpectralField +=");
        for (std::size_t q = 0; q < coeffs_.size(); ++q) coeffs_[q] += o.coeffs_[q];
        return *this;
    }
    SpectralFieldT& operator-=(const SpectralFieldT& o) {
        require_same_grid(grid_, o.grid_, "SpectralField -=");
        for (std::size_t q = 0; q < coeffs_.size(); ++q) coeffs_[q] -= o.coeffs_[q];
        return *this;
    }
    SpectralFieldT& operator*=(double s) noexcept {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }
    friend SpectralFieldT operator+(SpectralFieldT a, const SpectralFieldT& b) { return a += b; }
    friend SpectralFieldT operator-(SpectralFieldT a, const SpectralFieldT& b) { return a -= b; }
    friend SpectralFieldT operator*(double s, SpectralFieldT a) { return a *= s; }

    /// this += s * o
    void axpy(double s, const SpectralFieldT& o) {
        require_same_grid(grid_, o.grid_, "SpectralField axpy");
        for (std::size_t q = 0; q < coeffs_.size(); ++q) coeffs_[q] += s * o.coeffs_[q];
    }

    bool all_finite() const noexcept {
        return std::all_of(coeffs_.begin(), coeffs_.end(),
                           [](const cplx& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
    }

    /// Largest |c(k) - conj(c(-k))| over all modes and components.
    double conjugate_asymmetry() const noexcept {
        const std::size_t n = grid_.n();
        double worst = 0.0;
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    for (std::size_t k = 0; k < n; ++k) {
                        const cplx a = (*this)(c, i, j, k);
                        const cplx b = (*this)(c, grid_.mirror(i), grid_.mirror(j), grid_.mirror(k));
                        worst = std::max(worst, std::abs(a - std::conj(b)));
                    }
        return worst;
    }

    friend bool operator==(const SpectralFieldT& a, const SpectralFieldT& b) {
        return a.grid_ == b.grid_ && a.coeffs_ == b.coeffs_;
    }

private:
    Grid grid_;
    std::vector<cplx> coeffs_;
};

/// C-component real field sampled at the collocation points, laid out
/// (component, ix, iy, iz).
template <std::size_t C>
class PhysicalFieldT {
public:
    static constexpr std::size_t components = C;

    PhysicalFieldT() = default;
    explicit PhysicalFieldT(Grid grid, double fill = 0.0)
        : grid_(std::move(grid)), values_(C * grid_.cube_size(), fill) {}

    const Grid& grid() const noexcept { return grid_; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<double> component(std::size_t c) noexcept {
        return std::span<double>(values_).subspan(c * grid_.cube_size(), grid_.cube_size());
    }
    std::span<const double> component(std::size_t c) const noexcept {
        return std::span<const double>(values_).subspan(c * grid_.cube_size(), grid_.cube_size());
    }

    double& operator()(std::size_t c, std::size_t i, std::size_t j, std::size_t k) noexcept {
        return values_[c * grid_.cube_size() + grid_.flat(i, j, k)];
    }
    double operator()(std::size_t c, std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return values_[c * grid_.cube_size() + grid_.flat(i, j, k)];
    }
    /// Component c at flat point index q.
    double& at(std::size_t c, std::size_t q) noexcept { return values_[c * grid_.cube_size() + q]; }
    double at(std::size_t c, std::size_t q) const noexcept { return values_[c * grid_.cube_size() + q]; }

    bool all_finite() const noexcept {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    PhysicalFieldT& operator+=(const PhysicalFieldT& o) {
        require_same_grid(grid_, o.grid_, "PhysicalField +=");
        for (std::size_t q = 0; q < values_.size(); ++q) values_[q] += o.values_[q];
        return *this;
    }
    PhysicalFieldT& operator-=(const PhysicalFieldT& o) {
        require_same_grid(grid_, o.grid_, "PhysicalField -=");
        for (std::size_t q = 0; q < values_.size(); ++q) values_[q] -= o.values_[q];
        return *this;
    }
    PhysicalFieldT& operator*=(double s) noexcept {
        for (auto& v : values_) v *= s;
        return *this;
    }
    friend PhysicalFieldT operator+(PhysicalFieldT a, const PhysicalFieldT& b) { return a += b; }
    friend PhysicalFieldT operator-(PhysicalFieldT a, const PhysicalFieldT& b) { return a -= b; }
    friend PhysicalFieldT operator*(double s, PhysicalFieldT a) { return a *= s; }

private:
    Grid grid_;
    std::vector<double> values_;
};

using SpectralField = SpectralFieldT<3>;
using ScalarSpectralField = SpectralFieldT<1>;
using PhysicalField = PhysicalFieldT<3>;
using ScalarPhysicalField = PhysicalFieldT<1>;
/// Velocity-gradient style tensor; component 3*i + j holds d_j u_i.
using TensorField = PhysicalFieldT<9>;

/// Constants of the FMHD system: viscosity, magnetic diffusivity,
/// gyromagnetic ratio, and damping.
struct PhysicalParams {
    double mu = 1.0;
    double eta = 1.0;
    double gamma = 1.0;
    double chi = 1.0;

    void validate() const {
        if (!(mu > 0.0) || !std::isfinite(mu)) throw Error("mu must be positive");
        if (!(eta > 0.0) || !std::isfinite(eta)) throw Error("eta must be positive");
        if (!(chi > 0.0) || !std::isfinite(chi)) throw Error("chi must be positive");
        if (gamma == 0.0 || !std::isfinite(gamma)) throw Error("gamma must be nonzero");
    }
    friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;
};

/// Velocity, magnetic field, and magnetisation at one instant.
struct StateVector {
    SpectralField v;
    SpectralField B;
    SpectralField m;
    double time = 0.0;

    StateVector() = default;
    explicit StateVector(const Grid& grid, double t = 0.0) : v(grid), B(grid), m(grid), time(t) {}

    const Grid& grid() const noexcept { return v.grid(); }

    void check_grids() const {
        require_same_grid(v.grid(), B.grid(), "StateVector");
        require_same_grid(v.grid(), m.grid(), "StateVector");
    }

    friend bool operator==(const StateVector& a, const StateVector& b) {
        return a.time == b.time && a.v == b.v && a.B == b.B && a.m == b.m;
    }
};

}  // namespace fmhd
