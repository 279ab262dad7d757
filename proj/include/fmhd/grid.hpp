#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmhd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Periodic cube [0, box_length)^3 sampled on n^3 collocation points.
///
/// Spectral index j in [0, n) maps to the integer wavenumber j for j <= n/2
/// and j - n otherwise, so each axis carries {-n/2+1, ..., n/2}. Physical
/// wavenumbers are the integers scaled by 2*pi/box_length.
class Grid {
public:
    Grid() : Grid(16) {}

    explicit Grid(std::size_t n, double box_length = 2.0 * std::numbers::pi,
                  double dealias_fraction = 2.0 / 3.0)
        : n_(n), box_length_(box_length), dealias_fraction_(dealias_fraction) {
        if (n < 4 || n % 2 != 0 || (n & (n - 1)) != 0)
            throw Error("grid.n must be a power of two >= 4, got " + std::to_string(n));
        if (!(box_length > 0.0) || !std::isfinite(box_length))
            throw Error("grid.box_length must be positive");
        if (!(dealias_fraction > 0.0) || dealias_fraction > 1.0)
            throw Error("grid.dealias_fraction must lie in (0, 1]");
        scale_ = 2.0 * std::numbers::pi / box_length_;
        // Largest retained integer wavenumber; the epsilon keeps 2/3 * 24 = 16 on the inclusive side.
        dealias_index_ = static_cast<int>(std::floor(dealias_fraction_ * static_cast<double>(n_ / 2) + 1e-9));
    }

    std::size_t n() const noexcept { return n_; }
    double box_length() const noexcept { return box_length_; }
    double dealias_fraction() const noexcept { return dealias_fraction_; }
    /// 2*pi / box_length.
    double wavenumber_scale() const noexcept { return scale_; }
    double volume() const noexcept { return box_length_ * box_length_ * box_length_; }
    double spacing() const noexcept { return box_length_ / static_cast<double>(n_); }

    std::size_t cube_size() const noexcept { return n_ * n_ * n_; }
    std::size_t flat(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return (i * n_ + j) * n_ + k;
    }

    /// Signed integer wavenumber carried by spectral index j.
    int integer_wavenumber(std::size_t j) const noexcept {
        const int ji = static_cast<int>(j);
        const int n = static_cast<int>(n_);
        return ji <= n / 2 ? ji : ji - n;
    }
    /// Physical wavenumber carried by spectral index j.
    double wavenumber(std::size_t j) const noexcept { return scale_ * integer_wavenumber(j); }
    /// Wavenumber used for spectral differentiation: the Nyquist index differentiates to zero.
    double derivative_wavenumber(std::size_t j) const noexcept {
        return j == n_ / 2 ? 0.0 : wavenumber(j);
    }
    /// Index holding -k for the mode stored at index j.
    std::size_t mirror(std::size_t j) const noexcept { return (n_ - j) % n_; }

    /// Largest integer |k_i| kept by the dealias mask.
    int dealias_index() const noexcept { return dealias_index_; }
    /// Physical cutoff corresponding to dealias_index().
    double dealias_cutoff() const noexcept { return scale_ * dealias_fraction_ * static_cast<double>(n_ / 2); }

    bool in_dealias_mask(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return std::abs(integer_wavenumber(i)) <= dealias_index_ &&
               std::abs(integer_wavenumber(j)) <= dealias_index_ &&
               std::abs(integer_wavenumber(k)) <= dealias_index_;
    }

    /// Integer |k|^2 of the mode at (i, j, k).
    int integer_k2(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        const int a = integer_wavenumber(i), b = integer_wavenumber(j), c = integer_wavenumber(k);
        return a * a + b * b + c * c;
    }

    /// Physical collocation coordinate of index i along any axis.
    double coordinate(std::size_t i) const noexcept { return spacing() * static_cast<double>(i); }

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.n_ == b.n_ && a.box_length_ == b.box_length_ && a.dealias_fraction_ == b.dealias_fraction_;
    }

private:
    std::size_t n_;
    double box_length_;
    double dealias_fraction_;
    double scale_ = 1.0;
    int dealias_index_ = 0;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw Error(std::string(what) + ": grid mismatch");
}

}  // namespace fmhd
