#pragma once

// Numerical checks of the vector-calculus identities the FMHD right-hand sides
// rely on. Inputs are band-limited to half the dealias index so every
// quadratic product stays inside the mask and the identities hold up to
// round-off.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "fmhd/calculus.hpp"
#include "fmhd/random_state.hpp"
#include "fmhd/transform.hpp"

namespace fmhd {

struct IdentityResult {
    std::string name;
    double residual = 0.0;
    double threshold = 0.0;
    bool pass() const noexcept { return residual < threshold; }
};

struct IdentityReport {
    std::vector<IdentityResult> rows;
    bool pass() const {
        return std::all_of(rows.begin(), rows.end(), [](const IdentityResult& r) { return r.pass(); });
    }
};

struct IdentityOptions {
    double threshold = 1e-11;
    /// Random field amplitude; 0 runs the suite on all-zero inputs.
    double amplitude = 1.0;
    /// Flip the sign of (v . grad) u in the curl-of-cross right side, so the
    /// suite can be seen to fail.
    bool mis_signed_curl_cross = false;
};

namespace detail {

template <std::size_t C>
double relative_difference(const SpectralFieldT<C>& a, const SpectralFieldT<C>& b) {
    const double scale = std::max(l2_norm(a), l2_norm(b));
    if (scale == 0.0) return 0.0;
    SpectralFieldT<C> d = a;
    d -= b;
    return l2_norm(d) / scale;
}

template <std::size_t C>
double relative_difference(const PhysicalFieldT<C>& a, const PhysicalFieldT<C>& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t q = 0; q < a.values().size(); ++q) {
        diff = std::max(diff, std::abs(a.values()[q] - b.values()[q]));
        scale = std::max({scale, std::abs(a.values()[q]), std::abs(b.values()[q])});
    }
    return scale == 0.0 ? 0.0 : diff / scale;
}

/// Worst single-mode mismatch relative to the largest mode.
inline double modewise_difference(const SpectralField& a, const SpectralField& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t q = 0; q < a.coeffs().size(); ++q) {
        diff = std::max(diff, std::abs(a.coeffs()[q] - b.coeffs()[q]));
        scale = std::max({scale, std::abs(a.coeffs()[q]), std::abs(b.coeffs()[q])});
    }
    return scale == 0.0 ? 0.0 : diff / scale;
}

template <std::size_t C>
SpectralFieldT<C> dealiased(const PhysicalFieldT<C>& f) {
    auto s = to_spectral_fast(f);
    apply_dealias(s);
    return s;
}

inline ScalarSpectralField component_of(const SpectralField& u, std::size_t c) {
    ScalarSpectralField out(u.grid());
    std::copy(u.component(c).begin(), u.component(c).end(), out.component(0).begin());
    return out;
}

/// |grad u|^2 = sum_ij (d_j u_i)^2, pointwise.
inline ScalarPhysicalField gradient_square(const TensorField& grad) {
    ScalarPhysicalField out(grad.grid());
    for (std::size_t c = 0; c < 9; ++c)
        for (std::size_t q = 0; q < grad.grid().cube_size(); ++q) out.at(0, q) += grad.at(c, q) * grad.at(c, q);
    return out;
}

}  // namespace detail

/// curl(u x v) = u div v - v div u + (v.grad)u - (u.grad)v, as two spectral fields.
inline std::pair<SpectralField, SpectralField> curl_cross_sides(const SpectralField& u, const SpectralField& v,
                                                                bool mis_signed = false) {
    const auto pu = detail::to_physical_fast(u), pv = detail::to_physical_fast(v);
    SpectralField lhs = curl(detail::dealiased(cross(pu, pv)));
    const auto du = detail::to_physical_fast(divergence(u)), dv = detail::to_physical_fast(divergence(v));
    PhysicalField rhs = scale(dv, pu);
    rhs -= scale(du, pv);
    const auto v_grad_u = directional_derivative(pv, gradient_vec(u));
    if (mis_signed)
        rhs -= v_grad_u;
    else
        rhs += v_grad_u;
    rhs -= directional_derivative(pu, gradient_vec(v));
    return {lhs, detail::dealiased(rhs)};
}

inline IdentityReport identity_suite(const Grid& grid, std::uint64_t seed, const IdentityOptions& opts = {}) {
    std::mt19937_64 rng(seed);
    const int half_band = std::max(1, grid.dealias_index() / 2);
    auto sample = [&] { return random_field(grid, rng, 1.0, opts.amplitude, half_band); };
    const SpectralField u = sample(), v = sample(), w = sample();
    IdentityReport report;
    auto add = [&](std::string name, double residual) {
        report.rows.push_back({std::move(name), residual, opts.threshold});
    };

    {
        const auto [lhs, rhs] = curl_cross_sides(u, v, opts.mis_signed_curl_cross);
        add("curl-cross-product", detail::relative_difference(lhs, rhs));
        add("curl-cross-product (mode-wise)", detail::modewise_difference(lhs, rhs));
    }
    {
        const SpectralField lhs = curl(curl(u));
        SpectralField rhs = gradient(divergence(u));
        rhs -= laplacian(u);
        add("curl-squared", detail::relative_difference(lhs, rhs));
    }

    const auto pu = detail::to_physical_fast(u), pv = detail::to_physical_fast(v), pw = detail::to_physical_fast(w);
    {
        const PhysicalField lhs = cross(pu, cross(pv, pw));
        const PhysicalField rhs = scale(dot(pu, pw), pv) - scale(dot(pu, pv), pw);
        add("triple-cross-product", detail::relative_difference(lhs, rhs));
    }
    const TensorField grad_u = gradient_vec(u);
    const auto lap_u = detail::to_physical_fast(laplacian(u));
    {
        const auto lhs = laplacian(detail::dealiased(dot(pu, pu)));
        ScalarPhysicalField rhs = detail::gradient_square(grad_u);
        rhs += dot(pu, lap_u);
        rhs *= 2.0;
        add("laplacian-of-square", detail::relative_difference(lhs, detail::dealiased(rhs)));
    }
    {
        // div[(grad u)^T grad u] = grad(|grad u|^2 / 2) + (grad u)^T lap u.
        SpectralField lhs(grid);
        for (std::size_t i = 0; i < 3; ++i) {
            ScalarSpectralField acc(grid);
            for (std::size_t j = 0; j < 3; ++j) {
                ScalarPhysicalField entry(grid);
                for (std::size_t k = 0; k < 3; ++k)
                    for (std::size_t q = 0; q < grid.cube_size(); ++q)
                        entry.at(0, q) += grad_u.at(3 * k + i, q) * grad_u.at(3 * k + j, q);
                acc += partial(detail::dealiased(entry), 0, j);
            }
            std::copy(acc.component(0).begin(), acc.component(0).end(), lhs.component(i).begin());
        }
        ScalarPhysicalField half = detail::gradient_square(grad_u);
        half *= 0.5;
        SpectralField rhs = gradient(detail::dealiased(half));
        PhysicalField transposed(grid);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = 0; k < 3; ++k)
                for (std::size_t q = 0; q < grid.cube_size(); ++q)
                    transposed.at(i, q) += grad_u.at(3 * k + i, q) * lap_u.at(k, q);
        rhs += detail::dealiased(transposed);
        add("exchange-stress-divergence", detail::relative_difference(lhs, rhs));
    }
    {
        // For m = (cos phi, sin phi, 0): -m x (m x lap m) = lap m + |grad m|^2 m.
        std::mt19937_64 phase_rng(seed ^ 0x9e3779b97f4a7c15ULL);
        const auto phi_field = random_field(grid, phase_rng, 2.0, 0.2 * opts.amplitude, 1);
        const auto phi = detail::to_physical_fast(detail::component_of(phi_field, 0));
        PhysicalField m(grid);
        for (std::size_t q = 0; q < grid.cube_size(); ++q) {
            m.at(0, q) = std::cos(phi.at(0, q));
            m.at(1, q) = std::sin(phi.at(0, q));
        }
        const auto ms = to_spectral(m);
        const auto lap_m = detail::to_physical_fast(laplacian(ms));
        const auto grad_sq = detail::gradient_square(gradient_vec(ms));
        PhysicalField lhs = cross(m, cross(m, lap_m));
        lhs *= -1.0;
        const PhysicalField rhs = lap_m + scale(grad_sq, m);
        add("unit-triple-cross", detail::relative_difference(lhs, rhs));
    }
    return report;
}

inline void write_identity_table(std::ostream& out, const IdentityReport& report) {
    const auto flags = out.flags();
    out << std::left << std::setw(32) << "identity" << std::setw(14) << "residual" << std::setw(12) << "threshold"
        << "status\n";
    for (const auto& r : report.rows)
        out << std::left << std::setw(32) << r.name << std::setw(14) << std::scientific << std::setprecision(3)
            << r.residual << std::setw(12) << r.threshold << (r.pass() ? "pass" : "FAIL") << '\n';
    out.flags(flags);
}

}  // namespace fmhd
