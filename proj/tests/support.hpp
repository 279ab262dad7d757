#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <vector>
#include <numbers>
#include <random>

#include "fmhd/fmhd.hpp"

namespace testing_support {

using fmhd::cplx;

/// Samples a vector function of (x, y, z) at the collocation points.
inline fmhd::PhysicalField sample(const fmhd::Grid& g,
                                  const std::function<std::array<double, 3>(double, double, double)>& f) {
    fmhd::PhysicalField out(g);
    const std::size_t n = g.n();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                const auto v = f(g.coordinate(i), g.coordinate(j), g.coordinate(k));
                for (std::size_t c = 0; c < 3; ++c) out(c, i, j, k) = v[c];
            }
    return out;
}

inline fmhd::SpectralField spectral(const fmhd::Grid& g,
                                    const std::function<std::array<double, 3>(double, double, double)>& f) {
    return fmhd::to_spectral(sample(g, f));
}

/// Direct O(n^6) discrete Fourier sum for one component; independent of FFTW.
inline cplx direct_dft(const fmhd::PhysicalField& f, std::size_t c, int kx, int ky, int kz) {
    const fmhd::Grid& g = f.grid();
    const std::size_t n = g.n();
    cplx sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                const double phase = -2.0 * std::numbers::pi * double(kx * int(i) + ky * int(j) + kz * int(k)) / double(n);
                sum += f(c, i, j, k) * std::polar(1.0, phase);
            }
    return sum / double(n * n * n);
}

inline double max_abs_diff(const fmhd::PhysicalField& a, const fmhd::PhysicalField& b) {
    double m = 0.0;
    for (std::size_t q = 0; q < a.values().size(); ++q) m = std::max(m, std::abs(a.values()[q] - b.values()[q]));
    return m;
}

template <std::size_t C>
double max_abs(const fmhd::SpectralFieldT<C>& a) {
    double m = 0.0;
    for (const auto& c : a.coeffs()) m = std::max(m, std::abs(c));
    return m;
}

template <std::size_t C>
double rel_l2(const fmhd::SpectralFieldT<C>& a, const fmhd::SpectralFieldT<C>& b) {
    const double s = std::max(fmhd::l2_norm(a), fmhd::l2_norm(b));
    return s == 0.0 ? 0.0 : fmhd::l2_norm(a - b) / s;
}

/// Fourth-order central differences on the periodic collocation grid.
namespace fd {

inline std::vector<double> partial(const fmhd::Grid& g, std::span<const double> f, std::size_t axis) {
    const std::size_t n = g.n();
    const double h = g.spacing();
    std::vector<double> out(f.size());
    auto at = [&](std::size_t i, std::size_t j, std::size_t k, int shift) {
        std::array<std::size_t, 3> idx{i, j, k};
        idx[axis] = (idx[axis] + n + shift) % n;
        return f[g.flat(idx[0], idx[1], idx[2])];
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                out[g.flat(i, j, k)] =
                    (-at(i, j, k, 2) + 8.0 * at(i, j, k, 1) - 8.0 * at(i, j, k, -1) + at(i, j, k, -2)) / (12.0 * h);
    return out;
}

inline std::vector<double> second(const fmhd::Grid& g, std::span<const double> f, std::size_t axis) {
    const std::size_t n = g.n();
    const double h = g.spacing();
    std::vector<double> out(f.size());
    auto at = [&](std::size_t i, std::size_t j, std::size_t k, int shift) {
        std::array<std::size_t, 3> idx{i, j, k};
        idx[axis] = (idx[axis] + n + shift) % n;
        return f[g.flat(idx[0], idx[1], idx[2])];
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                out[g.flat(i, j, k)] = (-at(i, j, k, 2) + 16.0 * at(i, j, k, 1) - 30.0 * at(i, j, k, 0) +
                                        16.0 * at(i, j, k, -1) - at(i, j, k, -2)) /
                                       (12.0 * h * h);
    return out;
}

/// d_j u_i at index 3*i + j.
inline fmhd::TensorField gradient(const fmhd::PhysicalField& u) {
    fmhd::TensorField out(u.grid());
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const auto d = partial(u.grid(), u.component(i), j);
            std::copy(d.begin(), d.end(), out.component(3 * i + j).begin());
        }
    return out;
}

inline fmhd::PhysicalField laplacian(const fmhd::PhysicalField& u) {
    fmhd::PhysicalField out(u.grid());
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t axis = 0; axis < 3; ++axis) {
            const auto d = second(u.grid(), u.component(i), axis);
            for (std::size_t q = 0; q < d.size(); ++q) out.at(i, q) += d[q];
        }
    return out;
}

inline fmhd::PhysicalField curl(const fmhd::TensorField& grad) {
    fmhd::PhysicalField out(grad.grid());
    for (std::size_t q = 0; q < grad.grid().cube_size(); ++q) {
        out.at(0, q) = grad.at(3 * 2 + 1, q) - grad.at(3 * 1 + 2, q);
        out.at(1, q) = grad.at(3 * 0 + 2, q) - grad.at(3 * 2 + 0, q);
        out.at(2, q) = grad.at(3 * 1 + 0, q) - grad.at(3 * 0 + 1, q);
    }
    return out;
}

inline fmhd::ScalarPhysicalField divergence(const fmhd::TensorField& grad) {
    fmhd::ScalarPhysicalField out(grad.grid());
    for (std::size_t q = 0; q < grad.grid().cube_size(); ++q)
        out.at(0, q) = grad.at(0, q) + grad.at(4, q) + grad.at(8, q);
    return out;
}

/// (u . grad) w given grad w.
inline fmhd::PhysicalField directional(const fmhd::PhysicalField& u, const fmhd::TensorField& grad_w) {
    fmhd::PhysicalField out(u.grid());
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t q = 0; q < u.grid().cube_size(); ++q)
            for (std::size_t j = 0; j < 3; ++j) out.at(i, q) += u.at(j, q) * grad_w.at(3 * i + j, q);
    return out;
}


/// Right-hand sides of the three equations built only from fourth-order
/// differences of the inputs. curl(v x B) is expanded as
/// (B.grad)v - (v.grad)B + v div B - B div v and curl curl B as
/// grad div B - lap B, so no derivative is taken of a product. The momentum
/// forcing is Leray-projected spectrally before mu lap v is added.
struct Rhs {
    fmhd::SpectralField v, B, m;
};

inline Rhs rhs(const fmhd::StateVector& s, const fmhd::PhysicalParams& p) {
    using fmhd::PhysicalField;
    const fmhd::Grid& g = s.grid();
    const std::size_t size = g.cube_size();
    const PhysicalField v = fmhd::to_physical(s.v), B = fmhd::to_physical(s.B), m = fmhd::to_physical(s.m);
    const auto gv = gradient(v), gB = gradient(B), gm = gradient(m);
    const auto lv = laplacian(v), lB = laplacian(B), lm = laplacian(m);
    const auto cB = curl(gB);
    const auto dvB = divergence(gB), dvv = divergence(gv);
    // grad(div B) from mixed second differences
    PhysicalField grad_div_B(g);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const auto d = partial(g, gB.component(3 * j + j), i);
            for (std::size_t q = 0; q < size; ++q) grad_div_B.at(i, q) += d[q];
        }
    const auto v_grad_v = directional(v, gv), B_grad_m = directional(B, gm), B_grad_v = directional(B, gv),
               v_grad_B = directional(v, gB), v_grad_m = directional(v, gm);
    const auto lorentz = fmhd::cross(cB, B);
    const auto precession = fmhd::cross(m, lm + B);
    const auto damping = fmhd::cross(m, fmhd::cross(m, B));

    PhysicalField force(g), fB(g), fm(g);
    for (std::size_t q = 0; q < size; ++q) {
        double grad_m_sq = 0.0;
        for (std::size_t c = 0; c < 9; ++c) grad_m_sq += gm.at(c, q) * gm.at(c, q);
        for (std::size_t i = 0; i < 3; ++i) {
            double exchange = 0.0;
            for (std::size_t c = 0; c < 3; ++c) exchange += gm.at(3 * c + i, q) * lm.at(c, q);
            force.at(i, q) = -v_grad_v.at(i, q) + lorentz.at(i, q) + B_grad_m.at(i, q) - exchange;
            const double curl_vxB = B_grad_v.at(i, q) - v_grad_B.at(i, q) + v.at(i, q) * dvB.at(0, q) -
                                    B.at(i, q) * dvv.at(0, q);
            fB.at(i, q) = -p.eta * (grad_div_B.at(i, q) - lB.at(i, q)) + curl_vxB;
            fm.at(i, q) = -v_grad_m.at(i, q) + p.chi * (lm.at(i, q) + grad_m_sq * m.at(i, q)) +
                          p.gamma * precession.at(i, q) - p.chi * damping.at(i, q);
        }
    }
    Rhs out{fmhd::leray_project(fmhd::to_spectral(force)), fmhd::to_spectral(fB), fmhd::to_spectral(fm)};
    out.v += p.mu * fmhd::to_spectral(lv);
    return out;
}

}  // namespace fd

/// State whose fields all live in |k_i| <= band: v, B solenoidal with the
/// given rms, m = e_z plus a perturbation of rms `tilt` (not normalised, so it
/// stays band-limited and products stay resolved).
inline fmhd::StateVector band_limited_state(const fmhd::Grid& g, std::uint64_t seed, int band, double amplitude,
                                            double tilt) {
    std::mt19937_64 rng(seed);
    fmhd::StateVector s(g);
    s.v = fmhd::leray_project(fmhd::random_field(g, rng, 1.0, amplitude, band));
    s.B = fmhd::leray_project(fmhd::random_field(g, rng, 1.0, amplitude, band));
    s.m = fmhd::random_field(g, rng, 1.0, tilt, band);
    s.m(2, 0, 0, 0) += 1.0;
    return s;
}

}  // namespace testing_support
