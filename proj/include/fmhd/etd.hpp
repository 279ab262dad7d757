#pragma once

// Scalar coefficients for exponential integrators on a diagonal linear part.
// For z = L*h the ETDRK4 (Cox-Matthews) weights are evaluated with the
// contour-mean trick of Kassam & Trefethen, which stays accurate as z -> 0.

#include <cmath>
#include <complex>
#include <numbers>

namespace fmhd::detail {

struct EtdCoefficients {
    double e = 1.0;       // exp(z)
    double e_half = 1.0;  // exp(z/2)
    double q = 0.0;       // h * phi1(z/2) / 2
    double f1 = 0.0;
    double f2 = 0.0;
    double f3 = 0.0;
};

inline EtdCoefficients etd_coefficients(double linear, double h) {
    constexpr int points = 64;
    const double z = linear * h;
    EtdCoefficients c;
    c.e = std::exp(z);
    c.e_half = std::exp(z / 2.0);
    double q = 0.0, f1 = 0.0, f2 = 0.0, f3 = 0.0;
    for (int j = 0; j < points; ++j) {
        const double theta = std::numbers::pi * (j + 0.5) / points;
        const std::complex<double> r = z + std::polar(1.0, theta);
        const std::complex<double> er = std::exp(r);
        const std::complex<double> r3 = r * r * r;
        q += ((std::exp(r / 2.0) - 1.0) / r).real();
        f1 += ((-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3).real();
        f2 += ((2.0 + r + er * (-2.0 + r)) / r3).real();
        f3 += ((-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3).real();
    }
    c.q = h * q / points;
    c.f1 = h * f1 / points;
    c.f2 = h * f2 / points;
    c.f3 = h * f3 / points;
    return c;
}

}  // namespace fmhd::detail
