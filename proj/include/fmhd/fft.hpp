#pragma once

// Thin RAII wrapper over FFTW for the n^3 complex transforms used by the
// pseudo-spectral operators. Plans are cached per thread and per n, built
// with FFTW_ESTIMATE so repeated runs pick identical codelets.

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>

#include "fmhd/grid.hpp"

namespace fmhd::detail {

using cplx = std::complex<double>;

inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n), size_(n * n * n) {
        buffer_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size_));
        if (buffer_ == nullptr) throw Error("fftw_malloc failed");
        const int ni = static_cast<int>(n);
        std::lock_guard lock(planner_mutex());
        forward_ = fftw_plan_dft_3d(ni, ni, ni, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_3d(ni, ni, ni, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (forward_ == nullptr || backward_ == nullptr) throw Error("fftw plan creation failed");
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(buffer_);
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t size() const noexcept { return size_; }
    std::span<cplx> buffer() noexcept { return {reinterpret_cast<cplx*>(buffer_), size_}; }

    void forward() noexcept { fftw_execute(forward_); }
    void backward() noexcept { fftw_execute(backward_); }

private:
    std::size_t n_;
    std::size_t size_;
    fftw_complex* buffer_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

inline FftPlan& plan_for(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FftPlan>(n);
    return *slot;
}

/// Inverse-transforms two conjugate-symmetric spectra at once: the real part of
/// the result is `a` in physical space, the imaginary part is `b`. Either
/// output may be empty to transform a single spectrum.
inline void inverse_pair(const Grid& grid, std::span<const cplx> a, std::span<const cplx> b,
                         std::span<double> out_a, std::span<double> out_b) {
    auto& plan = plan_for(grid.n());
    auto buf = plan.buffer();
    const std::size_t size = plan.size();
    const cplx i_unit(0.0, 1.0);
    if (b.empty()) {
        std::copy(a.begin(), a.end(), buf.begin());
    } else {
        for (std::size_t q = 0; q < size; ++q) buf[q] = a[q] + i_unit * b[q];
    }
    plan.backward();
    for (std::size_t q = 0; q < size; ++q) out_a[q] = buf[q].real();
    if (!out_b.empty())
        for (std::size_t q = 0; q < size; ++q) out_b[q] = buf[q].imag();
}

/// Forward-transforms two real cubes at once, dividing by n^3. Outputs are
/// exactly conjugate symmetric by construction. `y` / `out_y` may be empty.
inline void forward_pair(const Grid& grid, std::span<const double> x, std::span<const double> y,
                         std::span<cplx> out_x, std::span<cplx> out_y) {
    auto& plan = plan_for(grid.n());
    auto buf = plan.buffer();
    const std::size_t n = grid.n();
    const std::size_t size = plan.size();
    if (y.empty()) {
        for (std::size_t q = 0; q < size; ++q) buf[q] = cplx(x[q], 0.0);
    } else {
        for (std::size_t q = 0; q < size; ++q) buf[q] = cplx(x[q], y[q]);
    }
    plan.forward();
    const double norm = 1.0 / static_cast<double>(size);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t mi = grid.mirror(i);
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t mj = grid.mirror(j);
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t q = grid.flat(i, j, k);
                const cplx c = buf[q];
                const cplx cm = std::conj(buf[grid.flat(mi, mj, grid.mirror(k))]);
                out_x[q] = 0.5 * norm * (c + cm);
                if (!out_y.empty()) out_y[q] = cplx(0.0, -0.5) * norm * (c - cm);
            }
        }
    }
}

}  // namespace fmhd::detail
