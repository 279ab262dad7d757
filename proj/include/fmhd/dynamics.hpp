#pragma once

// Right-hand sides of the FMHD system in Leray-projected form and the time
// integrators that advance its Galerkin (spectrally truncated) ODE system.
//
//   dv/dt = P[-(v.grad)v + curl B x B + (B.grad)m - (grad m)^T lap m] + mu lap v
//   dB/dt = -eta curl curl B + curl(v x B)
//   dm/dt = -(v.grad)m + chi (lap m + |grad m|^2 m) + gamma m x (lap m + B)
//           - chi m x (m x B)
//
// The gradient terms of the momentum equation are removed by P and never formed.
// Linear diffusion (-mu|k|^2, -eta|k|^2, -chi|k|^2) is integrated exactly by the
// imex_euler and etd_rk4 schemes; everything else is explicit.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fmhd/calculus.hpp"
#include "fmhd/diagnostics.hpp"
#include "fmhd/etd.hpp"
#include "fmhd/field.hpp"
#include "fmhd/transform.hpp"

namespace fmhd {

/// Non-finite values in a right-hand side or after a step.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// A step produced a non-finite state. Carries the last time whose state was valid.
class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, double last_valid_time) : Error(what), last_valid_time_(last_valid_time) {}
    double last_valid_time() const noexcept { return last_valid_time_; }

private:
    double last_valid_time_;
};

/// Galerkin truncation: keep modes with |k|_inf <= k_max (physical units).
struct Truncation {
    double k_max = 0.0;

    /// Largest admissible truncation, equal to the dealias cutoff.
    static Truncation full(const Grid& grid) { return Truncation{grid.dealias_cutoff()}; }

    void validate(const Grid& grid) const {
        if (!(k_max > 0.0)) throw Error("truncation.k_max must be positive");
        if (k_max > grid.dealias_cutoff() * (1.0 + 1e-12))
            throw Error("truncation.k_max exceeds the dealias cutoff " + std::to_string(grid.dealias_cutoff()));
    }
    bool retains(const Grid& grid, std::size_t i, std::size_t j, std::size_t k) const noexcept {
        const double lim = k_max * (1.0 + 1e-12);
        return grid.in_dealias_mask(i, j, k) && std::abs(grid.wavenumber(i)) <= lim &&
               std::abs(grid.wavenumber(j)) <= lim && std::abs(grid.wavenumber(k)) <= lim;
    }
    friend bool operator==(const Truncation&, const Truncation&) = default;
};

/// Zeroes every mode outside the truncation mask.
template <std::size_t C>
void apply_truncation(SpectralFieldT<C>& f, const Truncation& trunc) {
    const Grid& g = f.grid();
    const std::size_t n = g.n();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                if (!trunc.retains(g, i, j, k))
                    for (std::size_t c = 0; c < C; ++c) f(c, i, j, k) = 0.0;
}

enum class Scheme { imex_euler, etd_rk4, rk4_explicit };

inline std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::imex_euler: return "imex_euler";
        case Scheme::etd_rk4: return "etd_rk4";
        case Scheme::rk4_explicit: return "rk4_explicit";
    }
    return "etd_rk4";
}

inline Scheme parse_scheme(const std::string& name) {
    if (name == "imex_euler") return Scheme::imex_euler;
    if (name == "etd_rk4") return Scheme::etd_rk4;
    if (name == "rk4_explicit") return Scheme::rk4_explicit;
    throw Error("unknown scheme '" + name + "' (expected imex_euler, etd_rk4 or rk4_explicit)");
}

inline int scheme_order(Scheme s) { return s == Scheme::imex_euler ? 1 : 4; }

/// Diffusive CFL bound for the fully explicit RK4 scheme.
inline double stability_limit(const Grid& grid, const PhysicalParams& p) {
    const double kc = grid.dealias_cutoff();
    const double k2max = 3.0 * kc * kc;
    return 2.5 / ((std::max({p.mu, p.eta, p.chi}) + std::abs(p.gamma)) * k2max);
}

/// 0.25 / (max(mu, eta, chi) * k_cut^2).
inline double default_time_step(const Grid& grid, const PhysicalParams& p) {
    const double kc = grid.dealias_cutoff();
    return 0.25 / (std::max({p.mu, p.eta, p.chi}) * kc * kc);
}

struct TimeStepper {
    Scheme scheme = Scheme::etd_rk4;
    double dt = 0.0;
    /// When false, rk4_explicit may run above its stability limit (instability probes).
    bool enforce_stability = true;

    void validate(const Grid& grid, const PhysicalParams& p) const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("stepper.dt must be positive");
        if (scheme == Scheme::rk4_explicit && enforce_stability && dt > stability_limit(grid, p))
            throw Error("stepper.dt " + std::to_string(dt) + " exceeds the rk4_explicit stability limit " +
                        std::to_string(stability_limit(grid, p)));
    }
};

/// Switches for reduced models used by tests and studies.
struct ModelOptions {
    /// false: keep only the linear diffusion terms.
    bool nonlinear = true;
    /// true: hold m fixed in time (its coupling terms still act on v).
    bool freeze_magnetisation = false;
    friend bool operator==(const ModelOptions&, const ModelOptions&) = default;
};

namespace detail {

inline void check_term(std::span<const double> values, const char* name) {
    for (double x : values)
        if (!std::isfinite(x)) throw NonFiniteError(std::string("non-finite value in term ") + name);
}

}  // namespace detail

/// Nonlinear (explicit) parts of the three right-hand sides, truncated to the
/// Galerkin mask. The full right-hand side is L*state + N.
struct NonlinearTerms {
    SpectralField v;
    SpectralField B;
    SpectralField m;
};

/// Pseudo-spectral evaluation of every explicit term. With `check_terms` each
/// physical-space term is scanned for non-finite values and named on failure.
inline NonlinearTerms nonlinear_terms(const StateVector& s, const PhysicalParams& p, const Truncation& trunc,
                                      const ModelOptions& opts = {}, bool check_terms = true) {
    s.check_grids();
    const Grid& g = s.grid();
    NonlinearTerms out{SpectralField(g), SpectralField(g), SpectralField(g)};

    // eta * grad(div B) = -eta (curl curl B + lap B); identically zero for solenoidal B.
    {
        auto grad_div = gradient(divergence(s.B));
        out.B.axpy(-p.eta, grad_div);
    }
    if (!opts.nonlinear) {
        apply_truncation(out.B, trunc);
        return out;
    }

    // Spectral inputs needed in physical space.
    const SpectralField curl_B = curl(s.B);
    const SpectralField lap_m = laplacian(s.m);
    std::array<SpectralFieldT<1>, 9> dv, dm;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            dv[3 * i + j] = partial(s.v, i, j);
            dm[3 * i + j] = partial(s.m, i, j);
        }

    PhysicalField v(g), B(g), m(g), cB(g), lm(g);
    TensorField gv(g), gm(g);
    std::vector<std::pair<std::span<const cplx>, std::span<double>>> jobs;
    for (std::size_t c = 0; c < 3; ++c) {
        jobs.emplace_back(s.v.component(c), v.component(c));
        jobs.emplace_back(s.B.component(c), B.component(c));
        jobs.emplace_back(s.m.component(c), m.component(c));
        jobs.emplace_back(curl_B.component(c), cB.component(c));
        jobs.emplace_back(lap_m.component(c), lm.component(c));
    }
    for (std::size_t c = 0; c < 9; ++c) {
        jobs.emplace_back(dv[c].component(0), gv.component(c));
        jobs.emplace_back(dm[c].component(0), gm.component(c));
    }
    detail::inverse_batch(g, jobs);

    const auto adv_v = directional_derivative(v, gv);  // (v.grad)v
    const auto lorentz = cross(cB, B);                 // curl B x B
    const auto b_grad_m = directional_derivative(B, gm);
    PhysicalField exchange(g);  // (grad m)^T lap m
    const std::size_t size = g.cube_size();
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t q = 0; q < size; ++q)
            exchange.at(j, q) = gm.at(0 + j, q) * lm.at(0, q) + gm.at(3 + j, q) * lm.at(1, q) +
                                gm.at(6 + j, q) * lm.at(2, q);
    const auto v_cross_B = cross(v, B);
    const auto adv_m = directional_derivative(v, gm);  // (v.grad)m
    const auto field = lm + B;                         // lap m + B
    const auto precession = cross(m, field);
    const auto damping = cross(m, cross(m, B));
    ScalarPhysicalField grad_m_sq(g);
    for (std::size_t q = 0; q < size; ++q) {
        double acc = 0.0;
        for (std::size_t c = 0; c < 9; ++c) acc += gm.at(c, q) * gm.at(c, q);
        grad_m_sq.at(0, q) = acc;
    }

    if (check_terms) {
        detail::check_term(adv_v.values(), "(v.grad)v");
        detail::check_term(lorentz.values(), "curl B x B");
        detail::check_term(b_grad_m.values(), "(B.grad)m");
        detail::check_term(exchange.values(), "(grad m)^T lap m");
        detail::check_term(v_cross_B.values(), "v x B");
        detail::check_term(adv_m.values(), "(v.grad)m");
        detail::check_term(precession.values(), "m x (lap m + B)");
        detail::check_term(damping.values(), "m x (m x B)");
        detail::check_term(grad_m_sq.values(), "|grad m|^2");
    }

    PhysicalField force_v(g), force_m(g);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t q = 0; q < size; ++q) {
            force_v.at(c, q) = -adv_v.at(c, q) + lorentz.at(c, q) + b_grad_m.at(c, q) - exchange.at(c, q);
            force_m.at(c, q) = -adv_m.at(c, q) + p.chi * grad_m_sq.at(0, q) * m.at(c, q) +
                               p.gamma * precession.at(c, q) - p.chi * damping.at(c, q);
        }
    if (opts.freeze_magnetisation) force_m *= 0.0;

    SpectralField hat_v(g), hat_vxB(g), hat_m(g);
    std::vector<std::pair<std::span<const double>, std::span<cplx>>> fjobs;
    for (std::size_t c = 0; c < 3; ++c) {
        fjobs.emplace_back(force_v.component(c), hat_v.component(c));
        fjobs.emplace_back(v_cross_B.component(c), hat_vxB.component(c));
        fjobs.emplace_back(force_m.component(c), hat_m.component(c));
    }
    detail::forward_batch(g, fjobs);

    apply_truncation(hat_v, trunc);
    apply_truncation(hat_vxB, trunc);
    apply_truncation(hat_m, trunc);
    out.v = leray_project(hat_v);
    out.B += curl(hat_vxB);
    apply_truncation(out.B, trunc);
    out.m = std::move(hat_m);
    return out;
}

/// Per-field linear coefficients: v -> -mu|k|^2, B -> -eta|k|^2, m -> -chi|k|^2.
inline std::array<double, 3> linear_rates(const PhysicalParams& p, const ModelOptions& opts) {
    return {p.mu, p.eta, opts.freeze_magnetisation ? 0.0 : p.chi};
}

namespace detail {

inline SpectralField add_linear(SpectralField nl, const SpectralField& u, double rate, const Truncation& trunc) {
    auto lin = laplacian(u);
    apply_truncation(lin, trunc);
    nl.axpy(rate, lin);
    return nl;
}

}  // namespace detail

/// Projected momentum right-hand side, truncated to the Galerkin mask.
inline SpectralField rhs_velocity(const StateVector& s, const PhysicalParams& p, const Truncation& trunc,
                                  const ModelOptions& opts = {}) {
    auto nl = nonlinear_terms(s, p, trunc, opts);
    return detail::add_linear(std::move(nl.v), s.v, p.mu, trunc);
}

/// -eta curl curl B + curl(v x B), truncated.
inline SpectralField rhs_magnetic(const StateVector& s, const PhysicalParams& p, const Truncation& trunc,
                                  const ModelOptions& opts = {}) {
    auto nl = nonlinear_terms(s, p, trunc, opts);
    return detail::add_linear(std::move(nl.B), s.B, p.eta, trunc);
}

/// Magnetisation right-hand side, truncated.
inline SpectralField rhs_magnetisation(const StateVector& s, const PhysicalParams& p, const Truncation& trunc,
                                       const ModelOptions& opts = {}) {
    auto nl = nonlinear_terms(s, p, trunc, opts);
    if (opts.freeze_magnetisation) return SpectralField(s.grid());
    return detail::add_linear(std::move(nl.m), s.m, p.chi, trunc);
}

/// All three right-hand sides from one evaluation of the nonlinear terms.
inline StateRates rhs_all(const StateVector& s, const PhysicalParams& p, const Truncation& trunc,
                          const ModelOptions& opts = {}) {
    auto nl = nonlinear_terms(s, p, trunc, opts);
    const auto rates = linear_rates(p, opts);
    StateRates r;
    r.v = detail::add_linear(std::move(nl.v), s.v, rates[0], trunc);
    r.B = detail::add_linear(std::move(nl.B), s.B, rates[1], trunc);
    r.m = detail::add_linear(std::move(nl.m), s.m, rates[2], trunc);
    return r;
}

/// Projects state onto the Galerkin space: v, B, m truncated, v and B made solenoidal.
inline StateVector galerkin_projection(StateVector s, const Truncation& trunc) {
    apply_truncation(s.v, trunc);
    apply_truncation(s.B, trunc);
    apply_truncation(s.m, trunc);
    s.v = leray_project(s.v);
    s.B = leray_project(s.B);
    return s;
}

/// Advances states with one fixed configuration; holds the per-mode
/// integrating-factor tables so repeated steps do not rebuild them.
class Integrator {
public:
    Integrator(const Grid& grid, TimeStepper stepper, PhysicalParams params, Truncation trunc, ModelOptions opts = {})
        : grid_(grid), stepper_(stepper), params_(params), trunc_(trunc), opts_(opts) {
        params_.validate();
        trunc_.validate(grid_);
        stepper_.validate(grid_, params_);
        build_tables();
    }

    const TimeStepper& stepper() const noexcept { return stepper_; }
    const PhysicalParams& params() const noexcept { return params_; }
    const Truncation& truncation() const noexcept { return trunc_; }
    const ModelOptions& options() const noexcept { return opts_; }

    NonlinearTerms nonlinear(const StateVector& s) const { return nonlinear_terms(s, params_, trunc_, opts_, false); }

    /// One step of size dt. Throws BlowUpError if the result is not finite.
    StateVector step(const StateVector& s) const {
        require_same_grid(grid_, s.grid(), "step");
        StateVector next = [&] {
            switch (stepper_.scheme) {
                case Scheme::imex_euler: return step_imex_euler(s);
                case Scheme::etd_rk4: return step_etd_rk4(s);
                case Scheme::rk4_explicit: return step_rk4(s);
            }
            return step_etd_rk4(s);
        }();
        next.time = s.time + stepper_.dt;
        if (!next.v.all_finite() || !next.B.all_finite() || !next.m.all_finite())
            throw BlowUpError("non-finite state after step at t=" + std::to_string(s.time), s.time);
        for (auto* f : {&next.v, &next.B})
            if (divergence_residual(*f) > 1e-13) *f = leray_project(*f);
        return next;
    }

private:
    using Table = std::vector<detail::EtdCoefficients>;

    void build_tables() {
        const std::size_t n = grid_.n();
        const int max_k2 = 3 * static_cast<int>((n / 2) * (n / 2));
        k2_index_.resize(grid_.cube_size());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) k2_index_[grid_.flat(i, j, k)] = grid_.integer_k2(i, j, k);
        const auto rates = linear_rates(params_, opts_);
        const double s2 = grid_.wavenumber_scale() * grid_.wavenumber_scale();
        for (std::size_t f = 0; f < 3; ++f) {
            tables_[f].resize(static_cast<std::size_t>(max_k2) + 1);
            for (int k2 = 0; k2 <= max_k2; ++k2)
                tables_[f][static_cast<std::size_t>(k2)] = detail::etd_coefficients(-rates[f] * s2 * k2, stepper_.dt);
        }
    }

    template <class Fn>
    void per_mode(std::size_t field, SpectralField& out, Fn&& fn) const {
        const auto& table = tables_[field];
        const std::size_t size = grid_.cube_size();
        for (std::size_t c = 0; c < 3; ++c) {
            auto data = out.component(c);
            for (std::size_t q = 0; q < size; ++q) data[q] = fn(table[static_cast<std::size_t>(k2_index_[q])], c, q);
        }
    }

    static std::array<const SpectralField*, 3> fields(const StateVector& s) { return {&s.v, &s.B, &s.m}; }
    static std::array<SpectralField*, 3> fields(StateVector& s) { return {&s.v, &s.B, &s.m}; }
    static std::array<const SpectralField*, 3> fields(const NonlinearTerms& n) { return {&n.v, &n.B, &n.m}; }

    StateVector step_imex_euler(const StateVector& s) const {
        const auto nl = nonlinear(s);
        StateVector out(grid_, s.time);
        const double dt = stepper_.dt;
        for (std::size_t f = 0; f < 3; ++f) {
            const auto u = fields(s)[f]->coeffs();
            const auto nv = fields(nl)[f]->coeffs();
            const std::size_t size = grid_.cube_size();
            per_mode(f, *fields(out)[f], [&](const detail::EtdCoefficients& e, std::size_t c, std::size_t q) {
                const std::size_t idx = c * size + q;
                return e.e * (u[idx] + dt * nv[idx]);
            });
        }
        return out;
    }

    StateVector step_etd_rk4(const StateVector& s) const {
        const std::size_t size = grid_.cube_size();
        const auto nu = nonlinear(s);
        StateVector a(grid_, s.time + 0.5 * stepper_.dt);
        for (std::size_t f = 0; f < 3; ++f) {
            const auto u = fields(s)[f]->coeffs();
            const auto n0 = fields(nu)[f]->coeffs();
            per_mode(f, *fields(a)[f], [&](const detail::EtdCoefficients& e, std::size_t c, std::size_t q) {
                const std::size_t idx = c * size + q;
                return e.e_half * u[idx] + e.q * n0[idx];
            });
        }
        const auto na = nonlinear(a);
        StateVector b(grid_, a.time);
        for (std::size_t f = 0; f < 3; ++f) {
            const auto u = fields(s)[f]->coeffs();
            const auto n1 = fields(na)[f]->coeffs();
            per_mode(f, *fields(b)[f], [&](const detail::EtdCoefficients& e, std::size_t c, std::size_t q) {
                const std::size_t idx = c * size + q;
                return e.e_half * u[idx] + e.q * n1[idx];
            });
        }
        const auto nb = nonlinear(b);
        StateVector cst(grid_, s.time + stepper_.dt);
        for (std::size_t f = 0; f < 3; ++f) {
            const auto av = fields(a)[f]->coeffs();
            const auto n0 = fields(nu)[f]->coeffs();
            const auto n2 = fields(nb)[f]->coeffs();
            per_mode(f, *fields(cst)[f], [&](const detail::EtdCoefficients& e, std::size_t c, std::size_t q) {
                const std::size_t idx = c * size + q;
                return e.e_half * av[idx] + e.q * (2.0 * n2[idx] - n0[idx]);
            });
        }
        const auto nc = nonlinear(cst);
        StateVector out(grid_, s.time);
        for (std::size_t f = 0; f < 3; ++f) {
            const auto u = fields(s)[f]->coeffs();
            const auto n0 = fields(nu)[f]->coeffs();
            const auto n1 = fields(na)[f]->coeffs();
            const auto n2 = fields(nb)[f]->coeffs();
            const auto n3 = fields(nc)[f]->coeffs();
            per_mode(f, *fields(out)[f], [&](const detail::EtdCoefficients& e, std::size_t c, std::size_t q) {
                const std::size_t idx = c * size + q;
                return e.e * u[idx] + e.f1 * n0[idx] + 2.0 * e.f2 * (n1[idx] + n2[idx]) + e.f3 * n3[idx];
            });
        }
        return out;
    }

    // Diffusion acts on every mode, as the integrating factor does in the
    // other schemes; only the nonlinear part is confined to the mask.
    StateRates full_rhs(const StateVector& s) const {
        auto nl = nonlinear(s);
        const auto rates = linear_rates(params_, opts_);
        nl.v.axpy(rates[0], laplacian(s.v));
        nl.B.axpy(rates[1], laplacian(s.B));
        nl.m.axpy(rates[2], laplacian(s.m));
        return StateRates{std::move(nl.v), std::move(nl.B), std::move(nl.m)};
    }

    static StateVector offset(const StateVector& s, double h, const StateRates& k) {
        StateVector out = s;
        out.v.axpy(h, k.v);
        out.B.axpy(h, k.B);
        out.m.axpy(h, k.m);
        out.time = s.time + h;
        return out;
    }

    StateVector step_rk4(const StateVector& s) const {
        const double h = stepper_.dt;
        const auto k1 = full_rhs(s);
        const auto k2 = full_rhs(offset(s, 0.5 * h, k1));
        const auto k3 = full_rhs(offset(s, 0.5 * h, k2));
        const auto k4 = full_rhs(offset(s, h, k3));
        StateVector out = s;
        for (auto [u, a, b, c, d] : {std::tuple{&out.v, &k1.v, &k2.v, &k3.v, &k4.v},
                                     std::tuple{&out.B, &k1.B, &k2.B, &k3.B, &k4.B},
                                     std::tuple{&out.m, &k1.m, &k2.m, &k3.m, &k4.m}}) {
            u->axpy(h / 6.0, *a);
            u->axpy(h / 3.0, *b);
            u->axpy(h / 3.0, *c);
            u->axpy(h / 6.0, *d);
        }
        return out;
    }

    Grid grid_;
    TimeStepper stepper_;
    PhysicalParams params_;
    Truncation trunc_;
    ModelOptions opts_;
    std::vector<int> k2_index_;
    std::array<Table, 3> tables_;
};

/// Advances s by one step of stepper.dt.
inline StateVector step(const StateVector& s, const TimeStepper& stepper, const PhysicalParams& p,
                        const Truncation& trunc, const ModelOptions& opts = {}) {
    return Integrator(s.grid(), stepper, p, trunc, opts).step(s);
}

struct BlowUp {
    double last_valid_time = 0.0;
    std::size_t last_valid_step = 0;
    std::string reason;
};

struct SimulationResult {
    Trajectory trajectory;
    DiagnosticsRecord diagnostics;
    StateVector final_state;
    std::size_t steps_taken = 0;
    double dt_used = 0.0;
    std::optional<BlowUp> blow_up;
};

struct SimulateOptions {
    std::size_t diagnostics_every = 1;
    /// Keep recorded states in SimulationResult::trajectory.
    bool keep_states = true;
    /// Called for every recorded state (including the initial one); must not mutate it.
    std::function<void(std::size_t step, const StateVector&)> on_record;
    /// A state norm above this multiple of the initial norm counts as blow-up.
    double blow_up_factor = 1e8;
};

/// Number of steps used to reach t_end: the smallest count whose step does not exceed dt.
inline std::size_t step_count(double t0, double t_end, double dt) {
    const double span = t_end - t0;
    if (span <= 0.0) return 0;
    return static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
}

inline double state_norm(const StateVector& s) {
    return std::sqrt(inner(s.v, s.v) + inner(s.B, s.B) + inner(s.m, s.m));
}

/// Integrates from s0 to t_end. The step is shortened (never lengthened) so an
/// integer number of steps lands on t_end. Blow-up ends the run early and is
/// reported in the result, with everything recorded up to that point kept.
inline SimulationResult simulate(const StateVector& s0, double t_end, const TimeStepper& stepper,
                                 const PhysicalParams& params, const Truncation& trunc,
                                 const SimulateOptions& sim = {}, const ModelOptions& opts = {}) {
    if (t_end < s0.time) throw Error("simulate: t_end precedes the initial time");
    if (sim.diagnostics_every == 0) throw Error("diagnostics_every must be positive");
    s0.check_grids();
    const std::size_t steps = step_count(s0.time, t_end, stepper.dt);
    TimeStepper effective = stepper;
    if (steps > 0) effective.dt = (t_end - s0.time) / static_cast<double>(steps);
    const Integrator integrator(s0.grid(), effective, params, trunc, opts);

    SimulationResult result;
    result.dt_used = effective.dt;
    auto record = [&](std::size_t k, const StateVector& s) {
        result.diagnostics.append(measure(s, rhs_all(s, params, trunc, opts), k));
        if (sim.keep_states) {
            result.trajectory.steps.push_back(k);
            result.trajectory.states.push_back(s);
        }
        if (sim.on_record) sim.on_record(k, s);
    };

    StateVector s = s0;
    record(0, s);
    const double norm0 = std::max(state_norm(s0), 1.0);
    for (std::size_t k = 1; k <= steps; ++k) {
        try {
            StateVector next = integrator.step(s);
            next.time = s0.time + static_cast<double>(k) * effective.dt;
            const double norm = state_norm(next);
            if (!(norm <= sim.blow_up_factor * norm0))
                throw BlowUpError("state norm exceeded " + format_double(sim.blow_up_factor) + " x its initial value",
                                  s.time);
            s = std::move(next);
        } catch (const BlowUpError& e) {
            result.blow_up = BlowUp{s.time, k - 1, e.what()};
            result.diagnostics.flag_blow_up(s.time);
            break;
        } catch (const NonFiniteError& e) {
            result.blow_up = BlowUp{s.time, k - 1, e.what()};
            result.diagnostics.flag_blow_up(s.time);
            break;
        }
        result.steps_taken = k;
        if (k % sim.diagnostics_every == 0) record(k, s);
    }
    result.final_state = std::move(s);
    return result;
}

}  // namespace fmhd
