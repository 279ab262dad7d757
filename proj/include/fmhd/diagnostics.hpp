#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fmhd/calculus.hpp"
#include "fmhd/field.hpp"
#include "fmhd/transform.hpp"

namespace fmhd {

/// Time derivatives (d/dt v, d/dt B, d/dt m) at one instant.
struct StateRates {
    SpectralField v;
    SpectralField B;
    SpectralField m;
};

/// (sum_k (1 + |k|^2)^order |u(k)|^2 * volume)^(1/2); order 0 is the L2 norm.
template <std::size_t C>
double sobolev_norm(const SpectralFieldT<C>& u, int order) {
    if (order < 0 || order > 3) throw Error("sobolev_norm: order must be in 0..3");
    double sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        auto data = u.component(c);
        detail::for_each_mode(u.grid(), [&](std::size_t q, double, double, double, double k2) {
            const double w = std::pow(1.0 + k2, order);
            sum += w * std::norm(data[q]);
        });
    }
    return std::sqrt(sum * u.grid().volume());
}

/// ||v||_H2^2 + ||B||_H2^2 + ||m||_H3^2 + ||v'||^2 + ||B'||^2 + ||m'||_H1^2.
inline double energy_J(const StateVector& s, const StateRates& rates) {
    auto sq = [](double x) { return x * x; };
    return sq(sobolev_norm(s.v, 2)) + sq(sobolev_norm(s.B, 2)) + sq(sobolev_norm(s.m, 3)) +
           sq(sobolev_norm(rates.v, 0)) + sq(sobolev_norm(rates.B, 0)) + sq(sobolev_norm(rates.m, 1));
}

/// ||v||_H1^2 + ||B||_H1^2 + ||m||_H2^2 + ||v'||^2 + ||B'||^2 + ||m'||_H1^2.
inline double energy_E(const StateVector& s, const StateRates& rates) {
    auto sq = [](double x) { return x * x; };
    return sq(sobolev_norm(s.v, 1)) + sq(sobolev_norm(s.B, 1)) + sq(sobolev_norm(s.m, 2)) +
           sq(sobolev_norm(rates.v, 0)) + sq(sobolev_norm(rates.B, 0)) + sq(sobolev_norm(rates.m, 1));
}

/// max over collocation points of | |m|^2 - 1 |.
inline double unit_drift(const SpectralField& m) {
    const auto phys = detail::to_physical_fast(m);
    double worst = 0.0;
    for (std::size_t q = 0; q < m.grid().cube_size(); ++q) {
        const double a = phys.at(0, q), b = phys.at(1, q), c = phys.at(2, q);
        worst = std::max(worst, std::abs(a * a + b * b + c * c - 1.0));
    }
    return worst;
}

struct DiagnosticsRow {
    std::size_t step = 0;
    double time = 0.0;
    double l2_v = 0, h1_v = 0, h2_v = 0;
    double l2_B = 0, h1_B = 0, h2_B = 0;
    double h1_m = 0, h2_m = 0, h3_m = 0;
    double dt_v_l2 = 0, dt_B_l2 = 0, dt_m_h1 = 0;
    double J = 0, E = 0;
    double div_drift_v = 0, div_drift_B = 0, unit_drift_m = 0;
};

inline DiagnosticsRow measure(const StateVector& s, const StateRates& rates, std::size_t step) {
    DiagnosticsRow r;
    r.step = step;
    r.time = s.time;
    r.l2_v = sobolev_norm(s.v, 0);
    r.h1_v = sobolev_norm(s.v, 1);
    r.h2_v = sobolev_norm(s.v, 2);
    r.l2_B = sobolev_norm(s.B, 0);
    r.h1_B = sobolev_norm(s.B, 1);
    r.h2_B = sobolev_norm(s.B, 2);
    r.h1_m = sobolev_norm(s.m, 1);
    r.h2_m = sobolev_norm(s.m, 2);
    r.h3_m = sobolev_norm(s.m, 3);
    r.dt_v_l2 = sobolev_norm(rates.v, 0);
    r.dt_B_l2 = sobolev_norm(rates.B, 0);
    r.dt_m_h1 = sobolev_norm(rates.m, 1);
    r.J = energy_J(s, rates);
    r.E = energy_E(s, rates);
    r.div_drift_v = divergence_residual(s.v);
    r.div_drift_B = divergence_residual(s.B);
    r.unit_drift_m = unit_drift(s.m);
    return r;
}

/// Append-only time series of diagnostics rows.
class DiagnosticsRecord {
public:
    static constexpr std::array<std::string_view, 19> columns{
        "step",    "time",    "l2_v",    "h1_v", "h2_v", "l2_B",        "h1_B",        "h2_B",        "h1_m",
        "h2_m",    "h3_m",    "dt_v_l2", "dt_B_l2", "dt_m_h1", "J", "E", "div_drift_v", "div_drift_B",
        "unit_drift_m"};

    void append(const DiagnosticsRow& row) {
        if (!rows_.empty() && !(row.time > rows_.back().time))
            throw Error("DiagnosticsRecord: times must be strictly increasing");
        rows_.push_back(row);
    }
    /// Marks that the run broke down after the last appended row.
    void flag_blow_up(double time) { blow_up_time_ = time; }

    const std::vector<DiagnosticsRow>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    const DiagnosticsRow& back() const { return rows_.back(); }
    std::optional<double> blow_up_time() const noexcept { return blow_up_time_; }

    double max_of(double DiagnosticsRow::*field) const {
        double m = 0.0;
        for (const auto& r : rows_) m = std::max(m, r.*field);
        return m;
    }

private:
    std::vector<DiagnosticsRow> rows_;
    std::optional<double> blow_up_time_;
};

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double x) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc()) throw Error("format_double failed");
    return std::string(buf.data(), ptr);
}

/// RFC 4180 quoting: fields with a comma, quote, CR or LF are quoted.
inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void write_csv(std::ostream& out, const DiagnosticsRecord& record) {
    for (std::size_t c = 0; c < DiagnosticsRecord::columns.size(); ++c)
        out << (c ? "," : "") << csv_escape(DiagnosticsRecord::columns[c]);
    out << "\r\n";
    for (const auto& r : record.rows()) {
        out << r.step;
        for (double x : {r.time, r.l2_v, r.h1_v, r.h2_v, r.l2_B, r.h1_B, r.h2_B, r.h1_m, r.h2_m, r.h3_m, r.dt_v_l2,
                         r.dt_B_l2, r.dt_m_h1, r.J, r.E, r.div_drift_v, r.div_drift_B, r.unit_drift_m})
            out << ',' << format_double(x);
        out << "\r\n";
    }
}

/// Distance used by the continuous-dependence estimate:
/// ||v1 - v2||_L2 + ||B1 - B2||_L2 + ||m1 - m2||_H1.
inline double state_difference(const StateVector& a, const StateVector& b) {
    return sobolev_norm(a.v - b.v, 0) + sobolev_norm(a.B - b.B, 0) + sobolev_norm(a.m - b.m, 1);
}

struct StabilityMetric {
    double sup_diff = 0.0;
    double initial_diff = 0.0;
    double ratio = 1.0;
    /// Set when the initial difference is zero and ratio is reported as 1.
    bool degenerate = false;
};

/// Accumulates the twin-run metric one shared time at a time; the first
/// observation is the initial difference.
class StabilityTracker {
public:
    void observe(const StateVector& a, const StateVector& b) {
        require_same_grid(a.grid(), b.grid(), "stability_metric");
        if (a.time != b.time) throw Error("stability_metric: trajectories are sampled at different times");
        const double d = state_difference(a, b);
        if (count_ == 0) initial_ = d;
        sup_ = std::max(sup_, d);
        ++count_;
    }
    std::size_t count() const noexcept { return count_; }

    StabilityMetric result() const {
        if (count_ == 0) throw Error("stability_metric: no shared samples");
        StabilityMetric m;
        m.sup_diff = sup_;
        m.initial_diff = initial_;
        if (initial_ == 0.0) {
            m.degenerate = true;
            m.ratio = sup_ == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
        } else {
            m.ratio = sup_ / initial_;
        }
        return m;
    }

private:
    double initial_ = 0.0;
    double sup_ = 0.0;
    std::size_t count_ = 0;
};

/// States recorded by a simulation, in time order; the first entry is the
/// initial state.
struct Trajectory {
    std::vector<std::size_t> steps;
    std::vector<StateVector> states;

    std::size_t size() const noexcept { return states.size(); }
    /// Number of recorded states reached by stepping (excludes the initial one).
    std::size_t advanced() const noexcept { return states.empty() ? 0 : states.size() - 1; }
};

inline StabilityMetric stability_metric(const Trajectory& a, const Trajectory& b) {
    if (a.size() != b.size()) throw Error("stability_metric: trajectories have different lengths");
    StabilityTracker tracker;
    for (std::size_t i = 0; i < a.size(); ++i) tracker.observe(a.states[i], b.states[i]);
    return tracker.result();
}

}  // namespace fmhd
