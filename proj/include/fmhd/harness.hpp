#pragma once

// Experiment drivers behind the command-line tool: a single run, the
// truncation-refinement study, the twin-run stability study and the identity
// suite. Every driver returns a StudyResult whose outcome maps onto the exit
// status contract (0 pass, 1 threshold failure, 2 blow-up).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fmhd/checkpoint.hpp"
#include "fmhd/config.hpp"
#include "fmhd/diagnostics.hpp"
#include "fmhd/dynamics.hpp"
#include "fmhd/gronwall.hpp"
#include "fmhd/identities.hpp"
#include "fmhd/random_state.hpp"

namespace fmhd {

enum class Outcome { pass = 0, fail = 1, blow_up = 2 };

inline int exit_code(Outcome o) { return static_cast<int>(o); }

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::pass: return "pass";
        case Outcome::fail: return "fail";
        case Outcome::blow_up: return "blow-up";
    }
    return "?";
}

struct CaseSummary {
    std::string label;
    /// pass, fail, inconclusive or blow-up.
    std::string status;
    std::vector<std::pair<std::string, double>> values;

    std::optional<double> value(std::string_view name) const {
        for (const auto& [k, v] : values)
            if (k == name) return v;
        return std::nullopt;
    }
};

struct StudyResult {
    std::string kind;
    Outcome outcome = Outcome::pass;
    std::string message;
    std::vector<CaseSummary> cases;

    void add_case(CaseSummary c) {
        for (const auto& existing : cases)
            if (existing.label == c.label) throw Error("duplicate case label '" + c.label + "'");
        cases.push_back(std::move(c));
    }
    const CaseSummary& at(std::string_view label) const {
        for (const auto& c : cases)
            if (c.label == label) return c;
        throw Error("no case labelled '" + std::string(label) + "'");
    }
    bool pass() const noexcept { return outcome == Outcome::pass; }
};

inline void write_summary_text(std::ostream& out, StudyResult result) {
    std::sort(result.cases.begin(), result.cases.end(),
              [](const CaseSummary& a, const CaseSummary& b) { return a.label < b.label; });
    out << result.kind << ": " << to_string(result.outcome);
    if (!result.message.empty()) out << " (" << result.message << ")";
    out << '\n';
    for (const auto& c : result.cases) {
        out << "  " << c.label << " [" << c.status << "]\n";
        for (const auto& [k, v] : c.values) out << "    " << std::left << std::setw(24) << k << format_double(v) << '\n';
    }
}

/// One row per case; value columns are the union of names in first-seen order.
inline void write_summary_csv(std::ostream& out, StudyResult result) {
    std::sort(result.cases.begin(), result.cases.end(),
              [](const CaseSummary& a, const CaseSummary& b) { return a.label < b.label; });
    std::vector<std::string> names;
    for (const auto& c : result.cases)
        for (const auto& kv : c.values)
            if (std::find(names.begin(), names.end(), kv.first) == names.end()) names.push_back(kv.first);
    out << "kind,label,status";
    for (const auto& n : names) out << ',' << csv_escape(n);
    out << "\r\n";
    for (const auto& c : result.cases) {
        out << csv_escape(result.kind) << ',' << csv_escape(c.label) << ',' << csv_escape(c.status);
        for (const auto& n : names) {
            out << ',';
            if (auto v = c.value(n)) out << format_double(*v);
        }
        out << "\r\n";
    }
}

inline void write_summary_files(const std::filesystem::path& dir, const StudyResult& result) {
    std::filesystem::create_directories(dir);
    std::ofstream txt(dir / "summary.txt", std::ios::binary);
    write_summary_text(txt, result);
    std::ofstream csv(dir / "summary.csv", std::ios::binary);
    write_summary_csv(csv, result);
    if (!txt || !csv) throw Error("cannot write summary files in " + dir.string());
}

/// Pointwise m / |m| at the collocation points.
inline SpectralField normalize_pointwise(const SpectralField& m) {
    PhysicalField p = to_physical(m);
    for (std::size_t q = 0; q < m.grid().cube_size(); ++q) {
        const double len = std::sqrt(p.at(0, q) * p.at(0, q) + p.at(1, q) * p.at(1, q) + p.at(2, q) * p.at(2, q));
        if (!(len > 0.0)) throw Error("normalize_pointwise: m vanishes at a collocation point");
        for (std::size_t c = 0; c < 3; ++c) p.at(c, q) /= len;
    }
    return to_spectral(p);
}

struct InitialData {
    StateVector state;
    /// max | |m|^2 - 1 | of the truncated magnetisation before re-normalisation.
    double truncation_unit_drift = 0.0;
};

/// Initial data for a config: v and B projected onto the truncation. With an
/// explicit truncation m is truncated and then re-normalised pointwise; at
/// full truncation it stays the normalised collocation field.
inline InitialData initial_data(const SimConfig& c) {
    StateVector s = random_state(c.grid(), c.seed, c.decay_exponent, c.initial_amplitude);
    const SpectralField m = s.m;
    s = galerkin_projection(std::move(s), c.truncation());
    InitialData out;
    if (c.k_max) {
        out.truncation_unit_drift = unit_drift(s.m);
        s.m = normalize_pointwise(s.m);
    } else {
        s.m = m;
    }
    out.state = std::move(s);
    return out;
}

inline StateVector initial_state(const SimConfig& c) { return initial_data(c).state; }

/// Thresholds a single run is judged against.
struct RunThresholds {
    double div_drift = 1e-12;
    double unit_drift = 1e-6;
};

struct GronwallEcho {
    /// Smallest C with E(t) <= E(0) + C int_0^t E^15 at every sample.
    double fitted_C = 0.0;
    /// Whether E(t) stayed below the resulting bound at every sample.
    bool holds = true;
    /// Finite-time breakdown of the bound, if it occurs within the samples.
    std::optional<double> breakdown_time;
};

/// Fits the inequality E(t) <= E(0) + C int E^15 to a recorded E series and
/// evaluates the matching Gronwall bound (g(s) = s^15, beta = C).
inline GronwallEcho gronwall_echo(const DiagnosticsRecord& record) {
    GronwallEcho echo;
    const auto& rows = record.rows();
    if (rows.size() < 2 || !(rows.front().E > 0.0)) return echo;
    const double e0 = rows.front().E;
    double integral = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        integral += 0.5 * (std::pow(rows[i - 1].E, 15) + std::pow(rows[i].E, 15)) * (rows[i].time - rows[i - 1].time);
        if (!std::isfinite(integral)) {
            echo.fitted_C = std::numeric_limits<double>::infinity();
            echo.holds = false;
            return echo;
        }
        if (integral > 0.0) echo.fitted_C = std::max(echo.fitted_C, (rows[i].E - e0) / integral);
    }
    const auto g = GrowthFunction::power(15.0);
    const auto beta = constant_beta(echo.fitted_C, rows.front().time, rows.back().time);
    for (const auto& r : rows) {
        const auto bound = gronwall_bound(e0, beta, g, r.time);
        if (bound.in_domain() && r.E > *bound.value * (1.0 + 1e-12)) echo.holds = false;
    }
    echo.breakdown_time = gronwall_breakdown_time(e0, beta, g);
    return echo;
}

inline std::string checkpoint_name(std::size_t step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "step_%08zu.fmhd", step);
    return buf;
}

struct RunOutput {
    StudyResult result;
    SimulationResult simulation;
};

/// Simulates one config, writing diagnostics.csv, checkpoints and the summary
/// files into config.output_dir (unless write_files is false).
inline RunOutput run_detailed(const SimConfig& config, bool write_files = true, RunThresholds limits = {}) {
    config.validate();
    const std::filesystem::path dir = config.output_dir;
    if (write_files && config.checkpoints) std::filesystem::create_directories(dir / "checkpoints");
    SimulateOptions sim;
    sim.diagnostics_every = config.diagnostics_every;
    sim.keep_states = false;
    if (write_files && config.checkpoints)
        sim.on_record = [&](std::size_t step, const StateVector& s) {
            write_checkpoint(dir / "checkpoints" / checkpoint_name(step), s);
        };
    RunOutput out;
    const InitialData init = initial_data(config);
    out.simulation = simulate(init.state, config.t_end, config.stepper(), config.params,
                              config.truncation(), sim, config.model());
    const auto& sr = out.simulation;
    const auto& d = sr.diagnostics;

    CaseSummary c{"run", "pass", {}};
    c.values = {{"steps", double(sr.steps_taken)},
                {"dt", sr.dt_used},
                {"t_final", d.back().time},
                {"max_div_drift_v", d.max_of(&DiagnosticsRow::div_drift_v)},
                {"max_div_drift_B", d.max_of(&DiagnosticsRow::div_drift_B)},
                {"max_unit_drift_m", d.max_of(&DiagnosticsRow::unit_drift_m)},
                {"E_initial", d.rows().front().E},
                {"E_final", d.back().E},
                {"J_initial", d.rows().front().J},
                {"J_final", d.back().J},
                {"initial_truncation_unit_drift", init.truncation_unit_drift}};
    const auto echo = gronwall_echo(d);
    c.values.emplace_back("gronwall_fitted_C", echo.fitted_C);
    c.values.emplace_back("gronwall_echo_holds", echo.holds ? 1.0 : 0.0);
    if (echo.breakdown_time) c.values.emplace_back("gronwall_breakdown_time", *echo.breakdown_time);

    out.result.kind = "run";
    if (sr.blow_up) {
        c.status = "blow-up";
        c.values.emplace_back("T_star_observed", sr.blow_up->last_valid_time);
        out.result.outcome = Outcome::blow_up;
        out.result.message = "blow-up after t = " + format_double(sr.blow_up->last_valid_time) + ": " +
                             sr.blow_up->reason;
    } else {
        std::vector<std::string> failed;
        if (!(*c.value("max_div_drift_v") < limits.div_drift)) failed.push_back("div_drift_v");
        if (!(*c.value("max_div_drift_B") < limits.div_drift)) failed.push_back("div_drift_B");
        if (!(*c.value("max_unit_drift_m") < limits.unit_drift)) failed.push_back("unit_drift_m");
        if (!failed.empty()) {
            c.status = "fail";
            out.result.outcome = Outcome::fail;
            out.result.message = "threshold exceeded:";
            for (const auto& f : failed) out.result.message += " " + f;
        }
    }
    out.result.add_case(std::move(c));

    if (write_files) {
        std::filesystem::create_directories(dir);
        std::ofstream csv(dir / "diagnostics.csv", std::ios::binary);
        write_csv(csv, d);
        if (!csv) throw Error("cannot write " + (dir / "diagnostics.csv").string());
        write_summary_files(dir, out.result);
    }
    return out;
}

inline StudyResult run(const SimConfig& config, bool write_files = true) {
    return run_detailed(config, write_files).result;
}

/// Euclidean combination of the L2 differences of v, B and m.
inline double l2_state_difference(const StateVector& a, const StateVector& b) {
    auto sq = [](double x) { return x * x; };
    return std::sqrt(sq(l2_norm(a.v - b.v)) + sq(l2_norm(a.B - b.B)) + sq(l2_norm(a.m - b.m)));
}

inline std::string truncation_label(double k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "k=%05.2f", k);
    return buf;
}

struct ConvergenceThresholds {
    double last_over_first = 1e-2;
};

/// Runs every truncation in k_list from the same initial data, projected onto
/// the smallest truncation, and compares consecutive final states.
inline StudyResult convergence_study(const SimConfig& config, const std::vector<double>& k_list,
                                     bool write_files = true, ConvergenceThresholds limits = {}) {
    config.validate();
    if (k_list.size() < 2) throw ConfigError("need >= 2 truncations");
    for (std::size_t i = 0; i < k_list.size(); ++i) {
        Truncation{k_list[i]}.validate(config.grid());
        if (i > 0 && !(k_list[i] > k_list[i - 1])) throw ConfigError("truncations must be strictly increasing");
    }
    // Shared data must be representable at the smallest truncation, so m is
    // truncated without re-normalisation; its drift is reported.
    const Truncation smallest{k_list.front()};
    const StateVector s0 = galerkin_projection(
        random_state(config.grid(), config.seed, config.decay_exponent, config.initial_amplitude), smallest);
    const double initial_drift = unit_drift(s0.m);

    StudyResult result;
    result.kind = "convergence";
    SimulateOptions sim;
    sim.diagnostics_every = config.diagnostics_every;
    sim.keep_states = false;
    std::vector<StateVector> finals;
    std::vector<double> d;
    bool blew_up = false;
    for (double k : k_list) {
        const auto sr = simulate(s0, config.t_end, config.stepper(), config.params, Truncation{k}, sim, config.model());
        CaseSummary c{truncation_label(k), "pass", {}};
        c.values = {{"k_max", k},
                    {"l2_v", l2_norm(sr.final_state.v)},
                    {"l2_B", l2_norm(sr.final_state.B)},
                    {"l2_m", l2_norm(sr.final_state.m)},
                    {"max_unit_drift_m", sr.diagnostics.max_of(&DiagnosticsRow::unit_drift_m)},
                    {"max_div_drift_v", sr.diagnostics.max_of(&DiagnosticsRow::div_drift_v)},
                    {"max_div_drift_B", sr.diagnostics.max_of(&DiagnosticsRow::div_drift_B)},
                    {"initial_unit_drift_m", initial_drift}};
        if (sr.blow_up) {
            c.status = "blow-up";
            c.values.emplace_back("T_star_observed", sr.blow_up->last_valid_time);
            blew_up = true;
        } else if (!finals.empty()) {
            d.push_back(l2_state_difference(sr.final_state, finals.back()));
            c.values.emplace_back("d_from_previous", d.back());
        }
        finals.push_back(sr.final_state);
        result.add_case(std::move(c));
    }

    if (blew_up) {
        result.outcome = Outcome::blow_up;
        result.message = "a truncation blew up";
    } else {
        const bool all_zero = std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; });
        bool decreasing = true;
        for (std::size_t j = 1; j < d.size(); ++j) decreasing = decreasing && d[j] < d[j - 1];
        const double ratio = d.front() > 0.0 ? d.back() / d.front() : 0.0;
        std::ostringstream msg;
        msg << "d_last/d_first = " << format_double(ratio) << (decreasing ? ", strictly decreasing" : ", not decreasing");
        result.message = msg.str();
        if (!all_zero && !(decreasing && ratio < limits.last_over_first)) result.outcome = Outcome::fail;
    }
    if (write_files) write_summary_files(config.output_dir, result);
    return result;
}

inline std::string delta_label(double delta) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "delta=%.3e", delta);
    return buf;
}

struct StabilityThresholds {
    double max_spread = 4.0;
};

/// Evolves the base data and, for every delta, a twin with v scaled by
/// (1 + delta), in lockstep; each twin's metric is the stability ratio.
inline StudyResult stability_study(const SimConfig& config, const std::vector<double>& deltas,
                                   bool write_files = true, StabilityThresholds limits = {}) {
    config.validate();
    if (deltas.empty()) throw ConfigError("need at least one delta");
    for (double delta : deltas)
        if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("deltas must be nonnegative");

    const StateVector base0 = initial_state(config);
    const std::size_t steps = step_count(0.0, config.t_end, config.stepper().dt);
    TimeStepper stepper = config.stepper();
    if (steps > 0) stepper.dt = config.t_end / double(steps);
    const Integrator integrator(config.grid(), stepper, config.params, config.truncation(), config.model());

    struct Twin {
        double delta;
        StateVector state;
        StabilityTracker tracker;
        std::optional<double> blow_up;
    };
    std::vector<Twin> twins;
    for (double delta : deltas) {
        Twin t{delta, base0, {}, std::nullopt};
        t.state.v *= 1.0 + delta;
        t.tracker.observe(base0, t.state);
        twins.push_back(std::move(t));
    }
    StateVector base = base0;
    std::optional<double> base_blow_up;
    for (std::size_t k = 1; k <= steps && !base_blow_up; ++k) {
        const double t = double(k) * stepper.dt;
        try {
            base = integrator.step(base);
            base.time = t;
        } catch (const Error&) {
            base_blow_up = base.time;
            break;
        }
        for (auto& twin : twins) {
            if (twin.blow_up) continue;
            try {
                twin.state = integrator.step(twin.state);
                twin.state.time = t;
                twin.tracker.observe(base, twin.state);
            } catch (const Error&) {
                twin.blow_up = twin.state.time;
            }
        }
    }

    StudyResult result;
    result.kind = "stability";
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool finite = true;
    std::size_t conclusive = 0;
    for (auto& twin : twins) {
        const auto metric = twin.tracker.result();
        CaseSummary c{delta_label(twin.delta), "pass", {}};
        c.values = {{"delta", twin.delta},
                    {"initial_diff", metric.initial_diff},
                    {"sup_diff", metric.sup_diff},
                    {"ratio", metric.ratio},
                    {"degenerate", metric.degenerate ? 1.0 : 0.0}};
        const auto blow = base_blow_up ? base_blow_up : twin.blow_up;
        if (blow) {
            c.status = "inconclusive";
            c.values.emplace_back("T_star_observed", *blow);
        } else if (!metric.degenerate) {
            ++conclusive;
            if (!std::isfinite(metric.ratio)) {
                finite = false;
                c.status = "fail";
            }
            lo = std::min(lo, metric.ratio);
            hi = std::max(hi, metric.ratio);
        }
        result.add_case(std::move(c));
    }
    const bool any_blow = base_blow_up || std::any_of(twins.begin(), twins.end(), [](const Twin& t) {
                              return t.blow_up.has_value();
                          });
    if (conclusive == 0) {
        result.outcome = any_blow ? Outcome::blow_up : Outcome::pass;
        result.message = any_blow ? "every case blew up" : "only degenerate cases";
    } else {
        const double spread = hi / lo;
        result.message = "max/min ratio = " + format_double(spread);
        if (!finite || !(spread < limits.max_spread)) result.outcome = Outcome::fail;
    }
    if (write_files) write_summary_files(config.output_dir, result);
    return result;
}

/// Identity suite as a study: one case per identity.
inline StudyResult identity_command(const Grid& grid, std::uint64_t seed, std::ostream* table = nullptr,
                                    const IdentityOptions& opts = {}) {
    const auto report = identity_suite(grid, seed, opts);
    if (table) write_identity_table(*table, report);
    StudyResult result;
    result.kind = "identities";
    for (const auto& row : report.rows)
        result.add_case({row.name, row.pass() ? "pass" : "fail", {{"residual", row.residual}, {"threshold", row.threshold}}});
    if (!report.pass()) result.outcome = Outcome::fail;
    return result;
}

}  // namespace fmhd
