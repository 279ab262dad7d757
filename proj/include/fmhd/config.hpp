#pragma once

// Flat "key = value" configuration with dotted section names, e.g.
//
//   grid.n = 32
//   params.mu = 0.5      # comment
//   stepper.dt = auto
//
// Unknown or repeated keys are errors.

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "fmhd/diagnostics.hpp"
#include "fmhd/dynamics.hpp"

namespace fmhd {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct SimConfig {
    std::size_t n = 16;
    double box_length = 2.0 * std::numbers::pi;
    double dealias_fraction = 2.0 / 3.0;
    PhysicalParams params;
    Scheme scheme = Scheme::etd_rk4;
    /// Empty means "auto" (default_time_step).
    std::optional<double> dt;
    bool enforce_stability = true;
    /// Empty means "full" (the dealias cutoff).
    std::optional<double> k_max;
    double t_end = 1.0;
    std::uint64_t seed = 1;
    double initial_amplitude = 0.01;
    double decay_exponent = 6.0;
    std::size_t diagnostics_every = 1;
    std::string output_dir = "fmhd-output";
    bool nonlinear = true;
    bool freeze_m = false;
    bool checkpoints = true;

    Grid grid() const { return Grid(n, box_length, dealias_fraction); }
    TimeStepper stepper() const {
        return TimeStepper{scheme, dt ? *dt : default_time_step(grid(), params), enforce_stability};
    }
    Truncation truncation() const { return k_max ? Truncation{*k_max} : Truncation::full(grid()); }
    ModelOptions model() const { return ModelOptions{nonlinear, freeze_m}; }

    void validate() const;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline constexpr std::array<std::string_view, 20> config_keys{
    "grid.n",         "grid.box_length",     "grid.dealias_fraction", "params.mu",
    "params.eta",     "params.gamma",        "params.chi",            "stepper.scheme",
    "stepper.dt",     "stepper.enforce_stability", "truncation.k_max", "t_end",
    "seed",           "initial_amplitude",   "decay_exponent",        "diagnostics_every",
    "output_dir",     "model.nonlinear",     "model.freeze_m",        "output.checkpoints"};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_real(std::string_view key, std::string_view text) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(x))
        throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
    return x;
}

inline std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError(std::string(key) + ": expected a nonnegative integer, got '" + std::string(text) + "'");
    return x;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(text) + "'");
}

}  // namespace detail

/// Sets one key from its text form. Throws ConfigError naming the key.
inline void set_config_value(SimConfig& c, std::string_view key, std::string_view raw) {
    using namespace detail;
    const std::string_view value = trim(raw);
    if (value.empty()) throw ConfigError(std::string(key) + ": missing value");
    if (key == "grid.n") c.n = parse_unsigned(key, value);
    else if (key == "grid.box_length") c.box_length = parse_real(key, value);
    else if (key == "grid.dealias_fraction") c.dealias_fraction = parse_real(key, value);
    else if (key == "params.mu") c.params.mu = parse_real(key, value);
    else if (key == "params.eta") c.params.eta = parse_real(key, value);
    else if (key == "params.gamma") c.params.gamma = parse_real(key, value);
    else if (key == "params.chi") c.params.chi = parse_real(key, value);
    else if (key == "stepper.scheme") {
        try {
            c.scheme = parse_scheme(std::string(value));
        } catch (const Error& e) {
            throw ConfigError(std::string(key) + ": " + e.what());
        }
    } else if (key == "stepper.dt") c.dt = value == "auto" ? std::nullopt : std::optional(parse_real(key, value));
    else if (key == "stepper.enforce_stability") c.enforce_stability = parse_bool(key, value);
    else if (key == "truncation.k_max") c.k_max = value == "full" ? std::nullopt : std::optional(parse_real(key, value));
    else if (key == "t_end") c.t_end = parse_real(key, value);
    else if (key == "seed") c.seed = parse_unsigned(key, value);
    else if (key == "initial_amplitude") c.initial_amplitude = parse_real(key, value);
    else if (key == "decay_exponent") c.decay_exponent = parse_real(key, value);
    else if (key == "diagnostics_every") c.diagnostics_every = parse_unsigned(key, value);
    else if (key == "output_dir") c.output_dir = std::string(value);
    else if (key == "model.nonlinear") c.nonlinear = parse_bool(key, value);
    else if (key == "model.freeze_m") c.freeze_m = parse_bool(key, value);
    else if (key == "output.checkpoints") c.checkpoints = parse_bool(key, value);
    else throw ConfigError("unknown key '" + std::string(key) + "'");
}

inline void SimConfig::validate() const {
    auto check = [](const char* key, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            const std::string what = e.what();
            throw ConfigError(what.starts_with(key) ? what : std::string(key) + ": " + what);
        }
    };
    check("grid", [&] { (void)grid(); });
    check("params", [&] { params.validate(); });
    check("stepper.dt", [&] { stepper().validate(grid(), params); });
    check("truncation.k_max", [&] { truncation().validate(grid()); });
    if (!(t_end > 0.0)) throw ConfigError("t_end: must be positive");
    if (!(initial_amplitude >= 0.0)) throw ConfigError("initial_amplitude: must be >= 0");
    if (!(decay_exponent >= 4.0)) throw ConfigError("decay_exponent: must be >= 4");
    if (diagnostics_every == 0) throw ConfigError("diagnostics_every: must be positive");
    if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
}

/// Applies a document on top of `base` without validating the result, so
/// several documents (file, then flags) can be layered first.
inline SimConfig apply_config(std::string_view text, SimConfig base) {
    std::array<bool, config_keys.size()> seen{};
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
        const std::string_view key = detail::trim(line.substr(0, eq));
        std::size_t index = config_keys.size();
        for (std::size_t i = 0; i < config_keys.size(); ++i)
            if (config_keys[i] == key) index = i;
        if (index == config_keys.size()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
        if (seen[index]) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
        seen[index] = true;
        try {
            set_config_value(base, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return base;
}

/// Applies a document on top of `base` and validates the result.
inline SimConfig parse_config(std::string_view text, SimConfig base = {}) {
    base = apply_config(text, std::move(base));
    base.validate();
    return base;
}

/// Writes every key, so parse_config(emit_config(c)) == c.
inline std::string emit_config(const SimConfig& c) {
    std::ostringstream out;
    auto b = [](bool x) { return x ? "true" : "false"; };
    out << "grid.n = " << c.n << '\n'
        << "grid.box_length = " << format_double(c.box_length) << '\n'
        << "grid.dealias_fraction = " << format_double(c.dealias_fraction) << '\n'
        << "params.mu = " << format_double(c.params.mu) << '\n'
        << "params.eta = " << format_double(c.params.eta) << '\n'
        << "params.gamma = " << format_double(c.params.gamma) << '\n'
        << "params.chi = " << format_double(c.params.chi) << '\n'
        << "stepper.scheme = " << to_string(c.scheme) << '\n'
        << "stepper.dt = " << (c.dt ? format_double(*c.dt) : "auto") << '\n'
        << "stepper.enforce_stability = " << b(c.enforce_stability) << '\n'
        << "truncation.k_max = " << (c.k_max ? format_double(*c.k_max) : "full") << '\n'
        << "t_end = " << format_double(c.t_end) << '\n'
        << "seed = " << c.seed << '\n'
        << "initial_amplitude = " << format_double(c.initial_amplitude) << '\n'
        << "decay_exponent = " << format_double(c.decay_exponent) << '\n'
        << "diagnostics_every = " << c.diagnostics_every << '\n'
        << "output_dir = " << c.output_dir << '\n'
        << "model.nonlinear = " << b(c.nonlinear) << '\n'
        << "model.freeze_m = " << b(c.freeze_m) << '\n'
        << "output.checkpoints = " << b(c.checkpoints) << '\n';
    return out.str();
}

/// Defaults with FMHD_OUTPUT_DIR applied, the base that files and flags override.
inline SimConfig environment_defaults() {
    SimConfig c;
    if (const char* dir = std::getenv("FMHD_OUTPUT_DIR"); dir && *dir) c.output_dir = dir;
    return c;
}

}  // namespace fmhd
