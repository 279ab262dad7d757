// fmhd: command-line front end for the FMHD simulator and its studies.
//
// Exit status: 0 pass, 1 threshold failure, 2 blow-up reported,
// 3 usage or configuration error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fmhd/fmhd.hpp"

namespace {

constexpr int usage_error = 3;

struct ConfigFlags {
    std::string path;
    std::vector<std::string> overrides;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_option("--config", flags.path, "Config file (flat key = value)");
    cmd->add_option("--set", flags.overrides, "Override one key, e.g. --set grid.n=32 (repeatable)");
}

// flag > file > FMHD_OUTPUT_DIR > default
fmhd::SimConfig load_config(const ConfigFlags& flags) {
    fmhd::SimConfig c = fmhd::environment_defaults();
    if (!flags.path.empty()) {
        std::ifstream in(flags.path);
        if (!in) throw fmhd::ConfigError("cannot open config file " + flags.path);
        std::stringstream text;
        text << in.rdbuf();
        try {
            c = fmhd::apply_config(text.str(), c);
        } catch (const fmhd::ConfigError& e) {
            throw fmhd::ConfigError(flags.path + ": " + e.what());
        }
    }
    for (const auto& kv : flags.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw fmhd::ConfigError("--set expects key=value, got '" + kv + "'");
        try {
            c = fmhd::apply_config(kv, c);
        } catch (const fmhd::ConfigError& e) {
            throw fmhd::ConfigError("--set " + kv + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

int report(const fmhd::StudyResult& r) {
    fmhd::write_summary_text(std::cout, r);
    return fmhd::exit_code(r.outcome);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pseudo-spectral simulator for incompressible ferromagnetic MHD on a periodic box"};
    app.require_subcommand(1);

    ConfigFlags run_flags, conv_flags, stab_flags;
    auto* run = app.add_subcommand("run", "Simulate one configuration and write diagnostics");
    add_config_flags(run, run_flags);

    auto* conv = app.add_subcommand("convergence", "Galerkin truncation-refinement study");
    add_config_flags(conv, conv_flags);
    std::vector<double> k_list{4, 6, 8, 10};
    conv->add_option("--k", k_list, "Increasing truncations")->delimiter(',');

    auto* stab = app.add_subcommand("stability", "Twin-run continuous-dependence study");
    add_config_flags(stab, stab_flags);
    std::vector<double> deltas{1e-3, 1e-4, 1e-5, 1e-6};
    stab->add_option("--deltas", deltas, "Relative perturbations of v")->delimiter(',');

    auto* ident = app.add_subcommand("identities", "Check the vector-calculus identities");
    std::size_t ident_n = 32;
    std::uint64_t ident_seed = 7;
    bool mis_signed = false;
    ident->add_option("--n", ident_n, "Grid points per side");
    ident->add_option("--seed", ident_seed, "Random seed");
    ident->add_flag("--mis-signed", mis_signed, "Flip a sign in the curl-of-cross check (must fail)");

    auto* gron = app.add_subcommand("gronwall", "Evaluate the generalised Gronwall bound for g(s) = s^p");
    double alpha = 1.0, power = 15.0, beta_const = 1.0, t_query = 0.05;
    gron->add_option("--alpha", alpha, "Initial value (> 0)");
    gron->add_option("--g-power", power, "Exponent p >= 1 of g(s) = s^p");
    gron->add_option("--beta-const", beta_const, "Constant beta >= 0");
    gron->add_option("--t", t_query, "Query time (>= 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage_error;
    }

    try {
        if (*run) {
            const auto c = load_config(run_flags);
            return report(fmhd::run(c));
        }
        if (*conv) return report(fmhd::convergence_study(load_config(conv_flags), k_list));
        if (*stab) return report(fmhd::stability_study(load_config(stab_flags), deltas));
        if (*ident) {
            fmhd::IdentityOptions opts;
            opts.mis_signed_curl_cross = mis_signed;
            const auto r = fmhd::identity_command(fmhd::Grid(ident_n), ident_seed, &std::cout, opts);
            return fmhd::exit_code(r.outcome);
        }
        if (*gron) {
            if (!(t_query >= 0.0)) throw fmhd::ConfigError("--t must be >= 0");
            const auto g = fmhd::GrowthFunction::power(power);
            const auto beta = fmhd::constant_beta(beta_const, 0.0, std::max(t_query, 1e-300));
            const auto bound = fmhd::gronwall_bound(alpha, beta, g, t_query);
            std::cout << "integral of beta  " << fmhd::format_double(bound.beta_integral) << '\n'
                      << "G(inf)            " << fmhd::format_double(bound.G_infinity) << '\n'
                      << "bound             "
                      << (bound.value ? fmhd::format_double(*bound.value) : std::string("out-of-domain")) << '\n';
            if (g.G_infinity(alpha) < std::numeric_limits<double>::infinity() && beta_const > 0.0)
                std::cout << "breakdown time    " << fmhd::format_double(g.G_infinity(alpha) / beta_const) << '\n';
            return 0;
        }
    } catch (const fmhd::Error& e) {
        std::cerr << "fmhd: " << e.what() << '\n';
        return usage_error;
    } catch (const std::exception& e) {
        std::cerr << "fmhd: " << e.what() << '\n';
        return usage_error;
    }
    return usage_error;
}
