// Command-line front end: simulate pulse traces, fit single pulses, fit
// series, fingerprint the transport regime, and emit plot-ready tables.
//
// Exit codes: 0 ok, 2 input parse failure, 3 non-convergence,
// 4 insufficient data, 5 I/O failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tapfit/batch.hpp"
#include "tapfit/curves.hpp"
#include "tapfit/fingerprint.hpp"
#include "tapfit/fit.hpp"
#include "tapfit/preprocess.hpp"
#include "tapfit/report.hpp"
#include "tapfit/synth.hpp"
#include "tapfit/trace_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitInsufficientData = 4;
constexpr int kExitIo = 5;

namespace fs = std::filesystem;
using tapfit::ModelSelect;

struct CommonOpts {
    std::string input;
    std::string output;
    std::string model = "gdc";
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int max_iter = 500;
    double tol = 1e-12;
    std::string time_basis = "clock";
    std::optional<double> eta_scale;  // convert clock time to tau = t * eta
    double min_r2 = 0.5;
    int threads = 0;
};

ModelSelect parse_model(const std::string& m) {
    if (m == "sdc") return ModelSelect::Sdc;
    if (m == "gdc") return ModelSelect::Gdc;
    return ModelSelect::Both;
}

tapfit::SolverOptions solver_options(const CommonOpts& c) {
    tapfit::SolverOptions s;
    s.max_iterations = c.max_iter;
    s.ss_rel_tol = c.tol;
    s.time_basis = c.time_basis == "dimensionless" || c.eta_scale
                       ? tapfit::TimeBasis::Dimensionless
                       : tapfit::TimeBasis::ClockTime;
    return s;
}

std::vector<tapfit::PulseTrace> load_traces(const CommonOpts& c) {
    auto traces = tapfit::io::read_series(c.input);
    if (c.eta_scale) {
        for (auto& tr : traces) {
            for (double& t : tr.times) t *= *c.eta_scale;
        }
    }
    std::sort(traces.begin(), traces.end(),
              [](const auto& a, const auto& b) { return a.pulse_id < b.pulse_id; });
    return traces;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1.0);
    return v;
}

std::string csv_line(std::initializer_list<double> vals) {
    std::string out;
    char buf[48];
    bool first = true;
    for (double v : vals) {
        if (!first) out += ",";
        first = false;
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        out += buf;
    }
    return out + "\n";
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    bool series = false;
    std::string regime = "knudsen";
    double slope = 0.063;
    double nmol_min = 0.51, nmol_max = 24.0;
    int pulses = 20;
    double gain_switch = 12.2;

    std::string truth_model = "sdc";
    double eta = 1.0;
    double lambda = 2.46, mu = -2.43, sigma = 0.50;
    int terms = 2000;
    int points = 1000;
    double t_start = 0.001, t_end = 3.0;
    double noise = 0.0, offset = 0.0, drift = 0.0, amplitude = 1.0;
    int gain = 8;
};

tapfit::synth::SynthConfig base_config(const CommonOpts& c, const SimulateOpts& s) {
    tapfit::synth::SynthConfig cfg;
    cfg.model = s.truth_model == "gdc" ? tapfit::ModelKind::Gdc : tapfit::ModelKind::Sdc;
    cfg.sdc = tapfit::SdcParams{s.eta, 1.0};
    cfg.gdc = tapfit::GdcParams{s.lambda, s.mu, s.sigma};
    cfg.sdc_terms = s.terms;
    cfg.time_grid = linspace(s.t_start, s.t_end, s.points);
    cfg.noise_sigma = s.noise;
    cfg.baseline_offset = s.offset;
    cfg.drift_slope = s.drift;
    cfg.amplitude = s.amplitude;
    cfg.gain = s.gain;
    cfg.rng_seed = c.seed;
    return cfg;
}

int cmd_simulate(const CommonOpts& c, const SimulateOpts& s) {
    const auto cfg = base_config(c, s);
    if (!s.series) {
        auto trace = tapfit::synth::generate_pulse(cfg);
        tapfit::io::write_trace(c.output, trace);
        std::cout << "wrote 1 pulse (" << trace.times.size() << " samples, model "
                  << s.truth_model << ") to " << c.output << "\n";
        return kExitOk;
    }
    auto regime = s.regime == "non-knudsen" ? tapfit::synth::RegimeModel::non_knudsen(s.slope)
                                            : tapfit::synth::RegimeModel::knudsen();
    regime.gain_switch_nmol = s.gain_switch;
    const auto schedule = linspace(s.nmol_min, s.nmol_max, s.pulses);
    const auto traces = tapfit::synth::generate_series(cfg, schedule, regime);
    tapfit::io::write_series(c.output, traces);
    std::cout << "wrote " << traces.size() << " pulses (" << s.regime << " regime) to "
              << c.output << "/\n";
    return kExitOk;
}

// --------------------------------------------------------------------- fit

int cmd_fit(const CommonOpts& c) {
    const auto traces = load_traces(c);
    if (traces.empty()) throw tapfit::InsufficientDataError("no traces in input");
    const auto pulse = tapfit::preprocess::normalize(traces.front());
    const auto opts = solver_options(c);
    const auto select = parse_model(c.model);

    std::vector<tapfit::FitResult> results;
    if (select != ModelSelect::Sdc) results.push_back(tapfit::fit_gdc(pulse, opts));
    if (select != ModelSelect::Gdc) results.push_back(tapfit::fit_sdc(pulse, opts));

    std::vector<double> betas;
    for (const auto& r : results) {
        if (r.model.kind == tapfit::ModelKind::Gdc) betas.push_back(r.model.beta);
    }
    if (betas.empty()) betas.push_back(results.front().model.beta);
    const auto conv = tapfit::conversion(betas);

    const tapfit::report::Provenance prov{c.input, c.seed};
    if (!c.output.empty()) {
        tapfit::report::write_json(c.output, tapfit::report::fit_report(results, conv, prov));
    }

    bool all_converged = true;
    for (const auto& r : results) {
        const bool gdc = r.model.kind == tapfit::ModelKind::Gdc;
        std::cout << (gdc ? "GDC" : "SDC") << " fit: ";
        if (gdc) {
            std::cout << "lambda=" << r.model.gdc.lambda << " mu=" << r.model.gdc.mu
                      << " sigma=" << r.model.gdc.sigma
                      << " ratio=" << tapfit::curves::knudsen_ratio(r.model.gdc);
        } else {
            std::cout << "eta=" << r.model.eta;
        }
        std::cout << " beta=" << r.model.beta << " x_bar=" << r.model.x_bar
                  << " rmse=" << r.rmse << " R2=" << r.r_squared
                  << (r.converged ? "" : "  [NOT CONVERGED]") << "\n";
        all_converged = all_converged && r.converged;
    }
    std::cout << "conversion (1 - sum beta): " << conv.value << (conv.clamped ? " [clamped]" : "")
              << "\n";
    return all_converged ? kExitOk : kExitNonConvergence;
}

// ------------------------------------------------------------------ series

tapfit::BatchOptions batch_options(const CommonOpts& c) {
    tapfit::BatchOptions b;
    b.solver = solver_options(c);
    b.models = parse_model(c.model);
    b.threads = c.threads;
    b.min_series_r2 = c.min_r2;
    return b;
}

int cmd_series(const CommonOpts& c) {
    const auto traces = load_traces(c);
    if (traces.empty()) throw tapfit::InsufficientDataError("no traces in input");
    const auto rows = tapfit::fit_series(traces, batch_options(c));

    const tapfit::report::Provenance prov{c.input, c.seed};
    const fs::path out = c.output.empty() ? fs::path("series_out") : fs::path(c.output);
    tapfit::report::write_text(out / "series.csv", tapfit::report::series_csv(rows));
    tapfit::report::write_json(out / "series.json", tapfit::report::series_report(rows, prov));

    int failed = 0;
    for (const auto& row : rows) {
        const bool ok = row.error.empty() &&
                        (!row.gdc || row.gdc->converged) && (!row.sdc || row.sdc->converged);
        if (!ok) {
            ++failed;
            std::cout << "pulse " << row.pulse_id << ": "
                      << (row.error.empty() ? "did not converge" : row.error) << "\n";
        }
    }
    std::cout << rows.size() << " pulses fit, " << rows.size() - failed << " clean, " << failed
              << " flagged; table in " << (out / "series.csv").string() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------- fingerprint

int cmd_fingerprint(const CommonOpts& c) {
    const auto traces = load_traces(c);
    tapfit::BatchOptions bopts = batch_options(c);
    bopts.models = ModelSelect::Gdc;
    const auto rows = tapfit::fit_series(traces, bopts);
    const auto series = tapfit::to_series_points(rows, c.min_r2);
    if (series.size() < 3) {
        throw tapfit::InsufficientDataError(
            "fingerprint needs at least 3 converged pulses, got " +
            std::to_string(series.size()));
    }
    const auto report = tapfit::fingerprint::classify(series, c.alpha);

    const tapfit::report::Provenance prov{c.input, c.seed};
    if (!c.output.empty()) {
        tapfit::report::write_json(
            c.output, tapfit::report::fingerprint_report(report, series, prov));
    }
    std::cout << tapfit::report::ols_table(report.ols);
    std::cout << "regime: " << tapfit::fingerprint::to_string(report.regime) << " (alpha "
              << c.alpha << ", " << series.size() << " pulses)\n";
    int above = 0;
    for (const auto& rf : report.knudsen_ratios) above += rf.above_boundary ? 1 : 0;
    std::cout << above << "/" << report.knudsen_ratios.size()
              << " pulses above the 0.209 ratio boundary\n";
    return kExitOk;
}

// ----------------------------------------------------------------- figures

int cmd_figures(const CommonOpts& c, const SimulateOpts& s) {
    const fs::path out = c.output.empty() ? fs::path("figures") : fs::path(c.output);

    // Curve anatomy: F* and the flux over tau in [0.001, 1].
    {
        std::string csv = "tau,fstar,sdc_flux\n";
        for (double tau : linspace(0.001, 1.0, 1000)) {
            csv += csv_line({tau, tapfit::curves::sdc_fstar(tau, s.terms),
                             tapfit::curves::sdc_flux(tau, s.terms)});
        }
        tapfit::report::write_text(out / "fig1_fstar.csv", csv);
    }

    // A mixed-regime series: Knudsen up to 10 nmol, concentration-dependent
    // transport beyond, with the gain switch at 12.2 nmol.
    std::vector<tapfit::PulseTrace> traces;
    if (!c.input.empty()) {
        traces = load_traces(c);
    } else {
        auto cfg = base_config(c, s);
        cfg.model = tapfit::ModelKind::Gdc;
        if (s.noise == 0.0) cfg.noise_sigma = 0.01;
        auto knud = tapfit::synth::RegimeModel::knudsen();
        auto molec = tapfit::synth::RegimeModel::non_knudsen(s.slope);
        knud.gain_switch_nmol = molec.gain_switch_nmol = s.gain_switch;
        const auto schedule = linspace(s.nmol_min, s.nmol_max, s.pulses);
        for (std::size_t i = 0; i < schedule.size(); ++i) {
            const double nmol = schedule[i];
            const auto& regime = nmol <= 10.0 ? knud : molec;
            auto pc = cfg;
            pc.gdc = regime.params_at(nmol);
            pc.amplitude = cfg.amplitude * nmol;
            pc.gain = regime.gain_at(nmol, cfg.gain);
            pc.rng_seed = cfg.rng_seed + 0x9E3779B97F4A7C15ULL * i;
            pc.injection_nmol = nmol;
            char id[32];
            std::snprintf(id, sizeof(id), "pulse-%03zu", i);
            pc.pulse_id = id;
            traces.push_back(tapfit::synth::generate_pulse(pc));
        }
    }

    CommonOpts cc = c;
    cc.model = "both";
    const auto rows = tapfit::fit_series(traces, batch_options(cc));
    const auto series = tapfit::to_series_points(rows, c.min_r2);

    {
        std::string csv = "injection_nmol,gain,flux_range\n";
        for (const auto& row : rows) {
            if (!row.injection_nmol || !row.flux_range) continue;
            csv += csv_line({*row.injection_nmol, static_cast<double>(row.gain.value_or(0)),
                             *row.flux_range});
        }
        tapfit::report::write_text(out / "fig2_flux_range.csv", csv);
    }
    {
        std::string csv = "injection_nmol,r2_sdc,r2_gdc\n";
        for (const auto& row : rows) {
            if (!row.injection_nmol || !row.gdc || !row.sdc || !row.error.empty()) continue;
            csv += csv_line({*row.injection_nmol, row.sdc->r_squared, row.gdc->r_squared});
        }
        tapfit::report::write_text(out / "fig3_r2.csv", csv);
    }
    {
        std::string csv = "injection_nmol,lambda,mu,exp_neg_mu,eta_gdc,eta_sdc,ratio\n";
        for (const auto& row : rows) {
            if (!row.injection_nmol || !row.gdc || !row.gdc->converged) continue;
            const auto& g = row.gdc->model.gdc;
            const double eta_sdc =
                row.sdc && row.sdc->converged ? row.sdc->model.eta
                                              : std::numeric_limits<double>::quiet_NaN();
            csv += csv_line({*row.injection_nmol, g.lambda, g.mu, std::exp(-g.mu),
                             tapfit::curves::eta_from_gdc(g), eta_sdc,
                             tapfit::curves::knudsen_ratio(g)});
        }
        tapfit::report::write_text(out / "fig4_params.csv", csv);
    }
    {
        // Intercept-corrected ratio: remove the regression intercept of the
        // non-Knudsen partition before comparing to exp(-mu).
        std::vector<double> x, y;
        for (const auto& pt : series) {
            if (!(pt.injection_nmol > 10.0)) continue;
            x.push_back(std::exp(-pt.mu));
            y.push_back(pt.lambda);
        }
        double a0 = 0.0;
        if (x.size() >= 3) {
            a0 = tapfit::fingerprint::ols_fit(x, y).a0;
        } else if (series.size() >= 3) {
            std::vector<double> xa, ya;
            for (const auto& pt : series) {
                xa.push_back(std::exp(-pt.mu));
                ya.push_back(pt.lambda);
            }
            a0 = tapfit::fingerprint::ols_fit(xa, ya).a0;
        }
        std::string csv = "injection_nmol,corrected_ratio,intercept\n";
        for (const auto& pt : series) {
            csv += csv_line({pt.injection_nmol, (pt.lambda - a0) * std::exp(pt.mu), a0});
        }
        tapfit::report::write_text(out / "fig5_corrected_ratio.csv", csv);
    }
    std::cout << "wrote figure tables for " << rows.size() << " pulses to " << out.string()
              << "/\n";
    return kExitOk;
}

template <class Fn>
int run_guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const tapfit::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const tapfit::InsufficientDataError& e) {
        std::cerr << "insufficient data: " << e.what() << "\n";
        return kExitInsufficientData;
    } catch (const tapfit::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diffusion-curve fitting and transport-regime fingerprinting "
                 "for pulse-response traces"};
    app.set_config("--config");
    app.require_subcommand(1);

    CommonOpts c;
    SimulateOpts s;

    const auto add_common = [&](CLI::App* cmd, bool needs_input) {
        if (needs_input) cmd->add_option("--input", c.input, "Input trace file or directory");
        cmd->add_option("--output", c.output, "Output path");
        cmd->add_option("--model", c.model, "Model: sdc, gdc, or both")
            ->check(CLI::IsMember({"sdc", "gdc", "both"}));
        cmd->add_option("--alpha", c.alpha, "Significance level");
        cmd->add_option("--seed", c.seed, "RNG seed");
        cmd->add_option("--max-iter", c.max_iter, "Solver iteration cap");
        cmd->add_option("--tol", c.tol, "Solver relative SS tolerance");
        cmd->add_option("--time-basis", c.time_basis, "clock or dimensionless")
            ->check(CLI::IsMember({"clock", "dimensionless"}));
        cmd->add_option("--eta", c.eta_scale,
                        "Known transport rate; maps clock time to tau = t*eta before fitting");
        cmd->add_option("--min-r2", c.min_r2, "Fit quality floor for series points");
        cmd->add_option("--threads", c.threads, "Batch fit threads (0 = auto)");
    };
    const auto add_synth = [&](CLI::App* cmd) {
        cmd->add_option("--truth-model", s.truth_model, "Ground truth: sdc or gdc")
            ->check(CLI::IsMember({"sdc", "gdc"}));
        cmd->add_option("--eta-true", s.eta, "SDC ground-truth eta (1/s)");
        cmd->add_option("--lambda", s.lambda, "GDC ground-truth lambda");
        cmd->add_option("--mu", s.mu, "GDC ground-truth mu");
        cmd->add_option("--sigma", s.sigma, "GDC ground-truth sigma");
        cmd->add_option("--terms", s.terms, "SDC series terms");
        cmd->add_option("--points", s.points, "Time grid points");
        cmd->add_option("--t-start", s.t_start, "Grid start (s)");
        cmd->add_option("--t-end", s.t_end, "Grid end (s)");
        cmd->add_option("--noise", s.noise, "Gaussian noise as a fraction of peak");
        cmd->add_option("--offset", s.offset, "Baseline offset (signal units)");
        cmd->add_option("--drift", s.drift, "Baseline drift slope (signal units/s)");
        cmd->add_option("--amplitude", s.amplitude, "Signal amplitude");
        cmd->add_option("--gain", s.gain, "Amplifier gain setting");
        cmd->add_option("--pulses", s.pulses, "Pulses in a series");
        cmd->add_option("--nmol-min", s.nmol_min, "Smallest injection (nmol)");
        cmd->add_option("--nmol-max", s.nmol_max, "Largest injection (nmol)");
        cmd->add_option("--regime", s.regime, "Series regime: knudsen or non-knudsen")
            ->check(CLI::IsMember({"knudsen", "non-knudsen"}));
        cmd->add_option("--slope", s.slope, "Non-Knudsen lambda slope a1");
        cmd->add_option("--gain-switch", s.gain_switch, "Gain switch threshold (nmol)");
    };

    auto* sim = app.add_subcommand("simulate", "Generate synthetic pulse traces");
    add_common(sim, false);
    add_synth(sim);
    sim->add_flag("--series", s.series, "Generate a full injection series");

    auto* fit = app.add_subcommand("fit", "Fit one pulse trace");
    add_common(fit, true);

    auto* series = app.add_subcommand("series", "Fit every pulse of a series");
    add_common(series, true);

    auto* fingerprint = app.add_subcommand("fingerprint", "Classify the transport regime");
    add_common(fingerprint, true);

    auto* figures = app.add_subcommand("figures", "Emit plot-ready data tables");
    add_common(figures, true);
    add_synth(figures);

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) {
        if (c.output.empty()) {
            std::cerr << "simulate needs --output\n";
            return 1;
        }
        return run_guarded([&] { return cmd_simulate(c, s); });
    }
    if (fit->parsed()) return run_guarded([&] { return cmd_fit(c); });
    if (series->parsed()) return run_guarded([&] { return cmd_series(c); });
    if (fingerprint->parsed()) return run_guarded([&] { return cmd_fingerprint(c); });
    if (figures->parsed()) return run_guarded([&] { return cmd_figures(c, s); });
    return 1;
}
