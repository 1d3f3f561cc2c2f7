#include "tapfit/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "tapfit/curves.hpp"

namespace tapfit::report {

namespace {

using nlohmann::ordered_json;

// Rounded double, or null for non-finite values (JSON cannot carry inf/nan).
ordered_json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round12(v);
}

const char* kind_name(ModelKind k) { return k == ModelKind::Gdc ? "gdc" : "sdc"; }
const char* basis_name(TimeBasis b) {
    return b == TimeBasis::ClockTime ? "clock-time" : "dimensionless";
}

ordered_json provenance_json(const Provenance& prov) {
    ordered_json j;
    j["tool"] = kToolVersion;
    j["input"] = prov.input;
    if (prov.seed) j["seed"] = *prov.seed;
    return j;
}

}  // namespace

double round12(double v) {
    if (!std::isfinite(v)) return v;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::strtod(buf, nullptr);
}

ordered_json to_json(const FitResult& r) {
    ordered_json j;
    j["model"] = kind_name(r.model.kind);
    j["time_basis"] = basis_name(r.model.time_basis);
    ordered_json params;
    params["x_bar"] = num(r.model.x_bar);
    params["beta"] = num(r.model.beta);
    if (r.model.kind == ModelKind::Gdc) {
        params["lambda"] = num(r.model.gdc.lambda);
        params["mu"] = num(r.model.gdc.mu);
        params["sigma"] = num(r.model.gdc.sigma);
    } else {
        params["eta"] = num(r.model.eta);
    }
    j["params"] = params;
    if (r.model.kind == ModelKind::Gdc) {
        j["knudsen_ratio"] = num(curves::knudsen_ratio(r.model.gdc));
        j["residence_time"] = num(curves::residence_time(r.model.gdc));
    }
    j["rmse"] = num(r.rmse);
    j["mse"] = num(r.mse);
    j["r_squared"] = num(r.r_squared);
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["init_fallback"] = r.init_fallback;
    ordered_json se;
    for (std::size_t i = 0; i < r.param_names.size(); ++i) {
        se[r.param_names[i]] = i < r.std_errors.size() ? num(r.std_errors[i]) : ordered_json(nullptr);
    }
    j["std_errors"] = se;
    if (!r.covariance.empty()) {
        const std::size_t p = r.param_names.size();
        ordered_json cov = ordered_json::array();
        for (std::size_t a = 0; a < p; ++a) {
            ordered_json rowj = ordered_json::array();
            for (std::size_t b = 0; b < p; ++b) rowj.push_back(num(r.covariance[a * p + b]));
            cov.push_back(rowj);
        }
        j["covariance"] = cov;
    }
    return j;
}

ordered_json to_json(const fingerprint::OlsResult& ols) {
    ordered_json j;
    j["a0"] = num(ols.a0);
    j["a1"] = num(ols.a1);
    j["se0"] = num(ols.se0);
    j["se1"] = num(ols.se1);
    j["t0"] = num(ols.t0);
    j["t1"] = num(ols.t1);
    j["p0"] = num(ols.p0);
    j["p1"] = num(ols.p1);
    j["r_squared"] = num(ols.r_squared);
    j["dof"] = ols.dof;
    j["degenerate"] = ols.degenerate;
    return j;
}

ordered_json to_json(const fingerprint::FingerprintReport& report) {
    ordered_json j;
    j["regime"] = fingerprint::to_string(report.regime);
    j["alpha"] = num(report.alpha);
    j["ols"] = to_json(report.ols);
    ordered_json ratios = ordered_json::array();
    for (const auto& rf : report.knudsen_ratios) {
        ordered_json e;
        e["pulse_id"] = rf.pulse_id;
        e["ratio"] = num(rf.ratio);
        e["above_boundary"] = rf.above_boundary;
        ratios.push_back(e);
    }
    j["knudsen_ratios"] = ratios;
    j["ratio_boundary"] = curves::kKnudsenRatioBoundary;
    return j;
}

ordered_json fit_report(std::span<const FitResult> results, const Conversion& conv,
                        const Provenance& prov) {
    ordered_json j;
    ordered_json fits = ordered_json::array();
    for (const auto& r : results) fits.push_back(to_json(r));
    j["fits"] = fits;
    ordered_json c;
    c["value"] = num(conv.value);
    c["raw"] = num(conv.raw);
    c["clamped"] = conv.clamped;
    j["conversion"] = c;
    j["provenance"] = provenance_json(prov);
    return j;
}

ordered_json series_report(std::span<const PulseFitRow> rows, const Provenance& prov) {
    ordered_json j;
    ordered_json pulses = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json e;
        e["pulse_id"] = row.pulse_id;
        e["injection_nmol"] = row.injection_nmol ? num(*row.injection_nmol) : ordered_json(nullptr);
        e["gain"] = row.gain ? ordered_json(*row.gain) : ordered_json(nullptr);
        e["flux_range"] = row.flux_range ? num(*row.flux_range) : ordered_json(nullptr);
        if (row.gdc) e["gdc"] = to_json(*row.gdc);
        if (row.sdc) e["sdc"] = to_json(*row.sdc);
        if (!row.error.empty()) e["error"] = row.error;
        pulses.push_back(e);
    }
    j["pulses"] = pulses;
    j["provenance"] = provenance_json(prov);
    return j;
}

ordered_json fingerprint_report(const fingerprint::FingerprintReport& report,
                                std::span<const fingerprint::SeriesPoint> series,
                                const Provenance& prov) {
    ordered_json j = to_json(report);
    ordered_json pts = ordered_json::array();
    const auto etas = fingerprint::eta_series(series);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& pt = series[i];
        ordered_json e;
        e["pulse_id"] = pt.pulse_id;
        e["injection_nmol"] = num(pt.injection_nmol);
        e["lambda"] = num(pt.lambda);
        e["mu"] = num(pt.mu);
        e["sigma"] = num(pt.sigma);
        e["exp_neg_mu"] = num(std::exp(-pt.mu));
        e["eta"] = num(etas[i]);
        e["fit_r2"] = num(pt.fit_r2);
        pts.push_back(e);
    }
    j["series"] = pts;
    j["provenance"] = provenance_json(prov);
    return j;
}

std::string ols_table(const fingerprint::OlsResult& ols) {
    char buf[256];
    std::string out;
    out += "coef            Estimate    Std. Error    t value     Pr(>|t|)\n";
    std::snprintf(buf, sizeof(buf), "a0              %-11.4g %-13.4g %-11.4g %.4g\n",
                  ols.a0, ols.se0, ols.t0, ols.p0);
    out += buf;
    std::snprintf(buf, sizeof(buf), "a1 [exp(-mu)]   %-11.4g %-13.4g %-11.4g %.4g\n",
                  ols.a1, ols.se1, ols.t1, ols.p1);
    out += buf;
    std::snprintf(buf, sizeof(buf), "R^2 %.4g, dof %d%s\n", ols.r_squared, ols.dof,
                  ols.degenerate ? " (degenerate: zero residual variance)" : "");
    out += buf;
    return out;
}

std::string series_csv(std::span<const PulseFitRow> rows) {
    std::string out =
        "pulse_id,injection_nmol,gain,flux_range,"
        "gdc_converged,gdc_x_bar,gdc_beta,gdc_lambda,gdc_mu,gdc_sigma,gdc_rmse,gdc_r2,"
        "gdc_knudsen_ratio,gdc_eta,"
        "sdc_converged,sdc_x_bar,sdc_beta,sdc_eta,sdc_rmse,sdc_r2,error\n";
    char buf[64];
    const auto cell = [&buf](double v) -> std::string {
        if (!std::isfinite(v)) return "";
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return buf;
    };
    for (const auto& row : rows) {
        out += row.pulse_id + ",";
        out += (row.injection_nmol ? cell(*row.injection_nmol) : "") + ",";
        out += (row.gain ? std::to_string(*row.gain) : "") + ",";
        out += (row.flux_range ? cell(*row.flux_range) : "") + ",";
        if (row.gdc) {
            const auto& g = *row.gdc;
            out += std::string(g.converged ? "1" : "0") + "," + cell(g.model.x_bar) + "," +
                   cell(g.model.beta) + "," + cell(g.model.gdc.lambda) + "," +
                   cell(g.model.gdc.mu) + "," + cell(g.model.gdc.sigma) + "," + cell(g.rmse) +
                   "," + cell(g.r_squared) + "," + cell(curves::knudsen_ratio(g.model.gdc)) +
                   "," + cell(curves::eta_from_gdc(g.model.gdc)) + ",";
        } else {
            out += ",,,,,,,,,,";
        }
        if (row.sdc) {
            const auto& s = *row.sdc;
            out += std::string(s.converged ? "1" : "0") + "," + cell(s.model.x_bar) + "," +
                   cell(s.model.beta) + "," + cell(s.model.eta) + "," + cell(s.rmse) + "," +
                   cell(s.r_squared) + ",";
        } else {
            out += ",,,,,,";
        }
        out += row.error + "\n";
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const ordered_json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

}  // namespace tapfit::report
