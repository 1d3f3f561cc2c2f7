#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "tapfit/batch.hpp"
#include "tapfit/fingerprint.hpp"
#include "tapfit/fit.hpp"

namespace tapfit::report {

inline constexpr const char* kToolVersion = "tapfit 0.1.0";

/// Tool version, input path and seed recorded in every report; no
/// timestamps, so identical inputs give byte-identical output.
struct Provenance {
    std::string input;
    std::optional<std::uint64_t> seed;
};

/// Doubles in reports are serialized with 12 significant digits.
double round12(double v);

nlohmann::ordered_json to_json(const FitResult& result);
nlohmann::ordered_json to_json(const fingerprint::OlsResult& ols);
nlohmann::ordered_json to_json(const fingerprint::FingerprintReport& report);

nlohmann::ordered_json fit_report(std::span<const FitResult> results,
                                  const Conversion& conv, const Provenance& prov);
nlohmann::ordered_json series_report(std::span<const PulseFitRow> rows,
                                     const Provenance& prov);
nlohmann::ordered_json fingerprint_report(const fingerprint::FingerprintReport& report,
                                          std::span<const fingerprint::SeriesPoint> series,
                                          const Provenance& prov);

/// Regression block in the layout of the usual OLS summary:
/// coefficient, estimate, standard error, t value, Pr(>|t|).
std::string ols_table(const fingerprint::OlsResult& ols);

/// Per-pulse CSV of the series fits (the data behind the R^2 and parameter
/// trend figures).
std::string series_csv(std::span<const PulseFitRow> rows);

void write_text(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

}  // namespace tapfit::report
