#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "tapfit/types.hpp"

namespace tapfit::io {

// Trace file grammar (UTF-8, newline-delimited, comma or tab separated):
//
//   # key: value            any number of metadata lines before the header
//   time,flux[,flux2,...]   header with exactly one "time" column
//   0.001,2.33e-05[,...]    data rows, strictly increasing finite times
//
// Known metadata keys: pulse_id, injection_nmol, gain, time_unit (default
// "s"); anything else rides along untouched. With several flux columns a
// metadata value may be a comma-separated list assigning one entry per
// column. Parse failures throw ParseError with the offending line number.

/// One PulseTrace per flux column of the file.
std::vector<PulseTrace> read_traces(const std::filesystem::path& path);

/// All traces from a file, or from every *.csv/*.tsv/*.txt file of a
/// directory in filename order.
std::vector<PulseTrace> read_series(const std::filesystem::path& path);

/// Writes a single trace (17 significant digits, so values round-trip
/// exactly).
void write_trace(const std::filesystem::path& path, const PulseTrace& trace);

/// Writes one "<pulse_id>.csv" per trace into a directory, creating it if
/// needed.
void write_series(const std::filesystem::path& dir, std::span<const PulseTrace> traces);

}  // namespace tapfit::io
