#include "tapfit/trace_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tapfit::io {

namespace {

std::string trim(std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& tok, std::size_t line_no) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError("non-numeric cell '" + tok + "'", line_no);
    }
    return v;
}

struct RawFile {
    std::map<std::string, std::string> meta;  // raw values, possibly lists
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::size_t header_line = 0;
};

RawFile parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    RawFile f;
    std::string line;
    std::size_t line_no = 0;
    char delim = ',';

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            if (f.header.empty()) {
                const auto colon = t.find(':');
                if (colon != std::string::npos) {
                    const std::string key = trim(t.substr(1, colon - 1));
                    const std::string value = trim(t.substr(colon + 1));
                    if (!key.empty()) f.meta[key] = value;
                }
            }
            continue;
        }
        if (f.header.empty()) {
            delim = t.find('\t') != std::string::npos ? '\t' : ',';
            f.header = split(t, delim);
            f.header_line = line_no;
            if (f.header.size() < 2) {
                throw ParseError("header needs a time column and at least one flux column",
                                 line_no);
            }
            continue;
        }
        const auto cells = split(t, delim);
        if (cells.size() != f.header.size()) {
            throw ParseError("row has " + std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(f.header.size()),
                             line_no);
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_double(c, line_no));
        f.rows.push_back(std::move(row));
    }
    if (f.header.empty()) throw ParseError("no header row found", line_no);
    return f;
}

// Per-column metadata: a comma-separated list with one entry per flux column
// distributes; anything else applies to every column.
std::string meta_for_column(const std::map<std::string, std::string>& meta,
                            const std::string& key, std::size_t col, std::size_t n_cols) {
    const auto it = meta.find(key);
    if (it == meta.end()) return {};
    if (n_cols > 1) {
        const auto parts = split(it->second, ',');
        if (parts.size() == n_cols) return parts[col];
    }
    return it->second;
}

}  // namespace

std::vector<PulseTrace> read_traces(const std::filesystem::path& path) {
    RawFile f = parse_file(path);

    std::size_t time_col = f.header.size();
    for (std::size_t i = 0; i < f.header.size(); ++i) {
        if (lower(f.header[i]) == "time") {
            if (time_col != f.header.size()) {
                throw ParseError("more than one time column", f.header_line);
            }
            time_col = i;
        }
    }
    if (time_col == f.header.size()) {
        throw ParseError("missing time column", f.header_line);
    }
    if (f.rows.size() < 2) {
        throw ParseError("need at least 2 data rows", f.header_line + f.rows.size() + 1);
    }

    std::vector<double> times;
    times.reserve(f.rows.size());
    for (std::size_t r = 0; r < f.rows.size(); ++r) {
        const double t = f.rows[r][time_col];
        const std::size_t line_no = f.header_line + 1 + r;
        if (!std::isfinite(t)) throw ParseError("non-finite time", line_no);
        if (!times.empty() && !(t > times.back())) {
            throw ParseError(t == times.back() ? "duplicate timestamp" : "non-monotone timestamp",
                             line_no);
        }
        times.push_back(t);
    }

    std::vector<std::size_t> flux_cols;
    for (std::size_t i = 0; i < f.header.size(); ++i) {
        if (i != time_col) flux_cols.push_back(i);
    }

    std::vector<PulseTrace> out;
    for (std::size_t k = 0; k < flux_cols.size(); ++k) {
        PulseTrace tr;
        tr.times = times;
        tr.flux.reserve(f.rows.size());
        for (const auto& row : f.rows) tr.flux.push_back(row[flux_cols[k]]);

        const auto get = [&](const std::string& key) {
            return meta_for_column(f.meta, key, k, flux_cols.size());
        };
        tr.pulse_id = get("pulse_id");
        if (tr.pulse_id.empty()) tr.pulse_id = f.header[flux_cols[k]];
        if (const auto v = get("injection_nmol"); !v.empty()) {
            tr.injection_nmol = parse_double(v, f.header_line);
        }
        if (const auto v = get("gain"); !v.empty()) {
            tr.gain = static_cast<int>(parse_double(v, f.header_line));
        }
        for (const auto& [key, value] : f.meta) {
            if (key == "pulse_id" || key == "injection_nmol" || key == "gain") continue;
            tr.meta[key] = meta_for_column(f.meta, key, k, flux_cols.size());
        }
        tr.validate();
        out.push_back(std::move(tr));
    }
    return out;
}

std::vector<PulseTrace> read_series(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such path: " + path.string());
    if (!std::filesystem::is_directory(path)) return read_traces(path);

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = lower(entry.path().extension().string());
        if (ext == ".csv" || ext == ".tsv" || ext == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no trace files in " + path.string());

    std::vector<PulseTrace> out;
    for (const auto& file : files) {
        auto traces = read_traces(file);
        out.insert(out.end(), std::make_move_iterator(traces.begin()),
                   std::make_move_iterator(traces.end()));
    }
    return out;
}

void write_trace(const std::filesystem::path& path, const PulseTrace& trace) {
    trace.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    char buf[64];

    out << "# tapfit-trace v1\n";
    out << "# pulse_id: " << trace.pulse_id << "\n";
    if (trace.injection_nmol) {
        std::snprintf(buf, sizeof(buf), "%.17g", *trace.injection_nmol);
        out << "# injection_nmol: " << buf << "\n";
    }
    if (trace.gain) out << "# gain: " << *trace.gain << "\n";
    for (const auto& [key, value] : trace.meta) {
        out << "# " << key << ": " << value << "\n";
    }
    out << "time,flux\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", trace.times[i]);
        out << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", trace.flux[i]);
        out << buf << "\n";
    }
    if (!out) throw IoError("write failed for " + path.string());
}

void write_series(const std::filesystem::path& dir, std::span<const PulseTrace> traces) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());
    for (const auto& tr : traces) {
        write_trace(dir / (tr.pulse_id + ".csv"), tr);
    }
}

}  // namespace tapfit::io
