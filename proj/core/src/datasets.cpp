#include "cpkit/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cpkit/errors.hpp"
#include "cpkit/rng.hpp"

namespace cpkit {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    }
    return out;
}

double parse_num(const std::string& s, int line_no, const std::string& path) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

constexpr double MISSING_SENTINEL = -99.9;

TimeSeries load_cet(const DatasetSpec& spec) {
    std::ifstream in(spec.path);
    if (!in) throw FileNotFound("cannot open: " + spec.path);
    std::vector<double> values;
    std::vector<int> years;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        int year;
        if (!(ss >> year)) continue;       // header / blank lines
        if (year < 1000 || year > 3000) continue;
        double monthly, annual = MISSING_SENTINEL;
        int count = 0;
        std::vector<double> row;
        while (ss >> monthly) {
            row.push_back(monthly);
            ++count;
        }
        if (count < 13)
            throw ParseError(spec.path + ":" + std::to_string(line_no) +
                             ": expected year + 12 monthly + annual columns");
        annual = row.back();
        if (spec.year_start != 0 && (year < spec.year_start || year > spec.year_end)) continue;
        if (annual == MISSING_SENTINEL)
            throw MissingValueInRange(spec.path + ": missing annual value for " +
                                      std::to_string(year));
        years.push_back(year);
        values.push_back(annual);
    }
    if (values.empty()) throw ParseError(spec.path + ": no rows in requested range");
    for (std::size_t i = 1; i < years.size(); ++i)
        if (years[i] != years[i - 1] + 1)
            throw ParseError(spec.path + ": year gap at " + std::to_string(years[i]));
    return TimeSeries(std::move(values), 1, years.front(), "cet");
}

TimeSeries load_csv(const DatasetSpec& spec, const std::string& value_col_fallback,
                    const std::string& label) {
    std::ifstream in(spec.path);
    if (!in) throw FileNotFound("cannot open: " + spec.path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(spec.path + ": empty file");
    auto header = split_csv(line);
    auto find_col = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return int(i);
        return -1;
    };
    const int ycol = find_col(spec.year_column);
    int vcol = find_col(spec.value_column);
    if (vcol < 0 && !value_col_fallback.empty()) vcol = find_col(value_col_fallback);
    const int mcol = spec.month_column.empty() ? -1 : find_col(spec.month_column);
    if (ycol < 0 || vcol < 0)
        throw ParseError(spec.path + ": missing column '" + spec.year_column + "' or '" +
                         spec.value_column + "'");
    if (!spec.month_column.empty() && mcol < 0)
        throw ParseError(spec.path + ": missing column '" + spec.month_column + "'");

    std::vector<double> values;
    std::vector<int> years;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (int(f.size()) <= std::max(ycol, vcol))
            throw ParseError(spec.path + ":" + std::to_string(line_no) + ": short row");
        const int year = int(parse_num(f[std::size_t(ycol)], line_no, spec.path));
        if (spec.year_start != 0 && (year < spec.year_start || year > spec.year_end)) continue;
        const double v = parse_num(f[std::size_t(vcol)], line_no, spec.path);
        if (v == MISSING_SENTINEL)
            throw MissingValueInRange(spec.path + ": missing value for " + std::to_string(year));
        years.push_back(year);
        values.push_back(v);
    }
    if (values.empty()) throw ParseError(spec.path + ": no rows in requested range");
    const int period = mcol >= 0 ? 12 : 1;
    if (period == 1) {
        for (std::size_t i = 1; i < years.size(); ++i)
            if (years[i] != years[i - 1] + 1)
                throw ParseError(spec.path + ": year gap at " + std::to_string(years[i]));
    }
    return TimeSeries(std::move(values), period, years.front(), label);
}

} // namespace

TimeSeries load(const DatasetSpec& spec) {
    switch (spec.source) {
        case DatasetSource::Cet: return load_cet(spec);
        case DatasetSource::NsidcSeaIce: return load_csv(spec, "extent", "seaice");
        case DatasetSource::BerkeleyStation: return load_csv(spec, "", "station");
        case DatasetSource::LocalCsv: return load_csv(spec, "", "csv");
    }
    throw Error("unknown dataset source");
}

void write_local_csv(const std::string& path, const TimeSeries& series) {
    std::ofstream out(path);
    if (!out) throw FileNotFound("cannot open for writing: " + path);
    out << "year,value\n";
    char buf[64];
    for (std::size_t t = 1; t <= series.size(); ++t) {
        // shortest representation that round-trips exactly
        const double v = series[t - 1];
        for (int prec = 15; prec <= 17; ++prec) {
            std::snprintf(buf, sizeof buf, "%.*g", prec, v);
            if (std::strtod(buf, nullptr) == v) break;
        }
        out << series.label_of(t) << "," << buf << "\n";
    }
}

std::pair<TimeSeries, ChangepointConfig> simulate(const SimSpec& spec) {
    if (spec.n < 2) throw Error("simulate: n too small");
    if (spec.segment_means.size() != spec.changepoints.size() + 1)
        throw Error("simulate: need one mean per segment");
    ChangepointConfig truth{spec.changepoints, spec.n};
    truth.validate();

    Rng rng(spec.seed);
    std::vector<double> noise(spec.n);
    if (spec.ar_errors && spec.ar_phi != 0.0) {
        if (std::fabs(spec.ar_phi) >= 1.0) throw Error("simulate: |phi| must be < 1");
        // stationary start
        noise[0] = rng.next_normal() * spec.noise_sd / std::sqrt(1.0 - spec.ar_phi * spec.ar_phi);
        for (std::size_t t = 1; t < spec.n; ++t)
            noise[t] = spec.ar_phi * noise[t - 1] + rng.next_normal() * spec.noise_sd;
    } else {
        for (auto& v : noise) v = rng.next_normal() * spec.noise_sd;
    }
    std::vector<double> x(spec.n);
    for (std::size_t t = 1; t <= spec.n; ++t)
        x[t - 1] = spec.segment_means[truth.segment_of(t)] + noise[t - 1];
    return {TimeSeries(std::move(x), 1, 1, "simulated"), truth};
}

std::string cache_root() {
    if (const char* env = std::getenv("CPKIT_CACHE_DIR"); env && *env) return env;
    if (const char* home = std::getenv("HOME"); home && *home)
        return std::string(home) + "/.cache/cpkit";
    return "./cpkit_cache";
}

std::string cache_path(DatasetSource source, const std::string& filename) {
    const char* dir = "local";
    switch (source) {
        case DatasetSource::Cet: dir = "cet"; break;
        case DatasetSource::BerkeleyStation: dir = "berkeley"; break;
        case DatasetSource::NsidcSeaIce: dir = "nsidc"; break;
        case DatasetSource::LocalCsv: dir = "local"; break;
    }
    return cache_root() + "/" + dir + "/" + filename;
}

} // namespace cpkit
