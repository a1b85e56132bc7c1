#ifndef CPKIT_DATASETS_HPP
#define CPKIT_DATASETS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cpkit/segment_model.hpp"
#include "cpkit/time_series.hpp"

namespace cpkit {

enum class DatasetSource { Cet, BerkeleyStation, NsidcSeaIce, LocalCsv };

struct DatasetSpec {
    DatasetSource source = DatasetSource::LocalCsv;
    std::string path;
    int year_start = 0;
    int year_end = 0; // inclusive; both 0 means "whole file"
    // column mapping for LocalCsv / BerkeleyStation files
    std::string year_column = "year";
    std::string value_column = "value";
    std::string month_column; // optional; when set the series is monthly (T = 12)
};

// Parse a local file into an annual (or monthly, when a month column is
// mapped) series restricted to the year range.  No network access here; the
// fetch command populates the cache.
//   Cet: Met Office fixed-column format, year + 12 monthly + annual mean;
//        the published annual column is used; -99.9 sentinels inside the
//        requested range are an error.
//   NsidcSeaIce: CSV with year and extent (million km^2) columns.
//   LocalCsv/BerkeleyStation: header row, columns year,value.
TimeSeries load(const DatasetSpec& spec);

// write a series in the LocalCsv format (values round-trip exactly)
void write_local_csv(const std::string& path, const TimeSeries& series);

struct SimSpec {
    std::size_t n = 0;
    std::vector<double> segment_means;       // one per segment
    std::vector<std::size_t> changepoints;   // strictly increasing, in 2..N
    bool ar_errors = false;                  // IID when false
    double ar_phi = 0.0;
    double noise_sd = 1.0;                   // innovation standard deviation
    std::uint64_t seed = 1;
};

// Deterministic synthetic series plus the true configuration for scoring.
std::pair<TimeSeries, ChangepointConfig> simulate(const SimSpec& spec);

// cache root (CPKIT_CACHE_DIR overrides) and the per-source layout
std::string cache_root();
std::string cache_path(DatasetSource source, const std::string& filename);

} // namespace cpkit

#endif
