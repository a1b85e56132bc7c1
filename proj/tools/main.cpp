// cpkit command line: fetch, diagnose, amoc, mcpt, simstudy, nulltab.
// All output is plain text / CSV with 6-significant-digit formatting; every
// seeded command is byte-reproducible.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cpkit/cusum.hpp"
#include "cpkit/datasets.hpp"
#include "cpkit/errors.hpp"
#include "cpkit/normality.hpp"
#include "cpkit/search.hpp"

#include <httplib.h>

namespace fs = std::filesystem;
using namespace cpkit;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct CommonOpts {
    std::string output = "cpkit_out";
    std::string fixtures = CPKIT_DEFAULT_FIXTURE_DIR;
    std::string nulltab_dir;
    std::uint64_t nulltab_m = 200000;
    std::uint64_t nulltab_grid = 10000;
    std::uint64_t nulltab_seed = 777;
    std::uint64_t seed = 1;

    std::string nulltab_path() const {
        return nulltab_dir.empty() ? cache_root() + "/nulltab" : nulltab_dir;
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--output", opts.output, "output directory");
    cmd->add_option("--fixtures", opts.fixtures, "bundled fixture directory");
    cmd->add_option("--nulltab-dir", opts.nulltab_dir, "null-table cache directory");
    cmd->add_option("--nulltab-m", opts.nulltab_m, "Monte Carlo draws for generated tables");
    cmd->add_option("--nulltab-grid", opts.nulltab_grid, "bridge grid size for generated tables");
    cmd->add_option("--nulltab-seed", opts.nulltab_seed, "seed for generated tables");
    cmd->add_option("--seed", opts.seed, "random seed");
}

std::ofstream open_out(const std::string& dir, const std::string& file) {
    fs::create_directories(dir);
    std::ofstream out(dir + "/" + file);
    if (!out) throw FileNotFound("cannot write " + dir + "/" + file);
    return out;
}

// tables are generated once into the cache and reused from disk afterwards
class TableSet {
public:
    explicit TableSet(const CommonOpts& opts) : opts_(opts) {}

    const NullDistribution& get(NullKind kind) {
        auto& slot = slots_[std::size_t(kind)];
        if (slot) return *slot;
        const std::string dir = opts_.nulltab_path();
        const std::string path = dir + "/" + to_string(kind) + ".nulltab";
        if (fs::exists(path)) {
            slot = std::make_unique<NullDistribution>(NullDistribution::load(path));
            return *slot;
        }
        std::cerr << "generating null table " << to_string(kind) << " (M=" << opts_.nulltab_m
                  << ", grid=" << opts_.nulltab_grid << ") -> " << path << "\n";
        fs::create_directories(dir);
        auto sim = simulate_null(kind, opts_.nulltab_grid, opts_.nulltab_m, opts_.nulltab_seed);
        sim.save(path);
        slot = std::make_unique<NullDistribution>(std::move(sim));
        return *slot;
    }

    NullTables view() {
        NullTables t;
        t.int_bridge2 = &get(NullKind::IntegratedBridgeSquared);
        t.sup_trend = &get(NullKind::SupTrendAdjusted);
        return t;
    }

    // only the table the requested mean structure dispatches to
    NullTables view_for(MeanKind mean_kind) {
        NullTables t;
        if (mean_kind == MeanKind::LinearTrend)
            t.sup_trend = &get(NullKind::SupTrendAdjusted);
        else
            t.int_bridge2 = &get(NullKind::IntegratedBridgeSquared);
        return t;
    }

private:
    CommonOpts opts_;
    std::unique_ptr<NullDistribution> slots_[3];
};

struct DataOpts {
    std::string dataset; // cet | seaice | atlanta
    std::string csv;
    std::string month_column;
    std::string years; // "a:b"
    std::string reference_csv;
};

void add_data(CLI::App* cmd, DataOpts& d, bool with_reference = false) {
    cmd->add_option("--dataset", d.dataset, "bundled dataset: cet | seaice | atlanta");
    cmd->add_option("--csv", d.csv, "local CSV file (year,value)");
    cmd->add_option("--month-column", d.month_column, "month column name for monthly CSV input");
    cmd->add_option("--years", d.years, "inclusive year range a:b");
    if (with_reference)
        cmd->add_option("--reference", d.reference_csv, "reference series CSV for differencing");
}

std::pair<int, int> parse_years(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw Error("--years expects a:b");
    return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
}

TimeSeries load_dataset(const DataOpts& d, const CommonOpts& opts) {
    DatasetSpec spec;
    if (!d.csv.empty()) {
        spec.source = DatasetSource::LocalCsv;
        spec.path = d.csv;
        spec.month_column = d.month_column;
        if (!d.years.empty()) std::tie(spec.year_start, spec.year_end) = parse_years(d.years);
        return load(spec);
    }
    if (d.dataset == "cet") {
        spec.year_start = 1900;
        spec.year_end = 2020;
        if (!d.years.empty()) std::tie(spec.year_start, spec.year_end) = parse_years(d.years);
        const std::string cached = cache_path(DatasetSource::Cet, "cetml1659on.dat");
        if (fs::exists(cached)) {
            spec.source = DatasetSource::Cet;
            spec.path = cached;
        } else {
            spec.source = DatasetSource::LocalCsv;
            spec.path = opts.fixtures + "/cet_annual.csv";
        }
        return load(spec);
    }
    if (d.dataset == "seaice") {
        spec.year_start = 1979;
        spec.year_end = 2021;
        if (!d.years.empty()) std::tie(spec.year_start, spec.year_end) = parse_years(d.years);
        spec.value_column = "extent";
        const std::string cached = cache_path(DatasetSource::NsidcSeaIce, "N_09_extent_v3.0.csv");
        spec.source = DatasetSource::NsidcSeaIce;
        spec.path = fs::exists(cached) ? cached : opts.fixtures + "/seaice_september.csv";
        return load(spec);
    }
    if (d.dataset == "atlanta") {
        spec.year_start = 1879;
        spec.year_end = 2013;
        if (!d.years.empty()) std::tie(spec.year_start, spec.year_end) = parse_years(d.years);
        const std::string cached = cache_path(DatasetSource::BerkeleyStation, "atlanta.csv");
        spec.source = DatasetSource::BerkeleyStation;
        spec.path = fs::exists(cached) ? cached : opts.fixtures + "/atlanta_annual.csv";
        return load(spec);
    }
    throw Error("specify --dataset cet|seaice|atlanta or --csv FILE");
}

MeanKind parse_mean(const std::string& s) {
    if (s == "constant") return MeanKind::Constant;
    if (s == "trend") return MeanKind::LinearTrend;
    if (s == "seasonal") return MeanKind::SeasonalOffsets;
    throw Error("--mean must be constant | trend | seasonal");
}

PenaltyKind parse_penalty(const std::string& s) {
    if (s == "aic") return PenaltyKind::AIC;
    if (s == "bic") return PenaltyKind::BIC;
    if (s == "mbic") return PenaltyKind::mBIC;
    if (s == "mdl") return PenaltyKind::MDL;
    throw Error("--penalty must be aic | bic | mbic | mdl");
}

// ---------------------------------------------------------------- commands

int cmd_fetch(const std::string& which) {
    struct Item {
        const char* name;
        DatasetSource source;
        const char* host;
        const char* path;
        const char* file;
    };
    const Item items[] = {
        {"cet", DatasetSource::Cet, "https://www.metoffice.gov.uk",
         "/hadobs/hadcet/data/legacy/cetml1659on.dat", "cetml1659on.dat"},
        {"seaice", DatasetSource::NsidcSeaIce, "https://noaadata.apps.nsidc.org",
         "/NOAA/G02135/north/monthly/data/N_09_extent_v3.0.csv", "N_09_extent_v3.0.csv"},
    };
    bool any = false, failed = false;
    for (const auto& item : items) {
        if (which != "all" && which != item.name) continue;
        any = true;
        const std::string dest = cache_path(item.source, item.file);
        std::cerr << "fetching " << item.host << item.path << " -> " << dest << "\n";
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
        httplib::Client client(item.host);
        client.set_follow_location(true);
        client.set_connection_timeout(30);
        const auto res = client.Get(item.path);
        if (!res || res->status != 200) {
            std::cerr << "  failed: " << (res ? std::to_string(res->status) : "no connection")
                      << "\n";
            failed = true;
            continue;
        }
        fs::create_directories(fs::path(dest).parent_path());
        std::ofstream out(dest, std::ios::binary);
        out << res->body;
        std::cerr << "  ok (" << res->body.size() << " bytes)\n";
#else
        std::cerr << "  skipped: built without TLS support\n";
        failed = true;
#endif
    }
    if (which == "atlanta" || which == "all")
        std::cerr << "atlanta: Berkeley Earth station exports have no stable direct URL; "
                     "download the raw annual averages manually to "
                  << cache_path(DatasetSource::BerkeleyStation, "atlanta.csv") << "\n";
    if (!any && which != "atlanta") throw Error("unknown dataset: " + which);
    return failed ? 3 : 0;
}

int cmd_diagnose(const DataOpts& d, const CommonOpts& opts, int max_lag) {
    const auto series = load_dataset(d, opts);
    const auto stats = seasonal_stats(series);
    const auto z = standardize(series, stats);

    auto sout = open_out(opts.output, "seasonal_stats.csv");
    sout << "season,mean,sd\n";
    for (std::size_t nu = 0; nu < stats.means.size(); ++nu)
        sout << nu + 1 << "," << num(stats.means[nu]) << "," << num(stats.std_devs[nu]) << "\n";

    const int lags = std::min<int>(max_lag, int(series.size()) - 1);
    const auto r = acf(z, lags);
    auto aout = open_out(opts.output, "acf.csv");
    aout << "lag,correlation,white_noise_band\n";
    for (std::size_t i = 0; i < r.correlations.size(); ++i)
        aout << r.lags[i] << "," << num(r.correlations[i]) << "," << num(r.white_noise_band)
             << "\n";

    const auto sw = shapiro_wilk(z.values());
    auto rep = open_out(opts.output, "report.txt");
    rep << "n=" << series.size() << " period=" << series.period()
        << " cycles=" << stats.cycles << "\n";
    rep << "shapiro_wilk_w=" << num(sw.statistic) << " p_value=" << num(sw.p_value) << "\n";
    std::cout << "diagnose: n=" << series.size() << " period=" << series.period()
              << " shapiro_p=" << num(sw.p_value) << "\n";

    if (!d.reference_csv.empty()) {
        DataOpts ref = d;
        ref.csv = d.reference_csv;
        ref.dataset.clear();
        const auto reference = load_dataset(ref, opts);
        const auto diff = difference(series, reference);
        const auto dstats = seasonal_stats(diff);
        const auto dz = standardize(diff, dstats);
        const auto rd = acf(dz, lags);
        auto dout = open_out(opts.output, "acf_diff.csv");
        dout << "lag,correlation,white_noise_band\n";
        for (std::size_t i = 0; i < rd.correlations.size(); ++i)
            dout << rd.lags[i] << "," << num(rd.correlations[i]) << ","
                 << num(rd.white_noise_band) << "\n";
        rep << "difference_series=written acf_diff.csv\n";
    }
    return 0;
}

int cmd_amoc(const DataOpts& d, const CommonOpts& opts, const std::string& mean, int p) {
    const auto series = load_dataset(d, opts);
    const MeanKind mk = parse_mean(mean);
    TableSet tables(opts);
    auto view = tables.view_for(mk);
    const auto result = amoc_pipeline(series, mk, p, view);

    const char* kind = result.statistic_kind == AmocKind::Scusum
                           ? "SCUSUM"
                           : (result.statistic_kind == AmocKind::CusumD ? "CUSUM_D" : "D*");
    std::ostringstream rep;
    rep << "series=" << series.label() << " n=" << series.size() << " years="
        << series.label_of(1) << ":" << series.label_of(series.size()) << "\n";
    rep << "mean_model=" << mean << " ar_order=" << p
        << " prewhitened=" << (result.prewhitened ? "yes" : "no") << "\n";
    rep << "test=" << kind << " statistic=" << num(result.statistic)
        << " p_value=" << num(result.p_value) << "\n";
    rep << "changepoint_year=" << result.changepoint_label
        << " (argmax |CUSUM| at k=" << result.changepoint_index << ")\n";
    rep << "critical_values:";
    for (const auto& [pct, cv] : result.critical_values)
        rep << " " << num(pct) << "%:" << num(cv);
    rep << "\n";
    rep << "decision_95=" << (result.p_value <= 0.05 ? "changepoint" : "no changepoint") << "\n";

    auto out = open_out(opts.output, "amoc_report.txt");
    out << rep.str();
    std::cout << rep.str();

    // CUSUM trace of the series the test actually ran on
    TimeSeries tested = series;
    if (result.prewhitened || mk != MeanKind::Constant) {
        const auto fit = fit_ar(series, mk, p);
        tested = prewhiten(series, fit);
    }
    const auto trace = cusum(tested);
    auto tout = open_out(opts.output, "cusum_trace.csv");
    tout << "k,year,cusum\n";
    for (std::size_t k = 1; k <= trace.size(); ++k)
        tout << k << "," << series.label_of(k) << "," << num(trace[k - 1]) << "\n";
    return 0;
}

void write_segments(const std::string& dir, const std::string& file, const SearchResult& r,
                    const TimeSeries& series) {
    auto out = open_out(dir, file);
    out << "start_year,end_year,mean\n";
    const auto& c = r.fit.config;
    for (std::size_t i = 0; i < c.segments(); ++i) {
        const std::size_t lo = c.boundary(i), hi = c.boundary(i + 1) - 1;
        out << series.label_of(lo) << "," << series.label_of(hi) << ","
            << num(r.fit.segment_means[i]) << "\n";
    }
}

void write_fitted(const std::string& dir, const std::string& file, const SearchResult& r,
                  const TimeSeries& series) {
    auto out = open_out(dir, file);
    out << "year,value,fitted\n";
    const auto& c = r.fit.config;
    for (std::size_t t = 1; t <= series.size(); ++t) {
        double mu = r.fit.segment_means[c.segment_of(t)];
        if (r.fit.mean_kind == MeanKind::LinearTrend) mu += r.fit.beta1 * double(t);
        out << series.label_of(t) << "," << num(series[t - 1]) << "," << num(mu) << "\n";
    }
}

int cmd_mcpt(const DataOpts& d, const CommonOpts& opts, const std::string& method,
             const std::string& pen, const std::string& mean, int p, double alpha) {
    const auto series = load_dataset(d, opts);
    const MeanKind mk = parse_mean(mean);
    const PenaltyKind pk = parse_penalty(pen);
    TableSet tables(opts);

    std::ostringstream rep;
    std::optional<SearchResult> ga, bs;
    if (method == "ga" || method == "both") {
        ga = ga_search(series, pk, mk, p, GaParams{}, opts.seed);
        rep << "== penalized likelihood (GA, " << pen << ") ==\n";
        write_search_result(rep, *ga, series);
        write_segments(opts.output, "segments.csv", *ga, series);
        write_fitted(opts.output, "fitted.csv", *ga, series);
    }
    if (method == "binseg" || method == "both") {
        auto view = tables.view_for(mk);
        bs = binary_segmentation(series, mk, p, alpha, view);
        rep << "== binary segmentation (alpha=" << num(alpha) << ") ==\n";
        write_search_result(rep, *bs, series);
        const std::string seg_name = method == "both" ? "binseg_segments.csv" : "segments.csv";
        const std::string fit_name = method == "both" ? "binseg_fitted.csv" : "fitted.csv";
        write_segments(opts.output, seg_name, *bs, series);
        write_fitted(opts.output, fit_name, *bs, series);
    }
    if (!ga && !bs) throw Error("--method must be ga | binseg | both");

    auto out = open_out(opts.output, "mcpt_report.txt");
    out << rep.str();
    std::cout << rep.str();
    return 0;
}

int cmd_simstudy(const CommonOpts& opts, std::size_t replicates, double shift) {
    TableSet tables(opts);
    auto view = tables.view();
    const auto study = simulation_study(replicates, opts.seed, view, shift);

    auto dout = open_out(opts.output, "distances.csv");
    dout << "method,replicate,distance,m_hat\n";
    for (std::size_t m = 0; m < study.methods.size(); ++m)
        for (std::size_t r = 0; r < study.distances[m].size(); ++r)
            dout << study.methods[m] << "," << r + 1 << "," << num(study.distances[m][r]) << ","
                 << study.m_hat[m][r] << "\n";

    std::ostringstream rep;
    rep << "replicates=" << replicates << " shift=" << num(shift) << " seed=" << opts.seed
        << "\n";
    for (std::size_t m = 0; m < study.methods.size(); ++m) {
        std::size_t exact = 0;
        for (auto mh : study.m_hat[m])
            if (mh == 3) ++exact;
        rep << study.methods[m] << ": mean_distance=" << num(study.mean_distance[m])
            << " m_hat_3_rate=" << num(double(exact) / double(replicates)) << "\n";
    }
    auto out = open_out(opts.output, "summary.txt");
    out << rep.str();
    std::cout << rep.str();
    return 0;
}

int cmd_nulltab(const CommonOpts& opts) {
    const std::string dir = opts.nulltab_path();
    fs::create_directories(dir);
    for (auto kind : {NullKind::IntegratedBridgeSquared, NullKind::SupBridge,
                      NullKind::SupTrendAdjusted}) {
        const std::string path = dir + "/" + to_string(kind) + ".nulltab";
        std::cerr << "simulating " << to_string(kind) << " (M=" << opts.nulltab_m
                  << ", grid=" << opts.nulltab_grid << ", seed=" << opts.nulltab_seed << ")\n";
        const auto sim =
            simulate_null(kind, opts.nulltab_grid, opts.nulltab_m, opts.nulltab_seed);
        sim.save(path);
        std::cout << path << " q95=" << num(sim.critical_value(95.0)) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"changepoint analysis toolkit for climate-style series"};
    app.require_subcommand(1);

    CommonOpts opts;
    DataOpts data;

    auto* fetch = app.add_subcommand("fetch", "download datasets into the cache");
    std::string which = "all";
    fetch->add_option("--dataset", which, "cet | seaice | atlanta | all");

    auto* diagnose = app.add_subcommand("diagnose", "seasonal stats, ACF, normality");
    add_common(diagnose, opts);
    add_data(diagnose, data, true);
    int max_lag = 20;
    diagnose->add_option("--max-lag", max_lag, "maximum ACF lag");

    auto* amoc = app.add_subcommand("amoc", "single-changepoint tests");
    add_common(amoc, opts);
    add_data(amoc, data);
    std::string mean = "constant";
    int ar_order = 1;
    amoc->add_option("--mean", mean, "constant | trend");
    amoc->add_option("--ar", ar_order, "AR order for pre-whitening (0 = none)");

    auto* mcpt = app.add_subcommand("mcpt", "multiple-changepoint search");
    add_common(mcpt, opts);
    add_data(mcpt, data);
    std::string method = "ga", pen = "bic", mcpt_mean = "constant";
    int mcpt_ar = 1;
    double alpha = 0.05;
    mcpt->add_option("--method", method, "ga | binseg | both");
    mcpt->add_option("--penalty", pen, "aic | bic | mbic | mdl");
    mcpt->add_option("--mean", mcpt_mean, "constant | trend");
    mcpt->add_option("--ar", mcpt_ar, "shared AR order");
    mcpt->add_option("--alpha", alpha, "binary segmentation significance level");

    auto* simstudy = app.add_subcommand("simstudy", "three-shift benchmark study");
    add_common(simstudy, opts);
    std::size_t replicates = 100;
    double shift = 1.0;
    simstudy->add_option("--replicates", replicates, "number of replicates");
    simstudy->add_option("--shift", shift, "shift magnitude in noise SDs");

    auto* nulltab = app.add_subcommand("nulltab", "regenerate null distribution tables");
    add_common(nulltab, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (fetch->parsed()) return cmd_fetch(which);
        if (diagnose->parsed()) return cmd_diagnose(data, opts, max_lag);
        if (amoc->parsed()) return cmd_amoc(data, opts, mean, ar_order);
        if (mcpt->parsed()) return cmd_mcpt(data, opts, method, pen, mcpt_mean, mcpt_ar, alpha);
        if (simstudy->parsed()) return cmd_simstudy(opts, replicates, shift);
        if (nulltab->parsed()) return cmd_nulltab(opts);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
