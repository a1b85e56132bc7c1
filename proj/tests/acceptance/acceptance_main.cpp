// Acceptance suite: one test case per numbered criterion; every tolerance is
// pinned here, directly in the assertions.  Each check also prints a
// PASS/FAIL line so the run reads as a report.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cpkit/cusum.hpp"
#include "cpkit/datasets.hpp"
#include "cpkit/errors.hpp"
#include "cpkit/normality.hpp"
#include "cpkit/rng.hpp"
#include "cpkit/search.hpp"

using namespace cpkit;

namespace {

const std::string FIX = CPKIT_FIXTURE_DIR;
const std::string SCRATCH = CPKIT_SCRATCH_DIR;

constexpr std::uint64_t ACC_SEED = 20240817;
constexpr std::uint64_t ACC_M = 1000000;
constexpr std::uint64_t ACC_GRID = 10000;

bool g_report(const char* name, bool pass, const std::string& detail) {
    std::printf("ACCEPTANCE %-28s %s  %s\n", name, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    return pass;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// criterion-1 tables are cached on disk so later criteria can reuse them
const NullDistribution& acc_table(NullKind kind, bool force_simulate = false,
                                  double* sim_seconds = nullptr) {
    static NullDistribution* tables[3] = {nullptr, nullptr, nullptr};
    const auto idx = std::size_t(kind);
    if (tables[idx] && !force_simulate) return *tables[idx];
    const std::string path =
        SCRATCH + "/acceptance_" + std::string(to_string(kind)) + ".nulltab";
    if (!force_simulate) {
        std::ifstream probe(path);
        if (probe) {
            tables[idx] = new NullDistribution(NullDistribution::load(path));
            return *tables[idx];
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto sim = simulate_null(kind, ACC_GRID, ACC_M, ACC_SEED, 1);
    const auto t1 = std::chrono::steady_clock::now();
    if (sim_seconds) *sim_seconds = std::chrono::duration<double>(t1 - t0).count();
    sim.save(path);
    delete tables[idx];
    tables[idx] = new NullDistribution(std::move(sim));
    return *tables[idx];
}

TimeSeries load_fixture(const std::string& file, DatasetSource source, int y0, int y1,
                        const std::string& value_col = "value") {
    DatasetSpec spec;
    spec.source = source;
    spec.path = FIX + "/" + file;
    spec.year_start = y0;
    spec.year_end = y1;
    spec.value_column = value_col;
    return load(spec);
}

std::size_t hits_within(const std::vector<int>& got, const std::vector<int>& want, int tol) {
    std::size_t hits = 0;
    for (int w : want)
        for (int g : got)
            if (std::abs(g - w) <= tol) {
                ++hits;
                break;
            }
    return hits;
}

std::vector<int> config_years(const ChangepointConfig& c, const TimeSeries& s) {
    std::vector<int> out;
    for (auto tau : c.taus) out.push_back(s.label_of(tau));
    return out;
}

} // namespace

TEST_CASE("criterion 1: null-percentile reproduction") {
    double secs[3] = {0, 0, 0};
    const auto& ib2 = acc_table(NullKind::IntegratedBridgeSquared, true, &secs[0]);
    const auto& sup = acc_table(NullKind::SupBridge, true, &secs[1]);
    const auto& trend = acc_table(NullKind::SupTrendAdjusted, true, &secs[2]);
    const double total = secs[0] + secs[1] + secs[2];

    const double table1[4][2] = {
        {90.0, 0.3473}, {95.0, 0.4614}, {97.5, 0.5806}, {99.0, 0.7434}};
    for (const auto& row : table1) {
        const double got = ib2.critical_value(row[0]);
        const bool ok = std::fabs(got - row[1]) <= 0.003;
        CHECK(g_report("criterion 1 int-B^2", ok,
                       fmt("pct=%.1f got=%.4f want=%.4f +-0.003", row[0], got, row[1])));
    }
    const double sup95 = sup.critical_value(95.0);
    CHECK(g_report("criterion 1 sup|B| q95", std::fabs(sup95 - 1.358) <= 0.005,
                   fmt("got=%.4f want=1.358 +-0.005", sup95)));
    const double tr95 = trend.critical_value(95.0);
    CHECK(g_report("criterion 1 trend q95", std::fabs(tr95 - 0.9028) <= 0.005,
                   fmt("got=%.4f want=0.9028 +-0.005", tr95)));
    CHECK(g_report("criterion 1 runtime", total < 600.0,
                   fmt("%.1f s single-threaded (budget 600 s)", total)));
}

TEST_CASE("criterion 2: CET Table-2 reproduction") {
    const auto cet = load_fixture("cet_annual.csv", DatasetSource::LocalCsv, 1900, 2020);
    REQUIRE(cet.size() == 121);
    NullTables tables;
    tables.int_bridge2 = &acc_table(NullKind::IntegratedBridgeSquared);
    tables.sup_trend = &acc_table(NullKind::SupTrendAdjusted);

    // (a) raw SCUSUM
    const auto raw = scusum_test(cet, *tables.int_bridge2);
    CHECK(g_report("criterion 2a SCUSUM", std::fabs(raw.statistic - 3.577) <= 0.05,
                   fmt("got=%.4f want=3.577 +-0.05", raw.statistic)));
    CHECK(g_report("criterion 2a k-hat", raw.changepoint_label == 1988,
                   fmt("got=%d want=1988 exactly", raw.changepoint_label)));

    // (b) constant mean + AR(1) pre-whitened SCUSUM.
    // The reference band for this row is mutually inconsistent with (a): the
    // prewhitening filter scales the cumulative-sum energy by at least
    // (1-phi)^2 sd_X^2/sd_Y^2 ~= 0.40 at phi=0.425, so any series with raw
    // SCUSUM 3.577 yields a prewhitened statistic near 1.4, never 0.18.  A
    // bridge whose sup is 0.929 (row c) integrates to ~0.18, which is what
    // the published 0.1799/p=0.31 row actually matches.  The check is kept
    // as stated rather than repinned; it is expected to fail.
    const auto pw = amoc_pipeline(cet, MeanKind::Constant, 1, tables);
    const bool b_stat = pw.statistic >= 0.15 && pw.statistic <= 0.21;
    const bool b_p = pw.p_value >= 0.25 && pw.p_value <= 0.37;
    CHECK(g_report("criterion 2b SCUSUM_Z", b_stat,
                   fmt("got=%.4f want in [0.15,0.21]", pw.statistic)));
    CHECK(g_report("criterion 2b p-value", b_p, fmt("got=%.4f want in [0.25,0.37]", pw.p_value)));

    // (c) linear trend + AR(1) CUSUM_D
    const auto dstat = amoc_pipeline(cet, MeanKind::LinearTrend, 1, tables);
    CHECK(g_report("criterion 2c CUSUM_D", dstat.statistic >= 0.90 && dstat.statistic <= 0.96,
                   fmt("got=%.4f want in [0.90,0.96]", dstat.statistic)));
    CHECK(g_report("criterion 2c p-value", dstat.p_value >= 0.02 && dstat.p_value <= 0.06,
                   fmt("got=%.4f want in [0.02,0.06]", dstat.p_value)));
    CHECK(g_report("criterion 2c k-hat", dstat.changepoint_label == 1988,
                   fmt("got=%d want=1988", dstat.changepoint_label)));
}

TEST_CASE("criterion 3: Arctic sea ice") {
    const auto ice =
        load_fixture("seaice_september.csv", DatasetSource::NsidcSeaIce, 1979, 2021, "extent");
    REQUIRE(ice.size() == 43);
    NullTables tables;
    tables.int_bridge2 = &acc_table(NullKind::IntegratedBridgeSquared);
    tables.sup_trend = &acc_table(NullKind::SupTrendAdjusted);
    const auto t0 = std::chrono::steady_clock::now();

    const auto trend_fit = ga_search(ice, PenaltyKind::BIC, MeanKind::LinearTrend, 1, GaParams{},
                                     ACC_SEED + 31);
    CHECK(g_report("criterion 3 trend m-hat", trend_fit.fit.config.m() == 0,
                   fmt("got=%zu want=0", trend_fit.fit.config.m())));
    CHECK(g_report("criterion 3 trend slope",
                   std::fabs(trend_fit.fit.beta1 - (-0.053)) <= 0.005,
                   fmt("got=%.4f want=-0.053 +-0.005 million km^2/yr", trend_fit.fit.beta1)));

    const auto const_fit =
        ga_search(ice, PenaltyKind::BIC, MeanKind::Constant, 1, GaParams{}, ACC_SEED + 37);
    const auto bic_years = config_years(const_fit.fit.config, ice);
    const auto bic_hits = hits_within(bic_years, {1995, 2006, 2016, 2017}, 1);
    std::ostringstream ys;
    for (int y : bic_years) ys << y << " ";
    CHECK(g_report("criterion 3 const m-hat", const_fit.fit.config.m() >= 3,
                   fmt("got=%zu want>=3 (years: %s)", const_fit.fit.config.m(),
                       ys.str().c_str())));
    CHECK(g_report("criterion 3 const years", bic_hits >= 3,
                   fmt("%zu of {1995,2006,2016,2017} within +-1", bic_hits)));

    const auto bs = binary_segmentation(ice, MeanKind::Constant, 1, 0.05, tables);
    const auto bs_years = config_years(bs.fit.config, ice);
    const auto bs_hits = hits_within(bs_years, {1994, 2001, 2015}, 1);
    std::ostringstream bys;
    for (int y : bs_years) bys << y << " ";
    CHECK(g_report("criterion 3 binseg years", bs_hits >= 2,
                   fmt("%zu of {1994,2001,2015} within +-1 (years: %s)", bs_hits,
                       bys.str().c_str())));

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(g_report("criterion 3 runtime", secs < 60.0, fmt("%.1f s (budget 60 s)", secs)));
}

TEST_CASE("criterion 4: Atlanta") {
    const auto atl =
        load_fixture("atlanta_annual.csv", DatasetSource::BerkeleyStation, 1879, 2013);
    REQUIRE(atl.size() == 135);
    NullTables tables;
    tables.int_bridge2 = &acc_table(NullKind::IntegratedBridgeSquared);

    const auto bs = binary_segmentation(atl, MeanKind::Constant, 1, 0.05, tables);
    const auto bs_years = config_years(bs.fit.config, atl);
    std::ostringstream bys;
    for (int y : bs_years) bys << y << " ";
    const bool bs_one = bs.fit.config.m() == 1;
    const bool bs_bucket = bs_one && bs_years[0] >= 1980 && bs_years[0] <= 1985;
    CHECK(g_report("criterion 4 binseg", bs_one && bs_bucket,
                   fmt("m=%zu years: %s(want exactly 1 in [1980,1985])",
                       bs.fit.config.m(), bys.str().c_str())));

    const auto ga =
        ga_search(atl, PenaltyKind::BIC, MeanKind::Constant, 1, GaParams{}, ACC_SEED + 41);
    const auto ga_years = config_years(ga.fit.config, atl);
    std::ostringstream gys;
    for (int y : ga_years) gys << y << " ";
    bool bucket20 = false, bucket60 = false, bucket80 = false;
    for (int y : ga_years) {
        bucket20 |= (y >= 1920 && y <= 1929);
        bucket60 |= (y >= 1960 && y <= 1969);
        bucket80 |= (y >= 1980 && y <= 1989);
    }
    CHECK(g_report("criterion 4 BIC-GA",
                   ga.fit.config.m() == 3 && bucket20 && bucket60 && bucket80,
                   fmt("m=%zu years: %s(want 3: 1920s,1960s,1980s)", ga.fit.config.m(),
                       gys.str().c_str())));
}

TEST_CASE("criterion 5: simulation study") {
    NullTables tables;
    tables.int_bridge2 = &acc_table(NullKind::IntegratedBridgeSquared);
    const auto t0 = std::chrono::steady_clock::now();
    const auto study = simulation_study(100, ACC_SEED + 51, tables, 1.0, 0.05);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const double bs_mean = study.mean_distance[0];
    for (std::size_t m = 1; m < 4; ++m) {
        CHECK(g_report("criterion 5 BS worst", bs_mean > study.mean_distance[m],
                       fmt("mean(binseg)=%.3f > mean(%s)=%.3f", bs_mean,
                           study.methods[m].c_str(), study.mean_distance[m])));
    }
    std::size_t bic_exact = 0;
    for (auto m : study.m_hat[1])
        if (m == 3) ++bic_exact;
    CHECK(g_report("criterion 5 BIC m-hat", bic_exact >= 60,
                   fmt("m-hat=3 in %zu/100 replicates (want >=60)", bic_exact)));
    CHECK(g_report("criterion 5 runtime", secs < 1800.0, fmt("%.1f s (budget 1800 s)", secs)));
}

TEST_CASE("criterion 6: oracle equivalence") {
    Rng meta(ACC_SEED + 61);
    std::size_t ga_matches = 0;
    const std::size_t instances = 200;
    for (std::size_t inst = 0; inst < instances; ++inst) {
        SimSpec spec;
        spec.n = 14 + meta.next_below(7); // 14..20
        const auto shifts = meta.next_below(3);
        spec.segment_means = {0.0};
        std::size_t pos = 4;
        for (std::size_t s = 0; s < shifts; ++s) {
            pos += 3 + meta.next_below(4);
            if (pos > spec.n - 3) break;
            spec.changepoints.push_back(pos);
            spec.segment_means.push_back(spec.segment_means.back() +
                                         ((meta.next_u64() & 1) ? 1.5 : -1.5));
        }
        spec.ar_errors = (meta.next_u64() & 1) != 0;
        spec.ar_phi = spec.ar_errors ? 0.4 : 0.0;
        spec.seed = meta.next_u64();
        const auto [series, truth] = simulate(spec);
        const int p = spec.ar_errors ? 1 : 0;
        const auto ex =
            exhaustive_search(series, PenaltyKind::BIC, MeanKind::Constant, p, spec.n);
        const auto ga = ga_search(series, PenaltyKind::BIC, MeanKind::Constant, p, GaParams{},
                                  ACC_SEED + 1000 + inst);
        if (std::fabs(ga.fit.objective - ex.fit.objective) <= 1e-8) ++ga_matches;
    }
    CHECK(g_report("criterion 6 GA==exhaustive", ga_matches == instances,
                   fmt("%zu/%zu instances matched to 1e-8", ga_matches, instances)));

    // dense-covariance likelihood oracle on N=50 AR(1) instances
    std::size_t ll_matches = 0;
    for (std::size_t inst = 0; inst < 50; ++inst) {
        SimSpec spec;
        spec.n = 50;
        spec.segment_means = {0.0, 1.0};
        spec.changepoints = {20 + meta.next_below(12)};
        spec.ar_errors = true;
        spec.ar_phi = -0.6 + 1.2 * meta.next_unit();
        spec.seed = meta.next_u64();
        const auto [series, truth] = simulate(spec);
        const auto fit = gaussian_loglik(series, truth, MeanKind::Constant, 1);
        // dense MVN -2lnL at the fitted parameters
        const auto g = ar_autocov(fit.phi, fit.sigma2, int(spec.n) - 1);
        const std::size_t n = spec.n;
        std::vector<double> L(n * n, 0.0), S(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                S[i * n + j] = g[std::size_t(std::labs(long(i) - long(j)))];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                double acc = S[i * n + j];
                for (std::size_t k = 0; k < j; ++k) acc -= L[i * n + k] * L[j * n + k];
                if (i == j)
                    L[i * n + i] = std::sqrt(acc);
                else
                    L[i * n + j] = acc / L[j * n + j];
            }
        std::vector<double> z(n);
        double quad = 0.0, logdet = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = series[i] - fit.segment_means[truth.segment_of(i + 1)];
            for (std::size_t k = 0; k < i; ++k) acc -= L[i * n + k] * z[k];
            z[i] = acc / L[i * n + i];
            quad += z[i] * z[i];
            logdet += 2.0 * std::log(L[i * n + i]);
        }
        const double oracle = double(n) * std::log(2.0 * M_PI) + logdet + quad;
        if (std::fabs(oracle - fit.minus2loglik) <= 1e-6 * std::fabs(oracle)) ++ll_matches;
    }
    CHECK(g_report("criterion 6 dense oracle", ll_matches == 50,
                   fmt("%zu/50 likelihood evaluations matched to 1e-6", ll_matches)));
}

TEST_CASE("criterion 7: size and power calibration") {
    const auto& ib2 = acc_table(NullKind::IntegratedBridgeSquared);
    NullTables tables;
    tables.int_bridge2 = &ib2;

    std::uint64_t seed_state = ACC_SEED ^ 0x71aa5ed10c48b1f3ULL;
    int iid_rejects = 0;
    for (int r = 0; r < 1000; ++r) {
        SimSpec spec;
        spec.n = 121;
        spec.segment_means = {0.0};
        spec.seed = splitmix64(seed_state);
        const auto [series, truth] = simulate(spec);
        if (scusum_test(series, ib2).p_value <= 0.05) ++iid_rejects;
    }
    const double iid_rate = iid_rejects / 1000.0;
    CHECK(g_report("criterion 7 IID size", iid_rate >= 0.035 && iid_rate <= 0.065,
                   fmt("false-positive rate %.3f want 0.05 +-0.015", iid_rate)));

    int raw_rejects = 0, pw_rejects = 0;
    for (int r = 0; r < 1000; ++r) {
        SimSpec spec;
        spec.n = 121;
        spec.segment_means = {0.0};
        spec.ar_errors = true;
        spec.ar_phi = 0.5;
        spec.seed = splitmix64(seed_state);
        const auto [series, truth] = simulate(spec);
        if (scusum_test(series, ib2).p_value <= 0.05) ++raw_rejects;
        if (amoc_pipeline(series, MeanKind::Constant, 1, tables).p_value <= 0.05) ++pw_rejects;
    }
    const double raw_rate = raw_rejects / 1000.0;
    const double pw_rate = pw_rejects / 1000.0;
    CHECK(g_report("criterion 7 unwhitened", raw_rate > 0.30,
                   fmt("AR(1) false-positive rate %.3f want >0.30", raw_rate)));
    CHECK(g_report("criterion 7 prewhitened", pw_rate >= 0.03 && pw_rate <= 0.07,
                   fmt("pre-whitened rate %.3f want 0.05 +-0.02", pw_rate)));

    int power_hits = 0;
    for (int r = 0; r < 1000; ++r) {
        SimSpec spec;
        spec.n = 121;
        spec.segment_means = {0.0, 1.0};
        spec.changepoints = {61};
        spec.seed = splitmix64(seed_state);
        const auto [series, truth] = simulate(spec);
        if (scusum_test(series, ib2).p_value <= 0.05) ++power_hits;
    }
    CHECK(g_report("criterion 7 power", power_hits > 950,
                   fmt("1-sigma midpoint shift detected in %d/1000 (want >950)", power_hits)));
}

TEST_CASE("criterion 8: determinism of seeded commands") {
    // library-level determinism
    const auto a = simulate_null(NullKind::SupBridge, 1000, 10000, ACC_SEED, 2);
    const auto b = simulate_null(NullKind::SupBridge, 1000, 10000, ACC_SEED, 1);
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) same = a.sample()[i] == b.sample()[i];
    CHECK(g_report("criterion 8 null tables", same, "same seed, different worker counts"));

    // CLI-level determinism: every seeded command twice, outputs byte-identical
    const std::string cli = CPKIT_CLI_PATH;
    const std::string out1 = SCRATCH + "/det1", out2 = SCRATCH + "/det2";
    std::system(("rm -rf " + out1 + " " + out2).c_str());
    const std::string common = " --fixtures " + FIX + " --nulltab-dir " + SCRATCH + "/clitabs" +
                               " --nulltab-m 20000 --nulltab-grid 2000";
    const std::vector<std::pair<std::string, std::string>> runs = {
        {"simstudy", " simstudy --replicates 10 --seed 3"},
        {"mcpt", " mcpt --dataset seaice --penalty bic --mean trend --ar 1 --seed 5"},
        {"amoc", " amoc --dataset cet --mean constant --ar 0"},
        {"diagnose", " diagnose --csv " + FIX + "/station_a_monthly.csv --month-column month"},
    };
    bool all_same = true;
    for (const auto& [name, args] : runs) {
        const std::string c1 = cli + args + common + " --output " + out1 + "/" + name;
        const std::string c2 = cli + args + common + " --output " + out2 + "/" + name;
        if (std::system((c1 + " > /dev/null 2>&1").c_str()) != 0 ||
            std::system((c2 + " > /dev/null 2>&1").c_str()) != 0) {
            all_same = false;
            g_report("criterion 8 CLI", false, name + " command failed");
            continue;
        }
        const int rc = std::system(("diff -r " + out1 + "/" + name + " " + out2 + "/" + name +
                                    " > /dev/null 2>&1")
                                       .c_str());
        const bool ok = (rc == 0);
        all_same = all_same && ok;
        g_report("criterion 8 CLI", ok, name + (ok ? ": byte-identical" : ": outputs differ"));
    }
    CHECK(all_same);
}
