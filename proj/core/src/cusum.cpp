#include "cpkit/cusum.hpp"

#include <cmath>

#include "cpkit/errors.hpp"

namespace cpkit {

std::vector<double> cusum(const TimeSeries& series) {
    const std::size_t n = series.size();
    if (n < 4) throw SeriesTooShort("cusum: need N >= 4");
    const auto& x = series.values();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(n);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sigma2 = ss / double(n - 1);
    if (!(sigma2 > 0.0)) throw ZeroVariance("cusum: constant series");
    const double scale = 1.0 / (std::sqrt(sigma2) * std::sqrt(double(n)));

    std::vector<double> out(n);
    double cs = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        cs += x[k];
        out[k] = scale * (cs - double(k + 1) * mean);
    }
    out[n - 1] = 0.0; // telescoping identity, exact
    return out;
}

namespace {

std::size_t argmax_abs(const std::vector<double>& c) {
    // k_hat in 2..N; smallest k wins ties
    std::size_t best = 2;
    double bv = std::fabs(c[1]);
    for (std::size_t k = 3; k <= c.size(); ++k) {
        const double v = std::fabs(c[k - 1]);
        if (v > bv) {
            bv = v;
            best = k;
        }
    }
    return best;
}

} // namespace

AmocResult scusum_test(const TimeSeries& series, const NullDistribution& null) {
    if (null.kind() != NullKind::IntegratedBridgeSquared)
        throw Error("scusum_test: null table kind mismatch");
    const auto c = cusum(series);
    double s = 0.0;
    for (double v : c) s += v * v;
    s /= double(c.size());

    AmocResult r;
    r.statistic = s;
    r.statistic_kind = AmocKind::Scusum;
    r.changepoint_index = argmax_abs(c);
    r.changepoint_label = series.label_of(r.changepoint_index);
    r.p_value = null.p_value(s);
    r.critical_values = scusum_table1();
    return r;
}

AmocResult max_cusum_test(const TimeSeries& series, bool trend_adjusted,
                          const NullDistribution& null) {
    const auto want = trend_adjusted ? NullKind::SupTrendAdjusted : NullKind::SupBridge;
    if (null.kind() != want) throw Error("max_cusum_test: null table kind mismatch");
    const auto c = cusum(series);
    const std::size_t khat = argmax_abs(c);
    const double d = std::fabs(c[khat - 1]);

    AmocResult r;
    r.statistic = d;
    r.statistic_kind = trend_adjusted ? AmocKind::CusumD : AmocKind::MaxCusum;
    r.changepoint_index = khat;
    r.changepoint_label = series.label_of(khat);
    r.p_value = null.p_value(d);
    for (double pct : {90.0, 95.0, 97.5, 99.0})
        r.critical_values[pct] = null.critical_value(pct);
    return r;
}

AmocResult amoc_pipeline(const TimeSeries& series, MeanKind mean_kind, int p,
                         const NullTables& tables) {
    const bool trend = (mean_kind == MeanKind::LinearTrend);
    TimeSeries work = series;
    bool prewhitened = false;
    if (p >= 1 || trend || mean_kind == MeanKind::SeasonalOffsets) {
        // p = 0 reduces prewhiten to pure mean removal
        const auto fit = fit_ar(series, mean_kind, p);
        work = prewhiten(series, fit);
        prewhitened = (p >= 1);
    }
    AmocResult r;
    if (trend) {
        if (!tables.sup_trend) throw Error("amoc_pipeline: missing SupTrendAdjusted table");
        r = max_cusum_test(work, true, *tables.sup_trend);
    } else {
        if (!tables.int_bridge2) throw Error("amoc_pipeline: missing IntegratedBridgeSquared table");
        r = scusum_test(work, *tables.int_bridge2);
    }
    r.prewhitened = prewhitened;
    return r;
}

} // namespace cpkit
