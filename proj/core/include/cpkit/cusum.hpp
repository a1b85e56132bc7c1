#ifndef CPKIT_CUSUM_HPP
#define CPKIT_CUSUM_HPP

#include <map>
#include <vector>

#include "cpkit/ar_model.hpp"
#include "cpkit/null_distribution.hpp"
#include "cpkit/time_series.hpp"

namespace cpkit {

enum class AmocKind { Scusum, MaxCusum, CusumD };

struct AmocResult {
    double statistic = 0.0;
    AmocKind statistic_kind = AmocKind::Scusum;
    std::size_t changepoint_index = 0; // k_hat in 2..N, argmax |CUSUM(k)|
    int changepoint_label = 0;         // calendar label of k_hat
    double p_value = 1.0;
    std::map<double, double> critical_values; // percentile -> threshold
    bool prewhitened = false;
};

// CUSUM_X(k) = [sum_{t<=k} X_t - (k/N) sum_t X_t] / (sigma_hat sqrt(N)),
// sigma_hat^2 = sum (X_t - Xbar)^2 / (N-1).  Returned for k = 1..N;
// CUSUM(N) = 0 identically.
std::vector<double> cusum(const TimeSeries& series);

// Sum of squared CUSUMs scaled by the 1/N Riemann mesh, so the statistic
// converges to int_0^1 B^2(t) dt and Table-1 percentiles apply directly.
// Caller pre-whitens autocorrelated input first.
AmocResult scusum_test(const TimeSeries& series, const NullDistribution& null);

// D* = max_{2<=k<=N} |CUSUM(k)|.  With trend_adjusted the input series must
// be the residuals of a fitted linear trend (optionally AR-prewhitened) and
// the null must be SupTrendAdjusted.
AmocResult max_cusum_test(const TimeSeries& series, bool trend_adjusted,
                          const NullDistribution& null);

struct NullTables {
    const NullDistribution* int_bridge2 = nullptr;
    const NullDistribution* sup_bridge = nullptr;
    const NullDistribution* sup_trend = nullptr;
};

// Whole-series AMOC workflow: fits the mean structure and AR(p) under the
// no-changepoint null, pre-whitens when p >= 1, then dispatches SCUSUM for
// constant/seasonal means and the trend-adjusted max-CUSUM for linear trend.
AmocResult amoc_pipeline(const TimeSeries& series, MeanKind mean_kind, int p,
                         const NullTables& tables);

// Table-1 asymptotic critical values for the SCUSUM statistic
inline const std::map<double, double>& scusum_table1() {
    static const std::map<double, double> t{{90.0, 0.3473046},
                                            {95.0, 0.4613744},
                                            {97.5, 0.5806168},
                                            {99.0, 0.7434348}};
    return t;
}

} // namespace cpkit

#endif
