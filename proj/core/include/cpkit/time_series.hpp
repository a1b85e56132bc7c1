#ifndef CPKIT_TIME_SERIES_HPP
#define CPKIT_TIME_SERIES_HPP

#include <string>
#include <vector>

#include "cpkit/errors.hpp"

namespace cpkit {

// Univariate series with a declared period T.  Observation t (1-based) falls
// in season nu = ((t-1) mod T) + 1.  Values must be finite; missing values
// are rejected at construction.  Calendar labels are display metadata only.
class TimeSeries {
public:
    TimeSeries(std::vector<double> values, int period = 1, int start_label = 1,
               std::string label = {});

    const std::vector<double>& values() const { return values_; }
    int period() const { return period_; }
    int start_label() const { return start_label_; }
    const std::string& label() const { return label_; }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    // season of 1-based time t
    int season(std::size_t t) const {
        return int((t - 1) % std::size_t(period_)) + 1;
    }
    // calendar label of 1-based time t (annual series: the year)
    int label_of(std::size_t t) const {
        return start_label_ + int((t - 1) / std::size_t(period_));
    }

private:
    std::vector<double> values_;
    int period_;
    int start_label_;
    std::string label_;
};

struct SeasonalStats {
    std::vector<double> means;    // mu_hat per season, length T
    std::vector<double> std_devs; // sigma_hat per season, length T
    int cycles = 0;               // complete cycles d used
};

struct AcfResult {
    std::vector<int> lags;            // 0..max_lag
    std::vector<double> correlations; // same length
    double white_noise_band = 0.0;    // +-1.96/sqrt(N)
};

// Per-season mean and standard deviation over complete cycles.
// mu_nu = d^-1 sum_n X_{nT+nu};  sigma_nu^2 = sum_n (X-mu)^2 / (d-1).
// Requires d >= 2 complete cycles; partial trailing cycles are an error.
SeasonalStats seasonal_stats(const TimeSeries& series);

// (X_{nT+nu} - mu_nu) / sigma_nu
TimeSeries standardize(const TimeSeries& series, const SeasonalStats& stats);

// Lag correlations of a pre-standardized series with the dT divisor:
//   corr(h) = (1/N) sum_t S_t S_{t+h}
// The divisor is N (= dT) for every lag, not N-h, so corr(0) equals the
// sample variance with divisor N (approximately 1 when sigma_hat used d-1).
// White-noise band is +-1.96/sqrt(N).  Caller standardizes first.
AcfResult acf(const TimeSeries& series, int max_lag);

// Elementwise target - reference; lengths, periods and start labels must agree.
TimeSeries difference(const TimeSeries& target, const TimeSeries& reference);

} // namespace cpkit

#endif
