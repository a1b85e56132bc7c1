#include "cpkit/time_series.hpp"

#include <cmath>
#include <utility>

namespace cpkit {

TimeSeries::TimeSeries(std::vector<double> values, int period, int start_label,
                       std::string label)
    : values_(std::move(values)),
      period_(period),
      start_label_(start_label),
      label_(std::move(label)) {
    if (values_.size() < 2) throw InvalidSeries("series needs at least 2 observations");
    if (period_ < 1) throw InvalidSeries("period must be >= 1");
    for (double v : values_) {
        if (!std::isfinite(v)) throw InvalidSeries("non-finite value in series");
    }
}

SeasonalStats seasonal_stats(const TimeSeries& series) {
    const int T = series.period();
    const std::size_t N = series.size();
    if (N % std::size_t(T) != 0)
        throw FewerThanTwoCycles("partial trailing cycle; complete cycles required");
    const int d = int(N / std::size_t(T));
    if (d < 2) throw FewerThanTwoCycles("need at least 2 complete cycles");

    SeasonalStats out;
    out.cycles = d;
    out.means.assign(std::size_t(T), 0.0);
    out.std_devs.assign(std::size_t(T), 0.0);
    const auto& x = series.values();
    for (int nu = 0; nu < T; ++nu) {
        double m = 0.0;
        for (int n = 0; n < d; ++n) m += x[std::size_t(n) * T + nu];
        m /= d;
        double ss = 0.0;
        for (int n = 0; n < d; ++n) {
            const double dev = x[std::size_t(n) * T + nu] - m;
            ss += dev * dev;
        }
        const double var = ss / (d - 1);
        if (!(var > 0.0))
            throw NonPositiveVariance("constant season " + std::to_string(nu + 1));
        out.means[std::size_t(nu)] = m;
        out.std_devs[std::size_t(nu)] = std::sqrt(var);
    }
    return out;
}

TimeSeries standardize(const TimeSeries& series, const SeasonalStats& stats) {
    if (int(stats.means.size()) != series.period())
        throw PeriodMismatch("stats period differs from series period");
    std::vector<double> out(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) {
        const std::size_t nu = (t % std::size_t(series.period()));
        out[t] = (series[t] - stats.means[nu]) / stats.std_devs[nu];
    }
    return TimeSeries(std::move(out), series.period(), series.start_label(), series.label());
}

AcfResult acf(const TimeSeries& series, int max_lag) {
    const std::size_t N = series.size();
    if (max_lag < 0 || std::size_t(max_lag) >= N)
        throw LagTooLarge("max_lag must be < N");
    AcfResult out;
    out.white_noise_band = 1.96 / std::sqrt(double(N));
    const auto& s = series.values();
    for (int h = 0; h <= max_lag; ++h) {
        double acc = 0.0;
        for (std::size_t t = 0; t + std::size_t(h) < N; ++t) acc += s[t] * s[t + std::size_t(h)];
        out.lags.push_back(h);
        out.correlations.push_back(acc / double(N));
    }
    return out;
}

TimeSeries difference(const TimeSeries& target, const TimeSeries& reference) {
    if (target.size() != reference.size())
        throw LengthMismatch("target and reference lengths differ");
    if (target.period() != reference.period())
        throw PeriodMismatch("target and reference periods differ");
    if (target.start_label() != reference.start_label())
        throw LengthMismatch("target and reference start labels differ");
    std::vector<double> out(target.size());
    for (std::size_t t = 0; t < target.size(); ++t) out[t] = target[t] - reference[t];
    return TimeSeries(std::move(out), target.period(), target.start_label(),
                      target.label() + "-" + reference.label());
}

} // namespace cpkit
