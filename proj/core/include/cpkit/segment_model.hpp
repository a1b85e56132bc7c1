#ifndef CPKIT_SEGMENT_MODEL_HPP
#define CPKIT_SEGMENT_MODEL_HPP

#include <cstddef>
#include <vector>

#include "cpkit/ar_model.hpp"
#include "cpkit/time_series.hpp"

namespace cpkit {

// Minimum admissible segment length: each segment needs its own mean; AR
// parameters are shared across segments so they impose nothing further.
inline constexpr std::size_t kMinSegment = 2;

// m changepoint times tau_1 < ... < tau_m in 2..N with the conventions
// tau_0 = 1, tau_{m+1} = N+1; observation t belongs to the segment i with
// tau_{i-1} <= t < tau_i.  A changepoint at tau starts a new regime at tau.
struct ChangepointConfig {
    std::vector<std::size_t> taus;
    std::size_t n = 0;

    std::size_t m() const { return taus.size(); }
    std::size_t segments() const { return taus.size() + 1; }
    // boundaries including the tau_0/tau_{m+1} conventions
    std::size_t boundary(std::size_t i) const {
        if (i == 0) return 1;
        if (i <= taus.size()) return taus[i - 1];
        return n + 1;
    }
    std::size_t segment_of(std::size_t t) const;
    void validate(std::size_t min_seg = kMinSegment) const;

    bool operator==(const ChangepointConfig& other) const {
        return n == other.n && taus == other.taus;
    }
};

enum class PenaltyKind { AIC, BIC, mBIC, MDL };
const char* to_string(PenaltyKind kind);

// Penalty P(m; tau_1..tau_m) for the mean-shift problem with the time series
// structure held constant across segments; zero when m = 0.
double penalty(PenaltyKind kind, const ChangepointConfig& config);

struct PenalizedFit {
    ChangepointConfig config;
    MeanKind mean_kind = MeanKind::Constant;
    std::vector<double> segment_means; // fitted per-segment intercepts
    double beta1 = 0.0;                // shared trend slope (LinearTrend)
    std::vector<double> phi;           // shared AR coefficients
    double sigma2 = 0.0;
    double minus2loglik = 0.0;
    double penalty = 0.0;
    double objective = 0.0; // minus2loglik + penalty
};

// Exact Gaussian -2 log-likelihood of the segment-mean model with shared
// AR(p) errors: segment means (and the shared slope) are profiled out by
// generalized least squares given the AR parameters, the AR parameters are
// optimized in an outer loop, sigma^2 is profiled in closed form.
// Returned fit carries penalty = 0 and objective = minus2loglik.
PenalizedFit gaussian_loglik(const TimeSeries& series, const ChangepointConfig& config,
                             MeanKind mean_kind, int p);

} // namespace cpkit

#endif
