#ifndef CPKIT_AR_MODEL_HPP
#define CPKIT_AR_MODEL_HPP

#include <span>
#include <vector>

#include "cpkit/time_series.hpp"

namespace cpkit {

enum class MeanKind { Constant, LinearTrend, SeasonalOffsets };

// Mean structure mu_t.  SeasonalOffsets carry sum-to-zero offsets s_nu.
struct MeanModel {
    MeanKind kind = MeanKind::Constant;
    double beta0 = 0.0; // location, data units
    double beta1 = 0.0; // slope per time step (LinearTrend only)
    std::vector<double> seasonal; // length T, sums to 0 (SeasonalOffsets only)

    double mu(std::size_t t, int period) const {
        double v = beta0;
        if (kind == MeanKind::LinearTrend) v += beta1 * double(t);
        if (kind == MeanKind::SeasonalOffsets)
            v += seasonal[(t - 1) % std::size_t(period)];
        return v;
    }
};

// Fitted AR(p) error model on top of a fitted mean structure.
struct ArFit {
    int order = 0;
    std::vector<double> phi;  // phi_1..phi_p, causal
    double sigma2 = 0.0;      // innovation variance (ML)
    MeanModel mean_model;
    double loglik = 0.0;      // exact Gaussian log-likelihood of the residuals
    std::size_t n = 0;        // length of the series the fit was made on
    int period = 1;
};

// ----- AR utility layer (shared with the multiple-changepoint module) -----

// partial autocorrelations in (-1,1)^p  ->  causal AR coefficients
std::vector<double> pacf_to_ar(std::span<const double> pacf);
// inverse map; throws NonStationaryFit when phi is not causal
std::vector<double> ar_to_pacf(std::span<const double> phi);
bool is_causal(std::span<const double> phi);

// autocovariances gamma(0..nlags) of a causal AR(p) with innovation variance sigma2
std::vector<double> ar_autocov(std::span<const double> phi, double sigma2, int nlags);

// Finite-past one-step prediction structure of a causal AR(p) scaled to unit
// innovation variance: startup coefficient rows (order t-1 predictor of e_t
// for t = 2..p) and scaled MSEs r_{t-1} (r_0 = gamma(0)/sigma2, r_t -> 1).
struct ArPredictor {
    std::vector<std::vector<double>> startup; // startup[t-2] = coeffs for e_t, t=2..p
    std::vector<double> r;                    // r[0..p-1]; r = 1 from index p on
    std::vector<double> phi;
};
ArPredictor ar_predictor(std::span<const double> phi);

// exact -2 log-likelihood of zero-mean data under AR(phi) with sigma2 profiled out;
// sigma2_hat is written when non-null
double ar_m2ll_profiled(std::span<const double> data, std::span<const double> phi,
                        double* sigma2_hat = nullptr);

// ----- operations -----

// Two-stage fit under the no-changepoint null: OLS for the mean structure,
// then exact Gaussian MLE for the AR(p) error model on the residuals
// (partial-autocorrelation parameterization keeps the fit causal).
ArFit fit_ar(const TimeSeries& series, MeanKind mean_kind, int p);

// One-step-ahead prediction errors Y_t = X_t - Xhat_t with
// Xhat_t = mu_t + sum_j phi_j (X_{t-j} - mu_{t-j}) for t > p and
// finite-past best linear predictors for t <= p (Xhat_1 = mu_1).
TimeSeries prewhiten(const TimeSeries& series, const ArFit& fit);

// tau^2 = sigma2 / (1 - sum_j phi_j)^2
double long_run_variance(const ArFit& fit);

// convenience: pick p in {0..p_max} by BIC
int select_ar_order_bic(const TimeSeries& series, MeanKind mean_kind, int p_max = 5);

// mean-structure design matrix (column-major columns), shared with mcpt
std::vector<std::vector<double>> mean_design(std::size_t n, int period, MeanKind kind);
// OLS coefficients for given design (normal equations, Cholesky)
std::vector<double> ols(const std::vector<std::vector<double>>& cols,
                        std::span<const double> y);

} // namespace cpkit

#endif
