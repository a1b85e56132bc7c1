#include "cpkit/segment_model.hpp"

#include <cmath>
#include <numbers>

#include "cpkit/errors.hpp"
#include "detail/optim.hpp"

namespace cpkit {

std::size_t ChangepointConfig::segment_of(std::size_t t) const {
    std::size_t i = 0;
    while (i < taus.size() && t >= taus[i]) ++i;
    return i; // 0-based segment index
}

void ChangepointConfig::validate(std::size_t min_seg) const {
    if (n < 2 * min_seg && !taus.empty())
        throw InvalidConfig("series too short for any changepoint");
    std::size_t prev = 1;
    for (std::size_t tau : taus) {
        if (tau < 2 || tau > n) throw InvalidConfig("changepoint time outside 2..N");
        if (tau <= prev) throw InvalidConfig("changepoint times must be strictly increasing");
        if (tau - prev < min_seg) throw SegmentTooShort("segment shorter than min_seg");
        prev = tau;
    }
    if (n + 1 - prev < min_seg) throw SegmentTooShort("trailing segment shorter than min_seg");
}

const char* to_string(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::AIC: return "aic";
        case PenaltyKind::BIC: return "bic";
        case PenaltyKind::mBIC: return "mbic";
        case PenaltyKind::MDL: return "mdl";
    }
    return "unknown";
}

double penalty(PenaltyKind kind, const ChangepointConfig& config) {
    const double m = double(config.m());
    const double n = double(config.n);
    if (config.m() == 0) return 0.0;
    switch (kind) {
        case PenaltyKind::AIC:
            return 2.0 * (2.0 * m + 2.0);
        case PenaltyKind::BIC:
            return (2.0 * m + 2.0) * std::log(n);
        case PenaltyKind::mBIC: {
            double s = 3.0 * m * std::log(n);
            for (std::size_t i = 1; i <= config.m() + 1; ++i)
                s += std::log(double(config.boundary(i) - config.boundary(i - 1)) / n);
            return s;
        }
        case PenaltyKind::MDL: {
            double s = 2.0 * std::log(m);
            for (std::size_t i = 1; i <= config.m() + 1; ++i)
                s += std::log(double(config.boundary(i) - config.boundary(i - 1)));
            for (std::size_t i = 2; i <= config.m(); ++i)
                s += 2.0 * std::log(double(config.taus[i - 1]));
            return s;
        }
    }
    return 0.0;
}

namespace {

// weighted least squares of the prediction-error-transformed model
struct GlsResult {
    std::vector<double> beta;
    double rss = 0.0;
};

GlsResult gls_profile(const std::vector<std::vector<double>>& cols,
                      const std::vector<double>& y, std::span<const double> phi) {
    const std::size_t n = y.size();
    const std::size_t q = cols.size();
    const int p = int(phi.size());

    // prediction-error transform rows, weights 1/r_t
    const auto pred = ar_predictor(phi);
    auto transform = [&](const std::vector<double>& v, std::vector<double>& out) {
        out.resize(n);
        for (std::size_t t = 0; t < n; ++t) {
            if (t == 0) {
                out[0] = v[0];
            } else if (int(t) < p) {
                const auto& row = pred.startup[t - 1];
                double acc = v[t];
                for (std::size_t j = 0; j < row.size(); ++j) acc -= row[j] * v[t - 1 - j];
                out[t] = acc;
            } else {
                double acc = v[t];
                for (int j = 1; j <= p; ++j) acc -= phi[std::size_t(j - 1)] * v[t - std::size_t(j)];
                out[t] = acc;
            }
        }
    };
    std::vector<std::vector<double>> xt(q);
    for (std::size_t j = 0; j < q; ++j) transform(cols[j], xt[j]);
    std::vector<double> yt;
    transform(y, yt);

    std::vector<double> w(n, 1.0);
    for (int t = 0; t < p && std::size_t(t) < n; ++t) w[std::size_t(t)] = 1.0 / pred.r[std::size_t(t)];

    // normal equations with weights
    std::vector<double> G(q * q, 0.0), b(q, 0.0);
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = i; j < q; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < n; ++t) acc += w[t] * xt[i][t] * xt[j][t];
            G[i * q + j] = G[j * q + i] = acc;
        }
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) acc += w[t] * xt[i][t] * yt[t];
        b[i] = acc;
    }
    // Cholesky solve
    std::vector<double> L(q * q, 0.0);
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = G[i * q + j];
            for (std::size_t k = 0; k < j; ++k) acc -= L[i * q + k] * L[j * q + k];
            if (i == j) {
                if (!(acc > 1e-12)) throw SegmentTooShort("singular segment design");
                L[i * q + i] = std::sqrt(acc);
            } else {
                L[i * q + j] = acc / L[j * q + j];
            }
        }
    }
    std::vector<double> z(q), beta(q);
    for (std::size_t i = 0; i < q; ++i) {
        double acc = b[i];
        for (std::size_t k = 0; k < i; ++k) acc -= L[i * q + k] * z[k];
        z[i] = acc / L[i * q + i];
    }
    for (std::size_t ii = q; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        double acc = z[i];
        for (std::size_t k = i + 1; k < q; ++k) acc -= L[k * q + i] * beta[k];
        beta[i] = acc / L[i * q + i];
    }
    double rss = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double e = yt[t];
        for (std::size_t j = 0; j < q; ++j) e -= beta[j] * xt[j][t];
        rss += w[t] * e * e;
    }
    return {std::move(beta), rss};
}

double logdet_term(std::span<const double> phi) {
    if (phi.empty()) return 0.0;
    const auto pred = ar_predictor(phi);
    double s = 0.0;
    for (double r : pred.r) s += std::log(r);
    return s;
}

} // namespace

PenalizedFit gaussian_loglik(const TimeSeries& series, const ChangepointConfig& config,
                             MeanKind mean_kind, int p) {
    if (mean_kind == MeanKind::SeasonalOffsets)
        throw Error("gaussian_loglik: deseasonalize first; seasonal means are not segment models");
    if (config.n != series.size()) throw InvalidConfig("config built for a different N");
    config.validate();
    const std::size_t n = series.size();
    const std::size_t nseg = config.segments();
    const std::size_t q = nseg + (mean_kind == MeanKind::LinearTrend ? 1 : 0);
    if (n <= q + std::size_t(p) + 1)
        throw SegmentTooShort("too many parameters for series length");

    // design: one indicator per segment, plus the shared slope column
    std::vector<std::vector<double>> cols(q, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < nseg; ++i) {
        const std::size_t lo = config.boundary(i), hi = config.boundary(i + 1);
        for (std::size_t t = lo; t < hi; ++t) cols[i][t - 1] = 1.0;
    }
    if (mean_kind == MeanKind::LinearTrend)
        for (std::size_t t = 0; t < n; ++t) cols[q - 1][t] = double(t + 1);

    const auto& y = series.values();

    auto m2ll_for = [&](std::span<const double> phi, GlsResult* out) {
        const auto gls = gls_profile(cols, y, phi);
        const double s2 = gls.rss / double(n);
        if (!(s2 > 0.0)) throw ZeroVariance("gaussian_loglik: zero residual variance");
        const double m2 =
            double(n) * std::log(2.0 * std::numbers::pi * s2) + logdet_term(phi) + double(n);
        if (out) *out = gls;
        return m2;
    };

    PenalizedFit fit;
    fit.config = config;
    fit.mean_kind = mean_kind;

    std::vector<double> phi;
    if (p == 1) {
        auto obj = [&](double k) {
            const double ph[1] = {k};
            return m2ll_for(std::span<const double>(ph, 1), nullptr);
        };
        const double k = detail::brent_min(obj, -0.999, 0.999, 1e-7);
        phi = {k};
    } else if (p >= 2) {
        std::vector<double> theta(std::size_t(p), 0.0);
        auto obj = [&](const std::vector<double>& th) {
            std::vector<double> kap(th.size());
            for (std::size_t i = 0; i < th.size(); ++i) kap[i] = std::tanh(th[i]);
            return m2ll_for(pacf_to_ar(kap), nullptr);
        };
        auto best = detail::nelder_mead(obj, theta, 0.3, 1e-10, 2000);
        std::vector<double> kap(best.size());
        for (std::size_t i = 0; i < best.size(); ++i) kap[i] = std::tanh(best[i]);
        phi = pacf_to_ar(kap);
    }

    GlsResult gls;
    fit.minus2loglik = m2ll_for(phi, &gls);
    fit.phi = phi;
    fit.sigma2 = gls.rss / double(n);
    fit.segment_means.assign(gls.beta.begin(), gls.beta.begin() + long(nseg));
    if (mean_kind == MeanKind::LinearTrend) fit.beta1 = gls.beta[q - 1];
    fit.penalty = 0.0;
    fit.objective = fit.minus2loglik;
    return fit;
}

} // namespace cpkit
