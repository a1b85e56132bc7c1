#include "cpkit/ar_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cpkit/errors.hpp"
#include "detail/optim.hpp"

namespace cpkit {

std::vector<double> pacf_to_ar(std::span<const double> pacf) {
    std::vector<double> phi;
    for (double k : pacf) {
        std::vector<double> next(phi.size() + 1);
        next.back() = k;
        for (std::size_t j = 0; j < phi.size(); ++j)
            next[j] = phi[j] - k * phi[phi.size() - 1 - j];
        phi = std::move(next);
    }
    return phi;
}

std::vector<double> ar_to_pacf(std::span<const double> phi) {
    std::vector<double> work(phi.begin(), phi.end());
    std::vector<double> pacf(phi.size());
    for (std::size_t k = phi.size(); k > 0; --k) {
        const double kap = work[k - 1];
        pacf[k - 1] = kap;
        if (std::fabs(kap) >= 1.0)
            throw NonStationaryFit("AR polynomial has a root on or inside the unit circle");
        std::vector<double> prev(k - 1);
        const double denom = 1.0 - kap * kap;
        for (std::size_t j = 0; j + 1 < k; ++j)
            prev[j] = (work[j] + kap * work[k - 2 - j]) / denom;
        work = std::move(prev);
    }
    return pacf;
}

bool is_causal(std::span<const double> phi) {
    try {
        ar_to_pacf(phi);
        return true;
    } catch (const NonStationaryFit&) {
        return false;
    }
}

std::vector<double> ar_autocov(std::span<const double> phi, double sigma2, int nlags) {
    const int p = int(phi.size());
    if (p == 0) {
        std::vector<double> g(std::size_t(nlags) + 1, 0.0);
        g[0] = sigma2;
        return g;
    }
    // gamma(k) - sum_j phi_j gamma(|k-j|) = sigma2 * delta_k0, k = 0..p
    const int m = p + 1;
    std::vector<double> A(std::size_t(m) * m, 0.0);
    std::vector<double> b(std::size_t(m), 0.0);
    b[0] = sigma2;
    for (int k = 0; k < m; ++k) {
        A[std::size_t(k) * m + k] += 1.0;
        for (int j = 1; j <= p; ++j)
            A[std::size_t(k) * m + std::abs(k - j)] -= phi[std::size_t(j - 1)];
    }
    // Gaussian elimination with partial pivoting
    for (int c = 0; c < m; ++c) {
        int piv = c;
        for (int r2 = c + 1; r2 < m; ++r2)
            if (std::fabs(A[std::size_t(r2) * m + c]) > std::fabs(A[std::size_t(piv) * m + c]))
                piv = r2;
        for (int cc = 0; cc < m; ++cc)
            std::swap(A[std::size_t(piv) * m + cc], A[std::size_t(c) * m + cc]);
        std::swap(b[std::size_t(piv)], b[std::size_t(c)]);
        const double d = A[std::size_t(c) * m + c];
        if (std::fabs(d) < 1e-300) throw NonStationaryFit("singular autocovariance system");
        for (int r2 = c + 1; r2 < m; ++r2) {
            const double f = A[std::size_t(r2) * m + c] / d;
            if (f == 0.0) continue;
            for (int cc = c; cc < m; ++cc)
                A[std::size_t(r2) * m + cc] -= f * A[std::size_t(c) * m + cc];
            b[std::size_t(r2)] -= f * b[std::size_t(c)];
        }
    }
    std::vector<double> g(static_cast<std::size_t>(m));
    for (int r2 = m - 1; r2 >= 0; --r2) {
        double acc = b[std::size_t(r2)];
        for (int cc = r2 + 1; cc < m; ++cc) acc -= A[std::size_t(r2) * m + cc] * g[std::size_t(cc)];
        g[std::size_t(r2)] = acc / A[std::size_t(r2) * m + r2];
    }
    g.resize(std::size_t(nlags) + 1);
    for (int h = m; h <= nlags; ++h) {
        double acc = 0.0;
        for (int j = 1; j <= p; ++j) acc += phi[std::size_t(j - 1)] * g[std::size_t(h - j)];
        g[std::size_t(h)] = acc;
    }
    return g;
}

ArPredictor ar_predictor(std::span<const double> phi) {
    ArPredictor out;
    out.phi.assign(phi.begin(), phi.end());
    const int p = int(phi.size());
    if (p == 0) {
        out.r = {};
        return out;
    }
    const auto g = ar_autocov(phi, 1.0, std::max(0, p - 1));
    out.r.assign(std::size_t(p), 0.0);
    out.r[0] = g[0];
    // Levinson-Durbin to order p-1 collecting each intermediate row
    std::vector<double> a; // current order coefficients
    double v = g[0];
    for (int k = 1; k <= p - 1; ++k) {
        double acc = g[std::size_t(k)];
        for (int j = 1; j < k; ++j) acc -= a[std::size_t(j - 1)] * g[std::size_t(k - j)];
        const double kap = acc / v;
        std::vector<double> next(static_cast<std::size_t>(k));
        next[std::size_t(k - 1)] = kap;
        for (int j = 1; j < k; ++j)
            next[std::size_t(j - 1)] = a[std::size_t(j - 1)] - kap * a[std::size_t(k - 1 - j)];
        a = std::move(next);
        v *= (1.0 - kap * kap);
        out.startup.push_back(a);
        out.r[std::size_t(k)] = v;
    }
    return out;
}

double ar_m2ll_profiled(std::span<const double> data, std::span<const double> phi,
                        double* sigma2_hat) {
    const std::size_t n = data.size();
    const int p = int(phi.size());
    const auto pred = ar_predictor(phi);
    double S = 0.0, logdet = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double e;
        double r = 1.0;
        if (int(t) == 0 && p > 0) {
            e = data[0];
            r = pred.r[0];
        } else if (int(t) < p) {
            const auto& row = pred.startup[t - 1];
            double acc = 0.0;
            for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * data[t - 1 - j];
            e = data[t] - acc;
            r = pred.r[t];
        } else {
            double acc = 0.0;
            for (int j = 1; j <= p; ++j) acc += phi[std::size_t(j - 1)] * data[t - std::size_t(j)];
            e = data[t] - acc;
        }
        S += e * e / r;
        if (r != 1.0) logdet += std::log(r);
    }
    const double s2 = S / double(n);
    if (sigma2_hat) *sigma2_hat = s2;
    if (!(s2 > 0.0)) throw ZeroVariance("zero residual variance in AR likelihood");
    return double(n) * std::log(2.0 * std::numbers::pi * s2) + logdet + double(n);
}

std::vector<std::vector<double>> mean_design(std::size_t n, int period, MeanKind kind) {
    std::vector<std::vector<double>> cols;
    cols.emplace_back(n, 1.0);
    if (kind == MeanKind::LinearTrend) {
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = double(i + 1);
        cols.push_back(std::move(t));
    } else if (kind == MeanKind::SeasonalOffsets) {
        // contrast columns: offset of season nu vs season T, sum-zero overall
        for (int nu = 1; nu < period; ++nu) {
            std::vector<double> c(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const int s = int(i % std::size_t(period)) + 1;
                if (s == nu) c[i] = 1.0;
                else if (s == period) c[i] = -1.0;
            }
            cols.push_back(std::move(c));
        }
    }
    return cols;
}

std::vector<double> ols(const std::vector<std::vector<double>>& cols,
                        std::span<const double> y) {
    const std::size_t q = cols.size();
    const std::size_t n = y.size();
    std::vector<double> G(q * q, 0.0), b(q, 0.0);
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = i; j < q; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < n; ++t) acc += cols[i][t] * cols[j][t];
            G[i * q + j] = G[j * q + i] = acc;
        }
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) acc += cols[i][t] * y[t];
        b[i] = acc;
    }
    // Cholesky solve
    std::vector<double> L(q * q, 0.0);
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = G[i * q + j];
            for (std::size_t k = 0; k < j; ++k) acc -= L[i * q + k] * L[j * q + k];
            if (i == j) {
                if (!(acc > 0.0)) throw Error("singular design in least squares");
                L[i * q + i] = std::sqrt(acc);
            } else {
                L[i * q + j] = acc / L[j * q + j];
            }
        }
    }
    std::vector<double> z(q);
    for (std::size_t i = 0; i < q; ++i) {
        double acc = b[i];
        for (std::size_t k = 0; k < i; ++k) acc -= L[i * q + k] * z[k];
        z[i] = acc / L[i * q + i];
    }
    std::vector<double> beta(q);
    for (std::size_t ii = q; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        double acc = z[i];
        for (std::size_t k = i + 1; k < q; ++k) acc -= L[k * q + i] * beta[k];
        beta[i] = acc / L[i * q + i];
    }
    return beta;
}

namespace {

MeanModel make_mean_model(MeanKind kind, int period, const std::vector<double>& beta) {
    MeanModel m;
    m.kind = kind;
    m.beta0 = beta[0];
    if (kind == MeanKind::LinearTrend) m.beta1 = beta[1];
    if (kind == MeanKind::SeasonalOffsets) {
        m.seasonal.assign(std::size_t(period), 0.0);
        double last = 0.0;
        for (int nu = 1; nu < period; ++nu) {
            m.seasonal[std::size_t(nu - 1)] = beta[std::size_t(nu)];
            last -= beta[std::size_t(nu)];
        }
        m.seasonal[std::size_t(period - 1)] = last;
    }
    return m;
}

// sample partial autocorrelations via Levinson-Durbin on biased autocovariances
std::vector<double> sample_pacf(std::span<const double> e, int p) {
    const std::size_t n = e.size();
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= double(n);
    std::vector<double> c(std::size_t(p) + 1, 0.0);
    for (int h = 0; h <= p; ++h) {
        double acc = 0.0;
        for (std::size_t t = 0; t + std::size_t(h) < n; ++t)
            acc += (e[t] - mean) * (e[t + std::size_t(h)] - mean);
        c[std::size_t(h)] = acc / double(n);
    }
    std::vector<double> pac(std::size_t(p), 0.0);
    if (!(c[0] > 0.0)) return pac;
    std::vector<double> a;
    double v = c[0];
    for (int k = 1; k <= p; ++k) {
        double acc = c[std::size_t(k)];
        for (int j = 1; j < k; ++j) acc -= a[std::size_t(j - 1)] * c[std::size_t(k - j)];
        double kap = acc / v;
        kap = std::clamp(kap, -0.95, 0.95);
        pac[std::size_t(k - 1)] = kap;
        std::vector<double> next(static_cast<std::size_t>(k));
        next[std::size_t(k - 1)] = kap;
        for (int j = 1; j < k; ++j)
            next[std::size_t(j - 1)] = a[std::size_t(j - 1)] - kap * a[std::size_t(k - 1 - j)];
        a = std::move(next);
        v *= (1.0 - kap * kap);
    }
    return pac;
}

} // namespace

ArFit fit_ar(const TimeSeries& series, MeanKind mean_kind, int p) {
    if (p < 0) throw Error("fit_ar: p must be >= 0");
    const std::size_t n = series.size();
    const auto design = mean_design(n, series.period(), mean_kind);
    const std::size_t q = design.size();
    if (n <= std::size_t(p) + q + 2)
        throw SeriesTooShort("fit_ar: need N > p + mean-parameters + 2");

    const auto beta = ols(design, series.values());
    std::vector<double> resid(series.values());
    for (std::size_t j = 0; j < q; ++j)
        for (std::size_t t = 0; t < n; ++t) resid[t] -= beta[j] * design[j][t];

    ArFit fit;
    fit.mean_model = make_mean_model(mean_kind, series.period(), beta);
    fit.order = p;
    fit.n = n;
    fit.period = series.period();

    if (p == 0) {
        double s2 = 0.0;
        for (double v : resid) s2 += v * v;
        s2 /= double(n);
        if (!(s2 > 0.0)) throw ZeroVariance("fit_ar: zero residual variance");
        fit.sigma2 = s2;
        fit.loglik = -0.5 * (double(n) * std::log(2.0 * std::numbers::pi * s2) + double(n));
        return fit;
    }

    std::vector<double> kappa;
    if (p == 1) {
        auto obj = [&](double k) {
            const double ph[1] = {k};
            return ar_m2ll_profiled(resid, std::span<const double>(ph, 1));
        };
        kappa = {detail::brent_min(obj, -0.9999, 0.9999, 1e-11)};
    } else {
        auto start = sample_pacf(resid, p);
        std::vector<double> theta(start.size());
        for (std::size_t i = 0; i < start.size(); ++i) theta[i] = std::atanh(start[i]);
        auto obj = [&](const std::vector<double>& th) {
            std::vector<double> kap(th.size());
            for (std::size_t i = 0; i < th.size(); ++i) kap[i] = std::tanh(th[i]);
            return ar_m2ll_profiled(resid, pacf_to_ar(kap));
        };
        auto best = detail::nelder_mead(obj, theta, 0.3, 1e-12, 4000);
        kappa.resize(best.size());
        for (std::size_t i = 0; i < best.size(); ++i) kappa[i] = std::tanh(best[i]);
    }
    for (double k : kappa)
        if (std::fabs(k) >= 0.9999)
            throw NonStationaryFit("fit_ar: optimizer at the causality boundary");
    fit.phi = pacf_to_ar(kappa);
    double s2 = 0.0;
    const double m2ll = ar_m2ll_profiled(resid, fit.phi, &s2);
    fit.sigma2 = s2;
    fit.loglik = -0.5 * m2ll;
    return fit;
}

TimeSeries prewhiten(const TimeSeries& series, const ArFit& fit) {
    const std::size_t n = series.size();
    if (n != fit.n || series.period() != fit.period)
        throw ModelSeriesMismatch("prewhiten: fit made on a different series shape");
    const int p = fit.order;
    std::vector<double> e(n);
    for (std::size_t t = 1; t <= n; ++t)
        e[t - 1] = series[t - 1] - fit.mean_model.mu(t, fit.period);
    const auto pred = ar_predictor(fit.phi);
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (t == 0) {
            y[0] = e[0]; // Xhat_1 = mu_1
        } else if (int(t) < p) {
            const auto& row = pred.startup[t - 1];
            double acc = 0.0;
            for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * e[t - 1 - j];
            y[t] = e[t] - acc;
        } else {
            double acc = 0.0;
            for (int j = 1; j <= p; ++j) acc += fit.phi[std::size_t(j - 1)] * e[t - std::size_t(j)];
            y[t] = e[t] - acc;
        }
    }
    return TimeSeries(std::move(y), series.period(), series.start_label(),
                      series.label().empty() ? "prewhitened" : series.label() + " (prewhitened)");
}

double long_run_variance(const ArFit& fit) {
    if (!is_causal(fit.phi)) throw NonStationaryFit("long_run_variance: non-causal fit");
    double s = 0.0;
    for (double v : fit.phi) s += v;
    const double d = 1.0 - s;
    return fit.sigma2 / (d * d);
}

int select_ar_order_bic(const TimeSeries& series, MeanKind mean_kind, int p_max) {
    int best_p = 0;
    double best = 0.0;
    const auto q = double(mean_design(series.size(), series.period(), mean_kind).size());
    for (int p = 0; p <= p_max; ++p) {
        const auto fit = fit_ar(series, mean_kind, p);
        const double bic =
            -2.0 * fit.loglik + (double(p) + q + 1.0) * std::log(double(series.size()));
        if (p == 0 || bic < best) {
            best = bic;
            best_p = p;
        }
    }
    return best_p;
}

} // namespace cpkit
