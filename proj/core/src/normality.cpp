#include "cpkit/normality.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cpkit/errors.hpp"

namespace cpkit {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error("normal_quantile: p outside (0,1)");
    // Acklam's rational approximation
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // one Halley step against erfc
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

namespace {
double poly(const double* coef, int n, double x) {
    // coef[0] + coef[1] x + ... (Royston's ordering)
    double v = coef[0];
    double xi = 1.0;
    for (int i = 1; i < n; ++i) {
        xi *= x;
        v += coef[i] * xi;
    }
    return v;
}
} // namespace

NormalityResult shapiro_wilk(std::span<const double> sample) {
    const int n = int(sample.size());
    if (n < 3 || n > 5000)
        throw SampleSizeOutOfRange("Shapiro-Wilk needs 3 <= n <= 5000");
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    if (x.back() - x.front() <= 0.0)
        throw NonPositiveVariance("Shapiro-Wilk: constant sample");

    // expected normal order statistics (Blom scores)
    std::vector<double> m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        m[std::size_t(i)] = normal_quantile((i + 1 - 0.375) / (n + 0.25));
    double ssumm2 = 0.0;
    for (double v : m) ssumm2 += v * v;

    // AS R94 coefficient corrections
    static const double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    const double rsn = 1.0 / std::sqrt(double(n));
    std::vector<double> a(std::size_t(n), 0.0);
    const double norm = std::sqrt(ssumm2);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
        a[2] = -a[0];
    } else {
        const double an = poly(c1, 6, rsn) + m[std::size_t(n - 1)] / norm;
        int i1;
        double phi;
        if (n > 5) {
            const double an1 = poly(c2, 6, rsn) + m[std::size_t(n - 2)] / norm;
            i1 = 3;
            phi = (ssumm2 - 2.0 * m[std::size_t(n - 1)] * m[std::size_t(n - 1)] -
                   2.0 * m[std::size_t(n - 2)] * m[std::size_t(n - 2)]) /
                  (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
            a[std::size_t(n - 2)] = an1;
            a[1] = -an1;
        } else {
            i1 = 2;
            phi = (ssumm2 - 2.0 * m[std::size_t(n - 1)] * m[std::size_t(n - 1)]) /
                  (1.0 - 2.0 * an * an);
        }
        a[std::size_t(n - 1)] = an;
        a[0] = -an;
        const double rphi = std::sqrt(phi);
        for (int i = i1; i <= n - i1 + 1; ++i)
            a[std::size_t(i - 1)] = m[std::size_t(i - 1)] / rphi;
    }

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        num += a[std::size_t(i)] * x[std::size_t(i)];
        den += (x[std::size_t(i)] - mean) * (x[std::size_t(i)] - mean);
    }
    double W = num * num / den;
    if (W > 1.0) W = 1.0;

    // p-value via the normalizing transforms
    double p;
    if (n == 3) {
        // exact null cdf of W at n=3; small W is the rejection direction
        const double stqr = std::asin(std::sqrt(0.75));
        p = (6.0 / M_PI) * (std::asin(std::sqrt(W)) - stqr);
        return {W, std::clamp(p, 0.0, 1.0)};
    }
    static const double c3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
    static const double c4[4] = {1.3822, -0.77857, 0.062767, -2.0322e-3};
    static const double c5[4] = {-1.5861, -0.31082, -0.083751, 3.8915e-3};
    static const double c6[3] = {-0.4803, -0.082676, 3.0302e-3};
    double zmu, zsd, w;
    if (n <= 11) {
        const double gamma = -2.273 + 0.459 * n;
        w = -std::log(gamma - std::log1p(-W));
        zmu = poly(c3, 4, double(n));
        zsd = std::exp(poly(c4, 4, double(n)));
    } else {
        const double ln_n = std::log(double(n));
        w = std::log1p(-W);
        zmu = poly(c5, 4, ln_n);
        zsd = std::exp(poly(c6, 3, ln_n));
    }
    const double z = (w - zmu) / zsd;
    p = 1.0 - normal_cdf(z);
    return {W, std::clamp(p, 0.0, 1.0)};
}

} // namespace cpkit
