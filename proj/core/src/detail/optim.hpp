#ifndef CPKIT_DETAIL_OPTIM_HPP
#define CPKIT_DETAIL_OPTIM_HPP

#include <cmath>
#include <functional>
#include <vector>

namespace cpkit::detail {

// Brent minimization on [a,b]
template <class F>
double brent_min(F f, double a, double b, double tol = 1e-10, int maxit = 200) {
    const double gold = 0.3819660112501051;
    double x = a + gold * (b - a), w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int it = 0; it < maxit; ++it) {
        const double m = 0.5 * (a + b);
        const double tol1 = tol * std::fabs(x) + 1e-12;
        const double tol2 = 2.0 * tol1;
        if (std::fabs(x - m) <= tol2 - 0.5 * (b - a)) break;
        bool golden = true;
        if (std::fabs(e) > tol1) {
            // parabolic fit through x, v, w
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::fabs(q);
            if (std::fabs(p) < std::fabs(0.5 * q * e) && p > q * (a - x) && p < q * (b - x)) {
                e = d;
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol1 : -tol1;
                golden = false;
            }
        }
        if (golden) {
            e = (x < m) ? b - x : a - x;
            d = gold * e;
        }
        const double u = (std::fabs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
        const double fu = f(u);
        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return x;
}

// Nelder-Mead with deterministic initialization
inline std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x0, double step = 0.5,
                                       double ftol = 1e-11, int maxit = 2000) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);

    auto order = [&] {
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = i + 1; j <= n; ++j)
                if (fv[j] < fv[i]) { std::swap(fv[i], fv[j]); std::swap(pts[i], pts[j]); }
    };
    for (int it = 0; it < maxit; ++it) {
        order();
        if (std::fabs(fv[n] - fv[0]) <= ftol * (std::fabs(fv[0]) + ftol)) break;
        std::vector<double> cen(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) cen[j] += pts[i][j] / double(n);
        auto mix = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) p[j] = cen[j] + t * (pts[n][j] - cen[j]);
            return p;
        };
        auto xr = mix(-1.0);
        const double fr = f(xr);
        if (fr < fv[0]) {
            auto xe = mix(-2.0);
            const double fe = f(xe);
            if (fe < fr) { pts[n] = xe; fv[n] = fe; }
            else { pts[n] = xr; fv[n] = fr; }
        } else if (fr < fv[n - 1]) {
            pts[n] = xr; fv[n] = fr;
        } else {
            auto xc = mix(fr < fv[n] ? -0.5 : 0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, fv[n])) { pts[n] = xc; fv[n] = fc; }
            else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j)
                        pts[i][j] = pts[0][j] + 0.5 * (pts[i][j] - pts[0][j]);
                    fv[i] = f(pts[i]);
                }
            }
        }
    }
    order();
    return pts[0];
}

} // namespace cpkit::detail

#endif
