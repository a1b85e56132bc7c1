#ifndef CPKIT_NORMALITY_HPP
#define CPKIT_NORMALITY_HPP

#include <span>

namespace cpkit {

struct NormalityResult {
    double statistic; // Shapiro-Wilk W
    double p_value;   // upper-tail p via the Royston (1995) approximation
};

// Shapiro-Wilk test for normality, AS R94 / Royston (1995).
// Valid for 3 <= n <= 5000.  The test is meant for residuals: remove trend,
// seasonality and changepoints before calling.
NormalityResult shapiro_wilk(std::span<const double> sample);

// standard normal cdf and quantile (Acklam rational approximation with one
// Halley refinement; ~1e-15 absolute accuracy)
double normal_cdf(double x);
double normal_quantile(double p);

} // namespace cpkit

#endif
