#ifndef CPKIT_NULL_DISTRIBUTION_HPP
#define CPKIT_NULL_DISTRIBUTION_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace cpkit {

// Limit laws of the AMOC statistics under the no-changepoint null:
//   IntegratedBridgeSquared: integral of B(t)^2 over [0,1]  (SCUSUM)
//   SupBridge:               sup |B(t)|                     (max CUSUM)
//   SupTrendAdjusted:        sup |B(t) - 6t(1-t) int B|     (CUSUM after a
//                            fitted linear trend; second-level bridge)
enum class NullKind : std::uint32_t {
    IntegratedBridgeSquared = 0,
    SupBridge = 1,
    SupTrendAdjusted = 2,
};

const char* to_string(NullKind kind);

// Sorted Monte Carlo sample of a limit law, with provenance.
class NullDistribution {
public:
    NullDistribution(NullKind kind, std::vector<double> sorted_sample,
                     std::uint64_t n_grid, std::uint64_t seed);

    NullKind kind() const { return kind_; }
    std::uint64_t size() const { return sample_.size(); }
    std::uint64_t n_grid() const { return n_grid_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<double>& sample() const { return sample_; }

    // empirical right-tail proportion with a +1 continuity correction
    double p_value(double statistic) const;
    // order statistic at the given percentile (0 < pct < 100), no interpolation
    double critical_value(double pct) const;

    void save(const std::string& path) const;
    static NullDistribution load(const std::string& path);

private:
    NullKind kind_;
    std::vector<double> sample_;
    std::uint64_t n_grid_;
    std::uint64_t seed_;
};

// M draws of the limit functional on an n_grid-point Brownian-bridge
// discretization.  Per-draw substreams are derived by counter-based
// splitting, so the result is identical for any worker count.
// threads = 0 uses the hardware concurrency.
NullDistribution simulate_null(NullKind kind, std::uint64_t n_grid, std::uint64_t m,
                               std::uint64_t seed, unsigned threads = 0);

} // namespace cpkit

#endif
