#ifndef CPKIT_SEARCH_HPP
#define CPKIT_SEARCH_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cpkit/cusum.hpp"
#include "cpkit/segment_model.hpp"

namespace cpkit {

struct SearchResult {
    std::string method; // "binseg" | "ga" | "exhaustive"
    PenalizedFit fit;
    PenaltyKind penalty_kind = PenaltyKind::BIC;
    bool penalized = false; // false for binseg (no objective was minimized)
    std::uint64_t seed = 0;
    MeanKind mean_kind = MeanKind::Constant;
    int ar_order = 0;
};

// Greedy recursive AMOC splitting: tests each segment with the pre-whitened
// SCUSUM pipeline (trend-adjusted when mean_kind is LinearTrend), splits at
// the segment argmax while p-values fall below alpha, stops when no segment
// rejects or segments become too short to test.
SearchResult binary_segmentation(const TimeSeries& series, MeanKind mean_kind, int p,
                                 double alpha, const NullTables& tables);

// Global minimizer of the penalized objective by enumeration.
// Feasible for N <= 25 (any m) or N <= 200 with max_m <= 3.
SearchResult exhaustive_search(const TimeSeries& series, PenaltyKind penalty_kind,
                               MeanKind mean_kind, int p, std::size_t max_m);

struct GaParams {
    std::size_t population = 200;
    std::size_t max_generations = 500;
    std::size_t stagnation_limit = 50;
    std::size_t elitism = 2;
    int jitter_range = 3;
};

// Genetic-algorithm minimization of the penalized objective.  Configurations
// are sorted changepoint lists; crossover keeps each element of the parent
// union with probability 1/2, mutation adds/deletes/jitters one changepoint.
// Deterministic given the seed; never returns a config violating kMinSegment.
SearchResult ga_search(const TimeSeries& series, PenaltyKind penalty_kind,
                       MeanKind mean_kind, int p, const GaParams& params,
                       std::uint64_t seed);

struct ConfigDistance {
    double value = 0.0;         // count_term + location_term
    double count_term = 0.0;    // |m_a - m_b|
    double location_term = 0.0; // optimal matching cost / N, unmatched cost N/2
};

// Distance between changepoint configurations on a common N: zero iff equal,
// symmetric, grows with count mismatch and with matched-location drift.
ConfigDistance config_distance(const ChangepointConfig& a, const ChangepointConfig& b);

struct SimulationStudyResult {
    std::vector<std::string> methods;
    std::vector<std::vector<double>> distances; // [method][replicate]
    std::vector<std::vector<std::size_t>> m_hat;
    std::vector<double> mean_distance;
    ChangepointConfig truth;
};

// The three-shift benchmark: N = 500, segment means 0,1,0,1 at changepoints
// 126/251/376, IID unit-variance errors.  Runs binary segmentation and the
// GA under BIC, mBIC and MDL on each replicate and scores the distances to
// the true configuration.  shift scales the +-1 offsets.
SimulationStudyResult simulation_study(std::size_t replicates, std::uint64_t seed,
                                       const NullTables& tables, double shift = 1.0,
                                       double alpha = 0.05);

// line-oriented text serialization of a search result
void write_search_result(std::ostream& out, const SearchResult& result,
                         const TimeSeries& series);

} // namespace cpkit

#endif
