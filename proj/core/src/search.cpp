#include "cpkit/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <unordered_map>

#include "cpkit/datasets.hpp"
#include "cpkit/errors.hpp"
#include "cpkit/rng.hpp"

namespace cpkit {

namespace {

constexpr std::size_t MS = kMinSegment;

struct TausHash {
    std::size_t operator()(const std::vector<std::size_t>& v) const {
        std::size_t h = 1469598103934665603ULL;
        for (std::size_t x : v) {
            h ^= x;
            h *= 1099511628211ULL;
        }
        return h;
    }
};

// fitness evaluation with closed-form p=0 paths and a -2lnL cache
class Evaluator {
public:
    Evaluator(const TimeSeries& series, MeanKind mean_kind, int p)
        : series_(series), mean_kind_(mean_kind), p_(p), n_(series.size()) {
        if (p_ == 0) {
            const auto& y = series.values();
            cy_.assign(n_ + 1, 0.0);
            cy2_.assign(n_ + 1, 0.0);
            ct_.assign(n_ + 1, 0.0);
            ct2_.assign(n_ + 1, 0.0);
            cty_.assign(n_ + 1, 0.0);
            for (std::size_t t = 0; t < n_; ++t) {
                const double ti = double(t + 1);
                cy_[t + 1] = cy_[t] + y[t];
                cy2_[t + 1] = cy2_[t] + y[t] * y[t];
                ct_[t + 1] = ct_[t] + ti;
                ct2_[t + 1] = ct2_[t] + ti * ti;
                cty_[t + 1] = cty_[t] + ti * y[t];
            }
        }
    }

    std::size_t n() const { return n_; }

    double m2ll(const std::vector<std::size_t>& taus) {
        auto it = cache_.find(taus);
        if (it != cache_.end()) return it->second;
        const double v = compute(taus);
        cache_.emplace(taus, v);
        return v;
    }

    double objective(const std::vector<std::size_t>& taus, PenaltyKind kind) {
        ChangepointConfig c{taus, n_};
        return m2ll(taus) + penalty(kind, c);
    }

    PenalizedFit full_fit(const std::vector<std::size_t>& taus, PenaltyKind kind) {
        ChangepointConfig c{taus, n_};
        auto fit = gaussian_loglik(series_, c, mean_kind_, p_);
        fit.penalty = penalty(kind, c);
        fit.objective = fit.minus2loglik + fit.penalty;
        return fit;
    }

private:
    double compute(const std::vector<std::size_t>& taus) {
        if (p_ == 0) {
            double rss;
            if (mean_kind_ == MeanKind::Constant) {
                rss = 0.0;
                std::size_t lo = 0;
                for (std::size_t i = 0; i <= taus.size(); ++i) {
                    const std::size_t hi = (i < taus.size()) ? taus[i] - 1 : n_;
                    const double len = double(hi - lo);
                    const double s = cy_[hi] - cy_[lo];
                    rss += (cy2_[hi] - cy2_[lo]) - s * s / len;
                    lo = hi;
                }
            } else {
                // per-segment means profiled, one shared slope
                double syy = 0.0, sty = 0.0, stt = 0.0;
                std::size_t lo = 0;
                for (std::size_t i = 0; i <= taus.size(); ++i) {
                    const std::size_t hi = (i < taus.size()) ? taus[i] - 1 : n_;
                    const double len = double(hi - lo);
                    const double sy = cy_[hi] - cy_[lo];
                    const double st = ct_[hi] - ct_[lo];
                    syy += (cy2_[hi] - cy2_[lo]) - sy * sy / len;
                    sty += (cty_[hi] - cty_[lo]) - st * sy / len;
                    stt += (ct2_[hi] - ct2_[lo]) - st * st / len;
                    lo = hi;
                }
                rss = syy - (stt > 0.0 ? sty * sty / stt : 0.0);
            }
            const double s2 = rss / double(n_);
            if (!(s2 > 0.0)) throw ZeroVariance("zero residual variance");
            return double(n_) * std::log(2.0 * std::numbers::pi * s2) + double(n_);
        }
        ChangepointConfig c{taus, n_};
        return gaussian_loglik(series_, c, mean_kind_, p_).minus2loglik;
    }

    const TimeSeries& series_;
    MeanKind mean_kind_;
    int p_;
    std::size_t n_;
    std::vector<double> cy_, cy2_, ct_, ct2_, cty_;
    std::unordered_map<std::vector<std::size_t>, double, TausHash> cache_;
};

// admissible changepoint positions given the minimum segment length
std::size_t lo_pos(std::size_t) { return MS + 1; }
std::size_t hi_pos(std::size_t n) { return n + 1 - MS; }

bool can_insert(const std::vector<std::size_t>& taus, std::size_t pos, std::size_t n) {
    if (pos < lo_pos(n) || pos > hi_pos(n)) return false;
    for (std::size_t t : taus) {
        const std::size_t d = t > pos ? t - pos : pos - t;
        if (d < MS) return false;
    }
    return true;
}

void insert_sorted(std::vector<std::size_t>& taus, std::size_t pos) {
    taus.insert(std::upper_bound(taus.begin(), taus.end(), pos), pos);
}

// uniform crossover over the union: shared changepoints are inherited, the
// symmetric difference is coin-flipped; spacing violations repaired after
std::vector<std::size_t> crossover(const std::vector<std::size_t>& a,
                                   const std::vector<std::size_t>& b, std::size_t n,
                                   Rng& rng) {
    std::vector<std::size_t> uni;
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
    std::vector<std::size_t> child;
    for (std::size_t i = 0; i < uni.size();) {
        if (i + 1 < uni.size() && uni[i + 1] == uni[i]) {
            child.push_back(uni[i]); // in both parents
            i += 2;
        } else {
            if (rng.next_u64() & 1u) child.push_back(uni[i]);
            ++i;
        }
    }
    // repair: drop positions violating bounds or spacing (left to right)
    std::vector<std::size_t> repaired;
    for (std::size_t t : child) {
        if (t < lo_pos(n) || t > hi_pos(n)) continue;
        if (!repaired.empty() && t - repaired.back() < MS) continue;
        repaired.push_back(t);
    }
    return repaired;
}

void mutate(std::vector<std::size_t>& taus, std::size_t n, int jitter_range, Rng& rng) {
    const std::uint64_t op = rng.next_below(3);
    if (op == 0) { // add
        const std::size_t span = hi_pos(n) - lo_pos(n) + 1;
        for (int tries = 0; tries < 8; ++tries) {
            const std::size_t pos = lo_pos(n) + std::size_t(rng.next_below(span));
            if (can_insert(taus, pos, n)) {
                insert_sorted(taus, pos);
                return;
            }
        }
    } else if (op == 1) { // delete
        if (!taus.empty()) taus.erase(taus.begin() + long(rng.next_below(taus.size())));
    } else { // jitter by 1..jitter_range steps
        if (taus.empty()) return;
        const std::size_t i = std::size_t(rng.next_below(taus.size()));
        const long step = 1 + long(rng.next_below(std::uint64_t(jitter_range)));
        const long delta = (rng.next_u64() & 1u) ? step : -step;
        const long cand = long(taus[i]) + delta;
        if (cand < long(lo_pos(n)) || cand > long(hi_pos(n))) return;
        const std::size_t pos = std::size_t(cand);
        auto trial = taus;
        trial.erase(trial.begin() + long(i));
        if (can_insert(trial, pos, n)) {
            insert_sorted(trial, pos);
            taus = std::move(trial);
        }
    }
}

std::vector<std::size_t> random_config(std::size_t n, Rng& rng) {
    // allow anything up to the densest admissible packing at small n, so the
    // population can reach every corner of the configuration space
    const std::size_t densest = (hi_pos(n) - lo_pos(n)) / MS + 1;
    const std::size_t max_m = std::min(densest, std::max<std::size_t>(8, n / 10));
    const std::size_t target = std::size_t(rng.next_below(max_m + 1));
    std::vector<std::size_t> taus;
    const std::size_t span = hi_pos(n) - lo_pos(n) + 1;
    for (std::size_t j = 0; j < target; ++j) {
        for (int tries = 0; tries < 6; ++tries) {
            const std::size_t pos = lo_pos(n) + std::size_t(rng.next_below(span));
            if (can_insert(taus, pos, n)) {
                insert_sorted(taus, pos);
                break;
            }
        }
    }
    return taus;
}

struct Scored {
    std::vector<std::size_t> taus;
    double obj;
};

bool better(const Scored& a, const Scored& b) {
    if (a.obj != b.obj) return a.obj < b.obj;
    return a.taus < b.taus; // deterministic tie-break
}

// forward selection: repeatedly add the best single changepoint even when the
// objective temporarily worsens (up-down-up shift patterns make single adds
// unprofitable until the pair is complete); returns the best config on the path
Scored greedy_forward(Evaluator& eval, PenaltyKind kind, std::size_t n,
                      std::size_t max_steps) {
    Scored cur{{}, eval.objective({}, kind)};
    Scored best = cur;
    for (std::size_t step = 0; step < max_steps; ++step) {
        bool found = false;
        Scored next_best{{}, 0.0};
        for (std::size_t pos = lo_pos(n); pos <= hi_pos(n); ++pos) {
            if (!can_insert(cur.taus, pos, n)) continue;
            auto cand = cur.taus;
            insert_sorted(cand, pos);
            const double obj = eval.objective(cand, kind);
            if (!found || obj < next_best.obj ||
                (obj == next_best.obj && cand < next_best.taus)) {
                next_best = {std::move(cand), obj};
                found = true;
            }
        }
        if (!found) break;
        cur = std::move(next_best);
        if (better(cur, best)) best = cur;
    }
    return best;
}

// steepest-descent sweeps over the single-move neighborhood (delete one,
// jitter one by up to jitter_range, add one); deterministic
Scored local_improve(Scored s, Evaluator& eval, PenaltyKind kind, std::size_t n,
                     int jitter_range) {
    for (;;) {
        Scored best_move = s;
        auto consider = [&](std::vector<std::size_t> cand) {
            const double obj = eval.objective(cand, kind);
            Scored c{std::move(cand), obj};
            if (better(c, best_move)) best_move = std::move(c);
        };
        for (std::size_t i = 0; i < s.taus.size(); ++i) {
            auto del = s.taus;
            del.erase(del.begin() + long(i));
            consider(std::move(del));
            for (int step = -jitter_range; step <= jitter_range; ++step) {
                if (step == 0) continue;
                const long cand = long(s.taus[i]) + step;
                if (cand < long(lo_pos(n)) || cand > long(hi_pos(n))) continue;
                auto moved = s.taus;
                moved.erase(moved.begin() + long(i));
                if (!can_insert(moved, std::size_t(cand), n)) continue;
                insert_sorted(moved, std::size_t(cand));
                consider(std::move(moved));
            }
        }
        for (std::size_t pos = lo_pos(n); pos <= hi_pos(n); ++pos) {
            if (!can_insert(s.taus, pos, n)) continue;
            auto added = s.taus;
            insert_sorted(added, pos);
            consider(std::move(added));
        }
        if (!better(best_move, s)) return s;
        s = std::move(best_move);
    }
}

SearchResult ga_core(const TimeSeries& series, Evaluator& eval, PenaltyKind penalty_kind,
                     MeanKind mean_kind, int p, const GaParams& params, std::uint64_t seed) {
    const std::size_t n = series.size();
    if (n < 2 * MS) throw SeriesTooShort("ga_search: need N >= 2*min_seg");
    Rng rng(seed ^ 0x5bf0f1e2d3c4a596ULL);

    std::vector<Scored> pop(params.population);
    for (auto& ind : pop) {
        ind.taus = random_config(n, rng);
        ind.obj = eval.objective(ind.taus, penalty_kind);
    }
    // structured seeds: the null model plus dense packings, so overfit-dense
    // optima (common at small N with AR errors) are reachable from the start
    std::vector<std::vector<std::size_t>> seeds{{}};
    for (std::size_t start : {lo_pos(n), lo_pos(n) + 1}) {
        for (std::size_t stride : {MS, MS + 1}) {
            std::vector<std::size_t> dense;
            for (std::size_t pos = start; pos <= hi_pos(n); pos += stride) dense.push_back(pos);
            seeds.push_back(std::move(dense));
        }
    }
    for (std::size_t i = 0; i < seeds.size() && i < pop.size(); ++i) {
        pop[i].taus = seeds[i];
        pop[i].obj = eval.objective(pop[i].taus, penalty_kind);
    }

    std::sort(pop.begin(), pop.end(), better);
    Scored best = local_improve(pop[0], eval, penalty_kind, n, params.jitter_range);
    {
        // forward-selection seed crosses the up-down-up fitness valleys
        auto fwd = greedy_forward(eval, penalty_kind, n, std::min<std::size_t>(12, n / 4));
        fwd = local_improve(std::move(fwd), eval, penalty_kind, n, params.jitter_range);
        if (better(fwd, best)) best = fwd;
        pop.back() = std::move(fwd);
        std::sort(pop.begin(), pop.end(), better);
    }
    if (n <= 60) {
        // polish the densest packing too; steepest descent slides it into the
        // dense-optimum basin that sparse starts cannot reach
        Scored dense{seeds[1], eval.objective(seeds[1], penalty_kind)};
        dense = local_improve(std::move(dense), eval, penalty_kind, n, params.jitter_range);
        if (better(dense, best)) best = std::move(dense);
    }
    std::size_t stagnant = 0;

    for (std::size_t gen = 0; gen < params.max_generations; ++gen) {
        std::vector<Scored> next;
        next.reserve(params.population);
        next.push_back(best); // polished incumbent holds the first elite slot
        for (std::size_t e = 0; e + 1 < std::min(params.elitism, pop.size()); ++e)
            next.push_back(pop[e]);
        while (next.size() < params.population) {
            auto pick = [&]() -> const Scored& {
                const auto& c1 = pop[std::size_t(rng.next_below(pop.size()))];
                const auto& c2 = pop[std::size_t(rng.next_below(pop.size()))];
                return better(c1, c2) ? c1 : c2;
            };
            Scored child;
            if (rng.next_below(20) == 0) {
                // random immigrant keeps the search ergodic on rugged landscapes
                child.taus = random_config(n, rng);
            } else {
                const auto& pa = pick();
                const auto& pb = pick();
                child.taus = crossover(pa.taus, pb.taus, n, rng);
                mutate(child.taus, n, params.jitter_range, rng);
                if (rng.next_below(3) == 0) mutate(child.taus, n, params.jitter_range, rng);
            }
            child.obj = eval.objective(child.taus, penalty_kind);
            next.push_back(std::move(child));
        }
        pop = std::move(next);
        std::sort(pop.begin(), pop.end(), better);
        if (pop[0].obj < best.obj - 1e-12) {
            best = local_improve(pop[0], eval, penalty_kind, n, params.jitter_range);
            stagnant = 0;
        } else {
            ++stagnant;
            if (stagnant >= params.stagnation_limit) break;
        }
    }

    SearchResult out;
    out.method = "ga";
    out.fit = eval.full_fit(best.taus, penalty_kind);
    out.penalty_kind = penalty_kind;
    out.penalized = true;
    out.seed = seed;
    out.mean_kind = mean_kind;
    out.ar_order = p;
    return out;
}

} // namespace

SearchResult ga_search(const TimeSeries& series, PenaltyKind penalty_kind, MeanKind mean_kind,
                       int p, const GaParams& params, std::uint64_t seed) {
    Evaluator eval(series, mean_kind, p);
    return ga_core(series, eval, penalty_kind, mean_kind, p, params, seed);
}

SearchResult exhaustive_search(const TimeSeries& series, PenaltyKind penalty_kind,
                               MeanKind mean_kind, int p, std::size_t max_m) {
    const std::size_t n = series.size();
    const bool small_any_m = n <= 25;
    const bool bounded_m = (max_m <= 3 && n <= 200);
    if (!small_any_m && !bounded_m)
        throw ProblemTooLarge("exhaustive_search: feasible only for N<=25 or (max_m<=3, N<=200)");

    Evaluator eval(series, mean_kind, p);
    std::vector<std::size_t> current;
    Scored best{{}, eval.objective({}, penalty_kind)};

    // depth-first over admissible sorted changepoint lists
    auto recurse = [&](auto&& self, std::size_t next_min) -> void {
        if (current.size() >= max_m) return;
        for (std::size_t pos = std::max(next_min, lo_pos(n)); pos <= hi_pos(n); ++pos) {
            current.push_back(pos);
            const double obj = eval.objective(current, penalty_kind);
            if (obj < best.obj) best = {current, obj};
            self(self, pos + MS);
            current.pop_back();
        }
    };
    recurse(recurse, lo_pos(n));

    SearchResult out;
    out.method = "exhaustive";
    out.fit = eval.full_fit(best.taus, penalty_kind);
    out.penalty_kind = penalty_kind;
    out.penalized = true;
    out.mean_kind = mean_kind;
    out.ar_order = p;
    return out;
}

SearchResult binary_segmentation(const TimeSeries& series, MeanKind mean_kind, int p,
                                 double alpha, const NullTables& tables) {
    if (series.period() != 1)
        throw Error("binary_segmentation: deseasonalize first (period-1 series expected)");
    const std::size_t n = series.size();
    if (n < 2 * MS) throw SeriesTooShort("binary_segmentation: series too short");
    const std::size_t q = (mean_kind == MeanKind::LinearTrend) ? 2 : 1;
    const std::size_t min_testable = std::max(2 * MS, q + std::size_t(p) + 3);

    std::vector<std::size_t> taus;
    const auto& x = series.values();

    auto recurse = [&](auto&& self, std::size_t lo, std::size_t hi) -> void {
        const std::size_t len = hi - lo;
        if (len < min_testable) return;
        std::vector<double> seg(x.begin() + long(lo), x.begin() + long(hi));
        TimeSeries sub(std::move(seg), 1, series.start_label() + int(lo), series.label());
        AmocResult r;
        try {
            r = amoc_pipeline(sub, mean_kind, p, tables);
        } catch (const Error&) {
            return; // untestable segment (constant, too short after fit checks)
        }
        if (r.p_value > alpha) return;
        const std::size_t k = r.changepoint_index; // local, 1-based
        if (k < MS || len - k < MS) return;
        taus.push_back(lo + k + 1); // global 1-based start of the right regime
        self(self, lo, lo + k);
        self(self, lo + k, hi);
    };
    recurse(recurse, 0, n);
    std::sort(taus.begin(), taus.end());

    SearchResult out;
    out.method = "binseg";
    ChangepointConfig config{taus, n};
    out.fit = gaussian_loglik(series, config, mean_kind, p);
    out.penalized = false;
    out.mean_kind = mean_kind;
    out.ar_order = p;
    return out;
}

ConfigDistance config_distance(const ChangepointConfig& a, const ChangepointConfig& b) {
    if (a.n != b.n) throw InvalidConfig("config_distance: different N");
    const double half_n = double(a.n) / 2.0;
    const std::size_t ma = a.m(), mb = b.m();
    // optimal one-to-one matching of sorted lists; skipping costs N/2
    std::vector<std::vector<double>> dp(ma + 1, std::vector<double>(mb + 1, 0.0));
    for (std::size_t i = 1; i <= ma; ++i) dp[i][0] = double(i) * half_n;
    for (std::size_t j = 1; j <= mb; ++j) dp[0][j] = double(j) * half_n;
    for (std::size_t i = 1; i <= ma; ++i) {
        for (std::size_t j = 1; j <= mb; ++j) {
            const double match =
                dp[i - 1][j - 1] +
                std::fabs(double(a.taus[i - 1]) - double(b.taus[j - 1]));
            const double skip = std::min(dp[i - 1][j], dp[i][j - 1]) + half_n;
            dp[i][j] = std::min(match, skip);
        }
    }
    ConfigDistance d;
    d.count_term = std::fabs(double(ma) - double(mb));
    d.location_term = dp[ma][mb] / double(a.n);
    d.value = d.count_term + d.location_term;
    return d;
}

SimulationStudyResult simulation_study(std::size_t replicates, std::uint64_t seed,
                                       const NullTables& tables, double shift, double alpha) {
    if (replicates < 10) throw Error("simulation_study: need at least 10 replicates");
    SimulationStudyResult out;
    out.methods = {"binseg", "ga-bic", "ga-mbic", "ga-mdl"};
    out.distances.assign(4, {});
    out.m_hat.assign(4, {});
    out.truth = ChangepointConfig{{126, 251, 376}, 500};

    SimSpec spec;
    spec.n = 500;
    spec.segment_means = {0.0, shift, 0.0, shift};
    spec.changepoints = {126, 251, 376};
    spec.noise_sd = 1.0;

    const PenaltyKind kinds[3] = {PenaltyKind::BIC, PenaltyKind::mBIC, PenaltyKind::MDL};
    for (std::size_t rep = 0; rep < replicates; ++rep) {
        std::uint64_t sm = seed;
        spec.seed = splitmix64(sm) + rep;
        const auto [series, truth] = simulate(spec);

        const auto bs = binary_segmentation(series, MeanKind::Constant, 0, alpha, tables);
        out.distances[0].push_back(config_distance(bs.fit.config, truth).value);
        out.m_hat[0].push_back(bs.fit.config.m());

        Evaluator eval(series, MeanKind::Constant, 0); // cache shared across penalties
        for (int j = 0; j < 3; ++j) {
            std::uint64_t sj = seed ^ (0x9e3779b97f4a7c15ULL * (rep + 1));
            const auto ga = ga_core(series, eval, kinds[j], MeanKind::Constant, 0, GaParams{},
                                    splitmix64(sj) + std::uint64_t(j));
            out.distances[std::size_t(j) + 1].push_back(
                config_distance(ga.fit.config, truth).value);
            out.m_hat[std::size_t(j) + 1].push_back(ga.fit.config.m());
        }
    }
    out.mean_distance.assign(4, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        double s = 0.0;
        for (double v : out.distances[i]) s += v;
        out.mean_distance[i] = s / double(out.distances[i].size());
    }
    return out;
}

void write_search_result(std::ostream& os, const SearchResult& result,
                         const TimeSeries& series) {
    char buf[128];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    os << "# method=" << result.method
       << " penalty=" << (result.penalized ? to_string(result.penalty_kind) : "none")
       << " mean=" << (result.mean_kind == MeanKind::LinearTrend ? "trend" : "constant")
       << " ar=" << result.ar_order << " seed=" << result.seed << "\n";
    const auto& fit = result.fit;
    for (std::size_t i = 0; i < fit.config.m(); ++i) {
        const std::size_t tau = fit.config.taus[i];
        os << tau << "," << series.label_of(tau) << "," << num(fit.segment_means[i + 1]) << "\n";
    }
    os << "# objective=" << num(fit.objective) << " minus2loglik=" << num(fit.minus2loglik)
       << " penalty=" << num(fit.penalty);
    os << " phi=";
    for (std::size_t i = 0; i < fit.phi.size(); ++i)
        os << (i ? "|" : "") << num(fit.phi[i]);
    os << " sigma2=" << num(fit.sigma2);
    if (fit.mean_kind == MeanKind::LinearTrend) os << " slope=" << num(fit.beta1);
    os << " mean1=" << num(fit.segment_means.empty() ? 0.0 : fit.segment_means[0]) << "\n";
}

} // namespace cpkit
