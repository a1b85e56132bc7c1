#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "cpkit/errors.hpp"
#include "cpkit/normality.hpp"
#include "cpkit/rng.hpp"

using namespace cpkit;

namespace {

// the LCG used to freeze the reference values (shared with the test vectors)
std::vector<double> lcg_unit(int n, std::uint64_t seed) {
    std::vector<double> out(static_cast<std::size_t>(n));
    std::uint64_t s = seed;
    for (auto& v : out) {
        s = 6364136223846793005ULL * s + 1442695040888963407ULL;
        v = double(s >> 11) / 9007199254740992.0; // 2^53
    }
    return out;
}

std::vector<double> lcg_gauss(int n, std::uint64_t seed) {
    auto u = lcg_unit(n, seed);
    for (auto& v : u) v = normal_quantile(v * 0.999998 + 1e-6);
    return u;
}

std::vector<double> lcg_expo(int n, std::uint64_t seed) {
    auto u = lcg_unit(n, seed);
    for (auto& v : u) v = -std::log(1.0 - (v * 0.999998 + 1e-6));
    return u;
}

} // namespace

TEST_CASE("normal cdf/quantile are mutual inverses") {
    for (double p : {1e-8, 1e-4, 0.01, 0.3, 0.5, 0.7, 0.975, 0.9999, 1.0 - 1e-9}) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK_THROWS_AS(normal_quantile(0.0), Error);
}

TEST_CASE("Shapiro-Wilk matches reference values") {
    struct Ref {
        int n;
        std::uint64_t seed;
        bool expo;
        double w, p;
    };
    // frozen against an independent AS R94 implementation
    const Ref refs[] = {
        {10, 12345, false, 0.920175, 0.358415},
        {25, 12345, false, 0.970525, 0.658410},
        {50, 12345, false, 0.985349, 0.786524},
        {200, 12345, false, 0.996782, 0.954335},
        {1000, 12345, false, 0.998325, 0.445820},
        {20, 999, true, 0.840964, 0.003775},
        {100, 999, true, 0.824543, 0.000000},
        {500, 999, true, 0.859953, 0.000000},
    };
    for (const auto& r : refs) {
        const auto x = r.expo ? lcg_expo(r.n, r.seed) : lcg_gauss(r.n, r.seed);
        const auto res = shapiro_wilk(x);
        CHECK(res.statistic == doctest::Approx(r.w).epsilon(5e-5));
        CHECK(res.p_value == doctest::Approx(r.p).scale(1.0).epsilon(5e-4));
    }
    const std::vector<double> fixed = {2.1, -0.3, 0.5, 1.7, -1.2, 0.4,
                                       0.9, -0.6, 1.1, 0.2, -0.8, 1.5};
    const auto res = shapiro_wilk(fixed);
    CHECK(res.statistic == doctest::Approx(0.972702).epsilon(1e-4));
    CHECK(res.p_value == doctest::Approx(0.936944).epsilon(2e-3));
}

TEST_CASE("Shapiro-Wilk size and power") {
    Rng rng(2024);
    int rejections = 0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> x(500);
        for (auto& v : x) v = rng.next_normal();
        if (shapiro_wilk(x).p_value < 0.05) ++rejections;
    }
    // 5% nominal size; binomial 99.9% band around 20/400
    CHECK(rejections >= 6);
    CHECK(rejections <= 40);

    int power_rejections = 0;
    for (int r = 0; r < 200; ++r) {
        std::vector<double> x(500);
        for (auto& v : x) v = -std::log(1.0 - rng.next_unit());
        if (shapiro_wilk(x).p_value < 0.01) ++power_rejections;
    }
    CHECK(power_rejections >= 198); // exponential is decisively non-normal at n=500
}

TEST_CASE("Shapiro-Wilk input validation") {
    CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{1.0, 2.0}), SampleSizeOutOfRange);
    CHECK_THROWS_AS(shapiro_wilk(std::vector<double>(5001, 0.5)), SampleSizeOutOfRange);
    CHECK_THROWS_AS(shapiro_wilk(std::vector<double>(10, 3.3)), NonPositiveVariance);
    // n = 3 exact formula path
    const auto r3 = shapiro_wilk(std::vector<double>{1.0, 2.0, 4.0});
    CHECK(r3.statistic > 0.75);
    CHECK(r3.p_value >= 0.0);
    CHECK(r3.p_value <= 1.0);
}
