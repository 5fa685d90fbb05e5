#pragma once

#include "longmem/hurst.hpp"
#include "longmem/scaling.hpp"
#include "longmem/series.hpp"
#include "longmem/synthetic.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace support {

inline std::vector<double> noise(double hurst, std::size_t n, std::uint64_t seed) {
    return longmem::fgn_values({n, hurst, seed, 1.0});
}

inline longmem::Profile fgn_profile(double hurst, std::size_t n, std::uint64_t seed) {
    const auto x = noise(hurst, n, seed);
    return longmem::Profile::from_fluctuations("fgn", x);
}

inline std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> y(n);
    double run = 0.0;
    for (auto& v : y) v = (run += normal(rng));
    return y;
}

inline double mean(const std::vector<double>& v) {
    double acc = 0.0;
    for (const double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

inline double stddev(const std::vector<double>& v) {
    const double m = mean(v);
    double acc = 0.0;
    for (const double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Hurst estimate of an fGn realisation through the default grid and fit range.
inline double estimate_h(double hurst, std::size_t n, std::uint64_t seed, const longmem::DetrendMethod& m) {
    const auto p = fgn_profile(hurst, n, seed);
    const auto grid = longmem::ScaleGrid::default_for(p.size());
    return longmem::fit_hurst(longmem::fluctuation(p, grid, m)).hurst;
}

}  // namespace support
