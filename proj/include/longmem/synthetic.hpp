#pragma once

#include "longmem/series.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace longmem {

/// Fractional Gaussian noise request. `n` is the number of noise samples;
/// the embedding size is rounded up to a power of two internally.
struct FgnSpec {
    std::size_t n = 8192;
    double hurst = 0.5;
    std::uint64_t seed = 1;
    double sigma = 1.0;
};

enum class FgnMethod {
    circulant,  // Davies-Harte circulant embedding, O(n log n)
    hosking,    // Durbin-Levinson recursion, O(n^2)
};

/// gamma(k) = sigma^2/2 (|k+1|^2H - 2|k|^2H + |k-1|^2H) for k = 0..max_lag.
std::vector<double> fgn_autocovariance(double hurst, double sigma, std::size_t max_lag);

/// Exact fGn samples. The circulant method falls back to the recursive one
/// if an embedding eigenvalue is negative beyond rounding. Throws
/// ValidationError unless 0 < H < 1, n >= 16 and sigma > 0.
std::vector<double> fgn_values(const FgnSpec& spec, FgnMethod method = FgnMethod::circulant);

/// First trading day of the synthetic calendar (2007-01-04).
Date synthetic_start_date();

/// `count` consecutive Monday-to-Friday dates starting at `start` (rolled
/// forward to a weekday).
std::vector<Date> business_days(Date start, std::size_t count);

/// The fGn samples themselves as a dated series.
TimeSeries generate_fgn(const FgnSpec& spec, std::string id = "fgn");

/// Shape of the synthetic rate paths.
struct RatePathSpec {
    double start_level = 3.0;
    double step = 0.01;
};

/// Level series whose absolute increments are step * (offset + noise[i]),
/// with random signs. The offset (at least 6 sigma, and enough to keep every
/// increment positive) makes the absolute-increment profile equal to
/// step * profile(noise) exactly, up to rounding. Length noise.size() + 1.
TimeSeries rate_path(std::string id, std::span<const double> noise, double sigma,
                     std::uint64_t sign_seed, const RatePathSpec& shape = {});

/// `count` independent rate paths driven by fGn with `spec.hurst` and `spec.n`.
/// Member i uses a seed derived from (spec.seed, i). Ids are prefix + index.
RatePanel generate_fgn_panel(std::size_t count, const FgnSpec& spec,
                             const std::string& prefix = "fgn");

/// Block-correlated ensemble: every member of block b is driven by
/// w * factor_b + (1 - w) * own noise, all fGn with the same H.
struct BlockSpec {
    std::size_t n_blocks = 3;
    std::size_t block_size = 5;
    double common_weight = 0.9;
    double hurst = 0.8;
    std::size_t n = 8192;
    std::uint64_t seed = 1;
};

void validate(const BlockSpec& spec);

/// "b<block>:m<member>", 1-based, zero-padded to the widest index.
std::string block_member_id(const BlockSpec& spec, std::size_t block, std::size_t member);

/// Ground-truth grouping of member ids, one vector per block.
std::vector<std::vector<std::string>> block_membership(const BlockSpec& spec);

/// Members of one block share a sign sequence, so common_weight == 1 yields
/// identical series within a block.
RatePanel generate_blocks(const BlockSpec& spec);

/// Deterministic child seed for stream `stream` of `seed` (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace longmem
