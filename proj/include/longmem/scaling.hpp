#pragma once

#include "longmem/series.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace longmem {

/// Half-open index range [begin, end) into a profile.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool operator==(const IndexRange&) const = default;
};

/// Strictly increasing window sizes, in observations.
class ScaleGrid {
public:
    static constexpr std::size_t kDefaultMinScale = 10;
    static constexpr std::size_t kYearScale = 250;
    static constexpr std::size_t kDefaultPoints = 20;

    explicit ScaleGrid(std::vector<std::size_t> scales,
                       std::size_t min_scale = kDefaultMinScale);

    /// `count` log-spaced integers from lo to hi inclusive; values that
    /// collide after rounding are dropped.
    static ScaleGrid log_spaced(std::size_t lo, std::size_t hi, std::size_t count,
                                std::size_t min_scale = kDefaultMinScale);

    /// 20 log-spaced scales from 10 to min(250, n/4) for a profile of length n.
    static ScaleGrid default_for(std::size_t profile_length);

    std::span<const std::size_t> scales() const noexcept { return scales_; }
    std::size_t size() const noexcept { return scales_.size(); }
    std::size_t front() const noexcept { return scales_.front(); }
    std::size_t back() const noexcept { return scales_.back(); }
    std::size_t min_scale() const noexcept { return min_scale_; }

    /// Throws ValidationError unless every scale is <= profile_length / 2.
    void check_fits(std::size_t profile_length) const;

private:
    std::vector<std::size_t> scales_;
    std::size_t min_scale_;
};

enum class MaAlignment { centered, backward };

/// How the local trend inside each segment is obtained: a least-squares
/// polynomial (DFA) or a moving average with window equal to the scale (DMA).
class DetrendMethod {
public:
    enum class Kind { dfa, dma };

    static DetrendMethod dfa(unsigned order = 1);
    static DetrendMethod dma(MaAlignment alignment = MaAlignment::centered);

    Kind kind() const noexcept { return kind_; }
    unsigned order() const noexcept { return order_; }
    MaAlignment alignment() const noexcept { return alignment_; }

    /// Smallest segment length the method can detrend (order + 2 for DFA).
    std::size_t min_scale() const noexcept;

    /// "dfa1", "dfa2", "dma-centered", "dma-backward".
    std::string name() const;
    static DetrendMethod parse(std::string_view name);

    bool operator==(const DetrendMethod&) const = default;

private:
    DetrendMethod(Kind kind, unsigned order, MaAlignment alignment)
        : kind_(kind), order_(order), alignment_(alignment) {}

    Kind kind_;
    unsigned order_;
    MaAlignment alignment_;
};

/// floor(n/s) segments tiled from the start followed by floor(n/s) segments
/// tiled from the end (last one first). Both passes are kept even when s
/// divides n, so there are always 2*floor(n/s) ranges.
std::vector<IndexRange> segment_bounds(std::size_t n, std::size_t s);

/// Trend values over `range` for window size `scale`.
///
/// DFA fits a polynomial to the points inside `range` only. DMA averages the
/// whole profile with a window of `scale` points (centred, or the `scale`
/// most recent points), truncated at the profile ends, and returns the part
/// that falls in `range`.
std::vector<double> local_trend(std::span<const double> profile, IndexRange range,
                                const DetrendMethod& method, std::size_t scale);

/// Detrended profile values Y - p_v for every segment at one scale, stored
/// segment after segment in `segment_bounds` order.
struct SegmentResiduals {
    std::size_t scale = 0;
    std::size_t n_segments = 0;
    std::vector<double> values;

    std::span<const double> segment(std::size_t v) const {
        return std::span<const double>(values).subspan(v * scale, scale);
    }
};

SegmentResiduals detrended_segments(std::span<const double> profile, std::size_t scale,
                                    const DetrendMethod& method);

/// Per-segment variances F^2(v) = (1/s) sum residual^2.
std::vector<double> segment_variances(const SegmentResiduals& residuals);

struct FluctuationPoint {
    std::size_t scale = 0;
    double value = 0.0;          // F(s)
    std::size_t n_segments = 0;  // 2 * floor(n/s)
};

struct FluctuationFunction {
    std::string series_id;
    DetrendMethod method = DetrendMethod::dfa(1);
    std::vector<FluctuationPoint> points;
};

/// F(s) = sqrt(mean over the 2*floor(n/s) segments of F^2(v)) at every grid
/// scale. Scales are processed in parallel; results do not depend on the
/// thread count.
FluctuationFunction fluctuation(std::span<const double> profile, const ScaleGrid& grid,
                                const DetrendMethod& method, std::string series_id = {});
FluctuationFunction fluctuation(const Profile& profile, const ScaleGrid& grid,
                                const DetrendMethod& method);

}  // namespace longmem
