#pragma once

#include "longmem/scaling.hpp"
#include "longmem/series.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace longmem {

/// Inclusive scale window for the log-log fit.
struct FitRange {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

/// Default upper bound of the Hurst fit window: one trading year.
inline constexpr std::size_t kDefaultFitMax = ScaleGrid::kYearScale;

struct HurstEstimate {
    std::string series_id;
    double hurst = 0.0;
    double intercept = 0.0;  // log10 F at log10 s = 0
    double r_squared = 0.0;
    double stderr_hurst = 0.0;
    FitRange fit_range;       // smallest and largest scale actually used
    std::size_t n_points = 0;
    std::size_t n_excluded_zero = 0;  // points in range with F(s) == 0
};

/// OLS fit of log10 F(s) against log10 s; the slope is the Hurst exponent.
/// Points with F(s) == 0 are skipped and counted. Throws AnalysisError when
/// fewer than three positive points remain.
HurstEstimate fit_hurst(const FluctuationFunction& f,
                        std::optional<FitRange> range = std::nullopt);

enum class Persistence { antipersistent, uncorrelated, persistent };

/// H < 0.5 antipersistent, H == 0.5 uncorrelated, H > 0.5 persistent.
/// `tolerance` widens the uncorrelated band to |H - 0.5| <= tolerance.
Persistence classify(double hurst, double tolerance = 0.0);
std::string_view to_string(Persistence p);

struct CrossoverReport {
    std::optional<std::size_t> breakpoint_scale;
    /// Intersection of the two fitted lines (in scale units), before it is
    /// snapped to the grid. Meaningful only when both slopes differ.
    double breakpoint_estimate = 0.0;
    double slope_left = 0.0;
    double slope_right = 0.0;
    double sse_single = 0.0;
    double sse_piecewise = 0.0;
    double improvement_ratio = 0.0;  // 1 - sse_piecewise / sse_single
};

struct CrossoverOptions {
    std::size_t min_side_points = 3;
    double min_improvement = 0.5;
};

/// Best two-segment log-log fit over every split of the positive points that
/// leaves at least `min_side_points` on each side. The breakpoint is where
/// the two lines meet, clipped to the gap between the sides and snapped to
/// the nearer grid scale; it is reported only when the SSE improvement ratio
/// reaches `min_improvement`.
CrossoverReport detect_crossover(const FluctuationFunction& f, const CrossoverOptions& options = {});

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t count = 0;
};

struct HurstHistogram {
    double bin_width = 0.02;
    std::vector<HistogramBin> bins;
    double min = 0.0;
    double max = 0.0;
    std::size_t mode_bin = 0;  // index into bins; ties go to the lower bin
};

/// Bins aligned to multiples of `bin_width`, covering [min, max].
HurstHistogram histogram(const std::vector<double>& values, double bin_width = 0.02);

struct SeriesFailure {
    std::string series_id;
    std::string message;
};

struct HurstDistribution {
    std::vector<HurstEstimate> estimates;  // ordered by series id
    std::vector<SeriesFailure> failures;   // ordered by series id
    std::optional<HurstHistogram> histogram;
    std::vector<FluctuationFunction> fluctuations;  // ordered by series id
};

struct HurstOptions {
    std::optional<FitRange> fit_range = FitRange{0, kDefaultFitMax};
    double bin_width = 0.02;
};

/// One Hurst estimate per aligned panel member (profile of absolute
/// increments). Per-series failures are collected, not thrown.
HurstDistribution hurst_distribution(const RatePanel& panel, const DetrendMethod& method,
                                     const ScaleGrid& grid, const HurstOptions& options = {});

}  // namespace longmem
