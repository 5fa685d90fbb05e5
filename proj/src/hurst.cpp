#include "longmem/hurst.hpp"

#include "longmem/error.hpp"
#include "longmem/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace longmem {

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double sse = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
};

// Ordinary least squares on x[lo, hi), y[lo, hi).
LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    LineFit fit;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        fit.sxx += dx * dx;
        fit.syy += dy * dy;
        sxy += dx * dy;
    }
    if (fit.sxx <= 0.0) throw AnalysisError("zero variance in log scale; cannot fit a slope");
    fit.slope = sxy / fit.sxx;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        fit.sse += r * r;
    }
    return fit;
}

struct LogPoints {
    std::vector<std::size_t> scales;
    std::vector<double> x;
    std::vector<double> y;
    std::size_t zeros = 0;
};

LogPoints positive_log_points(const FluctuationFunction& f, std::optional<FitRange> range) {
    LogPoints pts;
    for (const auto& p : f.points) {
        if (range && (p.scale < range->lo || p.scale > range->hi)) continue;
        if (p.value <= 0.0) {
            ++pts.zeros;
            continue;
        }
        pts.scales.push_back(p.scale);
        pts.x.push_back(std::log10(static_cast<double>(p.scale)));
        pts.y.push_back(std::log10(p.value));
    }
    return pts;
}

}  // namespace

HurstEstimate fit_hurst(const FluctuationFunction& f, std::optional<FitRange> range) {
    const auto pts = positive_log_points(f, range);
    if (pts.x.size() < 3)
        throw AnalysisError("series " + f.series_id + ": " + std::to_string(pts.x.size()) +
                            " positive fluctuation points in the fit range (" +
                            std::to_string(pts.zeros) + " zero); at least 3 required");
    const auto line = fit_line(pts.x, pts.y);
    const auto n = pts.x.size();

    HurstEstimate est;
    est.series_id = f.series_id;
    est.hurst = line.slope;
    est.intercept = line.intercept;
    est.r_squared = line.syy > 0.0 ? std::clamp(1.0 - line.sse / line.syy, 0.0, 1.0) : 1.0;
    est.stderr_hurst = std::sqrt(line.sse / static_cast<double>(n - 2) / line.sxx);
    est.fit_range = {pts.scales.front(), pts.scales.back()};
    est.n_points = n;
    est.n_excluded_zero = pts.zeros;
    return est;
}

Persistence classify(double hurst, double tolerance) {
    if (std::abs(hurst - 0.5) <= tolerance) return Persistence::uncorrelated;
    return hurst < 0.5 ? Persistence::antipersistent : Persistence::persistent;
}

std::string_view to_string(Persistence p) {
    switch (p) {
        case Persistence::antipersistent: return "antipersistent";
        case Persistence::uncorrelated: return "uncorrelated";
        case Persistence::persistent: return "persistent";
    }
    return "unknown";
}

CrossoverReport detect_crossover(const FluctuationFunction& f, const CrossoverOptions& options) {
    if (options.min_side_points < 2) throw ValidationError("min_side_points must be at least 2");
    const auto pts = positive_log_points(f, std::nullopt);
    const std::size_t n = pts.x.size();
    const std::size_t m = options.min_side_points;
    if (n < 2 * m + 1)
        throw AnalysisError("series " + f.series_id + ": " + std::to_string(n) +
                            " positive points; crossover search needs at least " +
                            std::to_string(2 * m + 1));

    const std::span<const double> xs(pts.x);
    const std::span<const double> ys(pts.y);
    const auto single = fit_line(xs, ys);

    CrossoverReport report;
    report.sse_single = single.sse;
    report.sse_piecewise = std::numeric_limits<double>::infinity();
    std::size_t best_split = m;
    LineFit best_left, best_right;
    for (std::size_t k = m; k + m <= n; ++k) {
        const auto left = fit_line(xs.first(k), ys.first(k));
        const auto right = fit_line(xs.subspan(k), ys.subspan(k));
        const double sse = left.sse + right.sse;
        if (sse < report.sse_piecewise) {
            report.sse_piecewise = sse;
            best_split = k;
            best_left = left;
            best_right = right;
        }
    }
    report.sse_piecewise = std::min(report.sse_piecewise, report.sse_single);
    report.slope_left = best_left.slope;
    report.slope_right = best_right.slope;

    // Below this the single fit is exact up to rounding and there is nothing
    // to improve on.
    double y_scale = 1.0;
    for (const double y : pts.y) y_scale = std::max(y_scale, y * y);
    const double sse_floor = 1e-24 * static_cast<double>(n) * y_scale;
    report.improvement_ratio =
        report.sse_single > sse_floor ? 1.0 - report.sse_piecewise / report.sse_single : 0.0;

    const double x_lo = xs[best_split - 1];
    const double x_hi = xs[best_split];
    double x_cross = 0.5 * (x_lo + x_hi);
    if (best_left.slope != best_right.slope) {
        const double xi = (best_right.intercept - best_left.intercept) / (best_left.slope - best_right.slope);
        if (std::isfinite(xi)) x_cross = std::clamp(xi, x_lo, x_hi);
    }
    report.breakpoint_estimate = std::pow(10.0, x_cross);
    if (report.improvement_ratio >= options.min_improvement) {
        report.breakpoint_scale =
            (x_cross - x_lo <= x_hi - x_cross) ? pts.scales[best_split - 1] : pts.scales[best_split];
    }
    return report;
}

HurstHistogram histogram(const std::vector<double>& values, double bin_width) {
    if (!(bin_width > 0.0)) throw ValidationError("histogram bin width must be positive");
    if (values.empty()) throw ValidationError("histogram of an empty sample");
    HurstHistogram h;
    h.bin_width = bin_width;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    h.min = *lo_it;
    h.max = *hi_it;

    // A relative nudge keeps values that sit on a bin edge (0.74 / 0.02) in
    // the upper bin despite rounding in the division.
    auto bin_of = [&](double v) {
        return static_cast<long long>(std::floor(v / bin_width * (1.0 + 1e-12) + 1e-12));
    };
    const long long first = bin_of(h.min);
    const long long last = bin_of(h.max);
    h.bins.resize(static_cast<std::size_t>(last - first + 1));
    for (std::size_t b = 0; b < h.bins.size(); ++b) {
        const auto idx = static_cast<double>(first + static_cast<long long>(b));
        h.bins[b].low = idx * bin_width;
        h.bins[b].high = (idx + 1.0) * bin_width;
    }
    for (const double v : values) ++h.bins[static_cast<std::size_t>(bin_of(v) - first)].count;
    for (std::size_t b = 1; b < h.bins.size(); ++b) {
        if (h.bins[b].count > h.bins[h.mode_bin].count) h.mode_bin = b;
    }
    return h;
}

HurstDistribution hurst_distribution(const RatePanel& panel, const DetrendMethod& method,
                                     const ScaleGrid& grid, const HurstOptions& options) {
    if (panel.empty()) throw ValidationError("Hurst distribution of an empty panel");
    if (!panel.is_aligned()) throw ValidationError("Hurst distribution needs an aligned panel");
    grid.check_fits(panel.date_index().size() - 1);

    std::vector<const TimeSeries*> members;
    for (const auto& s : panel.series()) members.push_back(&s);
    std::sort(members.begin(), members.end(),
              [](const TimeSeries* a, const TimeSeries* b) { return a->id() < b->id(); });

    struct Slot {
        std::optional<HurstEstimate> estimate;
        std::optional<FluctuationFunction> fluct;
        std::string error;
    };
    std::vector<Slot> slots(members.size());
    parallel_for(members.size(), [&](std::size_t i) {
        try {
            slots[i].fluct = fluctuation(series_profile(*members[i]), grid, method);
            slots[i].estimate = fit_hurst(*slots[i].fluct, options.fit_range);
        } catch (const std::exception& e) {
            slots[i].error = e.what();
        }
    });

    HurstDistribution out;
    std::vector<double> hs;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (slots[i].fluct) out.fluctuations.push_back(std::move(*slots[i].fluct));
        if (slots[i].estimate) {
            hs.push_back(slots[i].estimate->hurst);
            out.estimates.push_back(std::move(*slots[i].estimate));
        } else {
            out.failures.push_back({members[i]->id(), slots[i].error});
        }
    }
    if (!hs.empty()) out.histogram = histogram(hs, options.bin_width);
    return out;
}

}  // namespace longmem
