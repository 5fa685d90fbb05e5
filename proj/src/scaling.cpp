#include "longmem/scaling.hpp"

#include "longmem/error.hpp"
#include "longmem/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>

namespace longmem {

// ---------------------------------------------------------------------------
// ScaleGrid

ScaleGrid::ScaleGrid(std::vector<std::size_t> scales, std::size_t min_scale)
    : scales_(std::move(scales)), min_scale_(min_scale) {
    if (scales_.empty()) throw ValidationError("scale grid is empty");
    if (min_scale_ < 2) throw ValidationError("minimum scale must be at least 2");
    for (std::size_t i = 0; i < scales_.size(); ++i) {
        if (scales_[i] < min_scale_)
            throw ValidationError("scale " + std::to_string(scales_[i]) + " is below the minimum " +
                                  std::to_string(min_scale_));
        if (i > 0 && scales_[i] <= scales_[i - 1])
            throw ValidationError("scale grid must be strictly increasing");
    }
}

ScaleGrid ScaleGrid::log_spaced(std::size_t lo, std::size_t hi, std::size_t count,
                                std::size_t min_scale) {
    if (lo == 0 || hi < lo) throw ValidationError("log-spaced grid needs 0 < lo <= hi");
    if (count == 0) throw ValidationError("log-spaced grid needs at least one point");
    std::vector<std::size_t> out;
    out.reserve(count);
    if (count == 1 || lo == hi) {
        out.push_back(lo);
    } else {
        const double step = std::log(static_cast<double>(hi) / static_cast<double>(lo)) /
                            static_cast<double>(count - 1);
        for (std::size_t k = 0; k < count; ++k) {
            std::size_t s = k + 1 == count
                                ? hi
                                : static_cast<std::size_t>(std::lround(
                                      static_cast<double>(lo) * std::exp(step * static_cast<double>(k))));
            s = std::clamp(s, lo, hi);
            if (out.empty() || s > out.back()) out.push_back(s);
        }
    }
    return ScaleGrid(std::move(out), min_scale);
}

ScaleGrid ScaleGrid::default_for(std::size_t profile_length) {
    const std::size_t hi = std::min(kYearScale, profile_length / 4);
    if (hi < kDefaultMinScale)
        throw ValidationError("series too short for the default scale grid (profile length " +
                              std::to_string(profile_length) + ")");
    return log_spaced(kDefaultMinScale, hi, kDefaultPoints);
}

void ScaleGrid::check_fits(std::size_t profile_length) const {
    if (back() > profile_length / 2)
        throw ValidationError("scale " + std::to_string(back()) + " exceeds half the profile length " +
                              std::to_string(profile_length));
}

// ---------------------------------------------------------------------------
// DetrendMethod

DetrendMethod DetrendMethod::dfa(unsigned order) {
    if (order < 1) throw ValidationError("DFA order must be at least 1");
    return DetrendMethod(Kind::dfa, order, MaAlignment::centered);
}

DetrendMethod DetrendMethod::dma(MaAlignment alignment) {
    return DetrendMethod(Kind::dma, 0, alignment);
}

std::size_t DetrendMethod::min_scale() const noexcept {
    return kind_ == Kind::dfa ? order_ + 2 : 2;
}

std::string DetrendMethod::name() const {
    if (kind_ == Kind::dfa) return "dfa" + std::to_string(order_);
    return alignment_ == MaAlignment::centered ? "dma-centered" : "dma-backward";
}

DetrendMethod DetrendMethod::parse(std::string_view name) {
    if (name == "dma" || name == "dma-centered") return dma(MaAlignment::centered);
    if (name == "dma-backward") return dma(MaAlignment::backward);
    if (name.starts_with("dfa")) {
        const auto rest = name.substr(3);
        if (rest.empty()) return dfa(1);
        unsigned order = 0;
        const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), order);
        if (res.ec == std::errc{} && res.ptr == rest.data() + rest.size()) return dfa(order);
    }
    throw ValidationError("unknown detrending method: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Segmentation and trends

std::vector<IndexRange> segment_bounds(std::size_t n, std::size_t s) {
    if (s == 0 || s > n)
        throw ValidationError("scale " + std::to_string(s) + " does not fit a profile of length " +
                              std::to_string(n));
    const std::size_t count = n / s;
    std::vector<IndexRange> out;
    out.reserve(2 * count);
    for (std::size_t v = 0; v < count; ++v) out.push_back({v * s, (v + 1) * s});
    for (std::size_t v = 0; v < count; ++v) out.push_back({n - (v + 1) * s, n - v * s});
    return out;
}

namespace {

// Orthonormal basis of polynomials up to `order` sampled at 0..s-1, via a
// thin QR of the Vandermonde matrix on a centred, scaled abscissa. Every
// segment of one scale shares the same abscissa, so the basis is built once.
Eigen::MatrixXd polynomial_basis(std::size_t s, unsigned order) {
    const auto rows = static_cast<Eigen::Index>(s);
    const auto cols = static_cast<Eigen::Index>(order) + 1;
    const double mid = 0.5 * static_cast<double>(s - 1);
    const double half = std::max(mid, 1.0);
    Eigen::MatrixXd v(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double t = (static_cast<double>(i) - mid) / half;
        double p = 1.0;
        for (Eigen::Index k = 0; k < cols; ++k) {
            v(i, k) = p;
            p *= t;
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < cols; ++k) {
        if (std::abs(r(k, k)) <= 1e-12 * std::sqrt(static_cast<double>(s)))
            throw AnalysisError("degenerate polynomial fit at scale " + std::to_string(s));
    }
    return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

void check_method_for_scale(const DetrendMethod& method, std::size_t s) {
    if (s < method.min_scale())
        throw ValidationError("scale " + std::to_string(s) + " too small for " + method.name() +
                              " (needs at least " + std::to_string(method.min_scale()) + ")");
}

// Moving average of window `scale` at every profile index, truncated at the
// ends. Prefix sums in extended precision keep window sums accurate.
std::vector<double> moving_average(std::span<const double> y, std::size_t scale, MaAlignment alignment) {
    const std::size_t n = y.size();
    std::vector<long double> prefix(n + 1, 0.0L);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + y[i];

    // Centred window for even `scale` reaches one further into the past.
    const std::size_t back = alignment == MaAlignment::backward ? scale - 1 : scale / 2;
    const std::size_t ahead = alignment == MaAlignment::backward ? 0 : (scale - 1) / 2;

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= back ? i - back : 0;
        const std::size_t hi = std::min(n - 1, i + ahead);
        out[i] = static_cast<double>((prefix[hi + 1] - prefix[lo]) /
                                     static_cast<long double>(hi - lo + 1));
    }
    return out;
}

void check_range(std::span<const double> profile, IndexRange range) {
    if (range.begin >= range.end || range.end > profile.size())
        throw ValidationError("index range outside the profile");
}

}  // namespace

std::vector<double> local_trend(std::span<const double> profile, IndexRange range,
                                const DetrendMethod& method, std::size_t scale) {
    check_range(profile, range);
    if (method.kind() == DetrendMethod::Kind::dfa) {
        check_method_for_scale(method, range.size());
        const Eigen::MatrixXd q = polynomial_basis(range.size(), method.order());
        const Eigen::Map<const Eigen::VectorXd> seg(profile.data() + range.begin,
                                                    static_cast<Eigen::Index>(range.size()));
        const Eigen::VectorXd trend = q * (q.transpose() * seg);
        return {trend.data(), trend.data() + trend.size()};
    }
    check_method_for_scale(method, scale);
    const auto ma = moving_average(profile, scale, method.alignment());
    return {ma.begin() + static_cast<std::ptrdiff_t>(range.begin),
            ma.begin() + static_cast<std::ptrdiff_t>(range.end)};
}

SegmentResiduals detrended_segments(std::span<const double> profile, std::size_t scale,
                                    const DetrendMethod& method) {
    check_method_for_scale(method, scale);
    const auto ranges = segment_bounds(profile.size(), scale);

    SegmentResiduals out;
    out.scale = scale;
    out.n_segments = ranges.size();
    out.values.resize(ranges.size() * scale);

    if (method.kind() == DetrendMethod::Kind::dfa) {
        const Eigen::MatrixXd q = polynomial_basis(scale, method.order());
        for (std::size_t v = 0; v < ranges.size(); ++v) {
            const Eigen::Map<const Eigen::VectorXd> seg(profile.data() + ranges[v].begin,
                                                        static_cast<Eigen::Index>(scale));
            Eigen::Map<Eigen::VectorXd> res(out.values.data() + v * scale,
                                            static_cast<Eigen::Index>(scale));
            res = seg - q * (q.transpose() * seg);
        }
    } else {
        const auto ma = moving_average(profile, scale, method.alignment());
        for (std::size_t v = 0; v < ranges.size(); ++v) {
            double* dst = out.values.data() + v * scale;
            for (std::size_t i = ranges[v].begin; i < ranges[v].end; ++i) *dst++ = profile[i] - ma[i];
        }
    }
    return out;
}

std::vector<double> segment_variances(const SegmentResiduals& residuals) {
    std::vector<double> out(residuals.n_segments);
    for (std::size_t v = 0; v < residuals.n_segments; ++v) {
        double acc = 0.0;
        for (const double r : residuals.segment(v)) acc += r * r;
        out[v] = acc / static_cast<double>(residuals.scale);
    }
    return out;
}

FluctuationFunction fluctuation(std::span<const double> profile, const ScaleGrid& grid,
                                const DetrendMethod& method, std::string series_id) {
    grid.check_fits(profile.size());
    check_method_for_scale(method, grid.front());

    FluctuationFunction out{std::move(series_id), method, std::vector<FluctuationPoint>(grid.size())};
    parallel_for(grid.size(), [&](std::size_t k) {
        const std::size_t s = grid.scales()[k];
        const auto variances = segment_variances(detrended_segments(profile, s, method));
        double acc = 0.0;
        for (const double f2 : variances) acc += f2;
        out.points[k] = {s, std::sqrt(acc / static_cast<double>(variances.size())), variances.size()};
    });
    return out;
}

FluctuationFunction fluctuation(const Profile& profile, const ScaleGrid& grid,
                                const DetrendMethod& method) {
    return fluctuation(profile.values(), grid, method, profile.parent_id());
}

}  // namespace longmem
