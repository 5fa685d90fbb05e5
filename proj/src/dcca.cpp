#include "longmem/dcca.hpp"

#include "longmem/error.hpp"
#include "longmem/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace longmem {

namespace {

constexpr double kRhoOvershootTolerance = 1e-9;

void check_same_shape(const SegmentResiduals& a, const SegmentResiduals& b) {
    if (a.scale != b.scale || a.n_segments != b.n_segments || a.values.size() != b.values.size())
        throw ValidationError("cross analysis needs residuals from the same segmentation");
}

void check_same_dates(const TimeSeries& a, const TimeSeries& b) {
    if (!std::equal(a.dates().begin(), a.dates().end(), b.dates().begin(), b.dates().end()))
        throw ValidationError("series " + a.id() + " and " + b.id() +
                              " are not aligned; align the panel first");
}

}  // namespace

double cross_variance(const SegmentResiduals& a, const SegmentResiduals& b) {
    check_same_shape(a, b);
    double total = 0.0;
    for (std::size_t v = 0; v < a.n_segments; ++v) {
        const auto sa = a.segment(v);
        const auto sb = b.segment(v);
        double acc = 0.0;
        for (std::size_t i = 0; i < a.scale; ++i) acc += sa[i] * sb[i];
        total += acc / static_cast<double>(a.scale);
    }
    return total / static_cast<double>(a.n_segments);
}

double auto_variance(const SegmentResiduals& a) {
    double total = 0.0;
    for (const double f2 : segment_variances(a)) total += f2;
    return total / static_cast<double>(a.n_segments);
}

CrossFluctuation cross_fluctuation(std::span<const double> pa, std::span<const double> pb,
                                   const ScaleGrid& grid, const DetrendMethod& method,
                                   std::string id_a, std::string id_b) {
    if (pa.size() != pb.size())
        throw ValidationError("profiles " + id_a + " and " + id_b + " differ in length");
    grid.check_fits(pa.size());

    CrossFluctuation out{std::move(id_a), std::move(id_b), method,
                         std::vector<CrossPoint>(grid.size())};
    parallel_for(grid.size(), [&](std::size_t k) {
        const std::size_t s = grid.scales()[k];
        const auto ra = detrended_segments(pa, s, method);
        const auto rb = detrended_segments(pb, s, method);
        out.points[k] = {s, cross_variance(ra, rb), ra.n_segments};
    });
    return out;
}

CrossFluctuation cross_fluctuation(const Profile& pa, const Profile& pb, const ScaleGrid& grid,
                                   const DetrendMethod& method) {
    return cross_fluctuation(pa.values(), pb.values(), grid, method, pa.parent_id(), pb.parent_id());
}

double rho_from_residuals(const SegmentResiduals& a, const SegmentResiduals& b,
                          const std::string& id_a, const std::string& id_b) {
    const double faa = auto_variance(a);
    const double fbb = auto_variance(b);
    std::vector<std::string> degenerate;
    if (!(faa > 0.0)) degenerate.push_back(id_a);
    if (!(fbb > 0.0) && (id_b != id_a || degenerate.empty())) degenerate.push_back(id_b);
    if (!degenerate.empty()) throw DegenerateSeriesError(std::move(degenerate));

    const double rho = cross_variance(a, b) / std::sqrt(faa * fbb);
    if (std::abs(rho) > 1.0 + kRhoOvershootTolerance)
        throw AnalysisError("rho_DCCA(" + id_a + ", " + id_b + ", s=" + std::to_string(a.scale) +
                            ") = " + std::to_string(rho) + " is outside [-1, 1]");
    return std::clamp(rho, -1.0, 1.0);
}

double rho_dcca(std::span<const double> pa, std::span<const double> pb, std::size_t scale,
                const DetrendMethod& method, const std::string& id_a, const std::string& id_b) {
    if (pa.size() != pb.size())
        throw ValidationError("profiles " + id_a + " and " + id_b + " differ in length");
    const auto ra = detrended_segments(pa, scale, method);
    const auto rb = detrended_segments(pb, scale, method);
    return rho_from_residuals(ra, rb, id_a, id_b);
}

double rho_dcca(const Profile& pa, const Profile& pb, std::size_t scale, const DetrendMethod& method) {
    return rho_dcca(pa.values(), pb.values(), scale, method, pa.parent_id(), pb.parent_id());
}

double rho_dcca(const TimeSeries& a, const TimeSeries& b, std::size_t scale,
                const DetrendMethod& method) {
    check_same_dates(a, b);
    return rho_dcca(series_profile(a), series_profile(b), scale, method);
}

DccaMatrix pairwise_matrix(const RatePanel& panel, std::size_t scale, const DetrendMethod& method) {
    if (panel.size() < 2) throw ValidationError("pairwise matrix needs at least 2 series");
    if (!panel.is_aligned()) throw ValidationError("pairwise matrix needs an aligned panel");
    const std::size_t n = panel.size();
    const std::size_t profile_length = panel.date_index().size() - 1;
    if (scale > profile_length / 2 || scale < method.min_scale())
        throw ValidationError("scale " + std::to_string(scale) + " invalid for profile length " +
                              std::to_string(profile_length));

    // Warm-up: residuals and auto variances per series, read-only afterwards.
    std::vector<SegmentResiduals> residuals(n);
    std::vector<double> auto_var(n);
    parallel_for(n, [&](std::size_t i) {
        residuals[i] = detrended_segments(series_profile(panel.series()[i]).values(), scale, method);
        auto_var[i] = auto_variance(residuals[i]);
    });
    std::vector<std::string> degenerate;
    for (std::size_t i = 0; i < n; ++i)
        if (!(auto_var[i] > 0.0)) degenerate.push_back(panel.series()[i].id());
    if (!degenerate.empty()) throw DegenerateSeriesError(std::move(degenerate));

    DccaMatrix m{panel.ids(), scale, method, std::vector<double>(n * n, 0.0)};
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        m.rho[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    parallel_for(pairs.size(), [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        const double r = rho_from_residuals(residuals[i], residuals[j], m.ids[i], m.ids[j]);
        m.rho[i * n + j] = r;
        m.rho[j * n + i] = r;
    });
    return m;
}

std::vector<DccaMatrix> pairwise_matrices(const RatePanel& panel, std::span<const std::size_t> scales,
                                          const DetrendMethod& method) {
    std::vector<DccaMatrix> out;
    out.reserve(scales.size());
    for (const auto s : scales) out.push_back(pairwise_matrix(panel, s, method));
    return out;
}

ScaleGrid default_rho_grid(std::size_t profile_length) {
    const std::size_t hi = std::min<std::size_t>(500, profile_length / 2);
    if (hi < 5) throw ValidationError("series too short for a rho-vs-scale curve");
    return ScaleGrid::log_spaced(5, hi, 30, 5);
}

RhoCurve rho_vs_scale(const TimeSeries& a, const TimeSeries& b, const ScaleGrid& grid,
                      const DetrendMethod& method) {
    check_same_dates(a, b);
    const auto pa = series_profile(a);
    const auto pb = series_profile(b);
    grid.check_fits(pa.size());

    RhoCurve curve{a.id(), b.id(), method, std::vector<RhoPoint>(grid.size())};
    parallel_for(grid.size(), [&](std::size_t k) {
        const std::size_t s = grid.scales()[k];
        curve.points[k] = {s, rho_dcca(pa, pb, s, method)};
    });
    return curve;
}

}  // namespace longmem
