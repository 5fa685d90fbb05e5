#pragma once

#include "longmem/scaling.hpp"
#include "longmem/series.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace longmem {

struct CrossPoint {
    std::size_t scale = 0;
    double f2 = 0.0;  // signed F^2_DCCA(s); not square-rooted
    std::size_t n_segments = 0;
};

/// Detrended covariance of two profiles per scale. Both profiles share the
/// segmentation and detrending method; the value is symmetric in the pair.
struct CrossFluctuation {
    std::string id_a;
    std::string id_b;
    DetrendMethod method = DetrendMethod::dfa(1);
    std::vector<CrossPoint> points;
};

/// Mean over segments of (1/s) sum Y_s * Y'_s. Throws ValidationError if the
/// two residual sets were not produced with the same scale and length.
double cross_variance(const SegmentResiduals& a, const SegmentResiduals& b);

/// Mean over segments of (1/s) sum Y_s^2, i.e. F(s)^2.
double auto_variance(const SegmentResiduals& a);

CrossFluctuation cross_fluctuation(std::span<const double> pa, std::span<const double> pb,
                                   const ScaleGrid& grid, const DetrendMethod& method,
                                   std::string id_a = "a", std::string id_b = "b");
CrossFluctuation cross_fluctuation(const Profile& pa, const Profile& pb, const ScaleGrid& grid,
                                   const DetrendMethod& method);

/// rho = F^2_DCCA / (F_a F_b). Rounding overshoot of |rho| above 1 by less
/// than 1e-9 is clamped; a larger one is an AnalysisError. A zero auto
/// fluctuation raises DegenerateSeriesError naming the series.
double rho_from_residuals(const SegmentResiduals& a, const SegmentResiduals& b,
                          const std::string& id_a, const std::string& id_b);

double rho_dcca(std::span<const double> pa, std::span<const double> pb, std::size_t scale,
                const DetrendMethod& method, const std::string& id_a = "a",
                const std::string& id_b = "b");
double rho_dcca(const Profile& pa, const Profile& pb, std::size_t scale, const DetrendMethod& method);

/// rho_DCCA of two aligned series through the absolute-increment profile.
double rho_dcca(const TimeSeries& a, const TimeSeries& b, std::size_t scale,
                const DetrendMethod& method);

/// Symmetric rho_DCCA matrix at one scale, rows in panel order.
struct DccaMatrix {
    std::vector<std::string> ids;
    std::size_t scale = 0;
    DetrendMethod method = DetrendMethod::dfa(1);
    std::vector<double> rho;  // row-major, ids.size() squared

    std::size_t size() const noexcept { return ids.size(); }
    double operator()(std::size_t i, std::size_t j) const { return rho[i * ids.size() + j]; }
};

/// All-pairs rho_DCCA. Per-series residuals are computed once per scale and
/// shared by every pair. Degenerate members abort the whole matrix, listing
/// every offending id.
DccaMatrix pairwise_matrix(const RatePanel& panel, std::size_t scale, const DetrendMethod& method);
std::vector<DccaMatrix> pairwise_matrices(const RatePanel& panel, std::span<const std::size_t> scales,
                                          const DetrendMethod& method);

struct RhoPoint {
    std::size_t scale = 0;
    double rho = 0.0;
};

struct RhoCurve {
    std::string id_a;
    std::string id_b;
    DetrendMethod method = DetrendMethod::dfa(1);
    std::vector<RhoPoint> points;
};

/// Log-spaced grid of 30 scales from 5 up to 500 (or half the profile
/// length, whichever is smaller).
ScaleGrid default_rho_grid(std::size_t profile_length);

RhoCurve rho_vs_scale(const TimeSeries& a, const TimeSeries& b, const ScaleGrid& grid,
                      const DetrendMethod& method);

}  // namespace longmem
