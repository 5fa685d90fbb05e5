#pragma once

#include "longmem/dcca.hpp"
#include "longmem/series.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace longmem {

inline constexpr double kDefaultEdgeThreshold = 0.8;

struct Edge {
    std::size_t a = 0;  // node indices, a < b
    std::size_t b = 0;
    double weight = 0.0;  // signed rho
};

/// Thresholded rho_DCCA graph at one scale. Nodes keep the matrix order.
struct CorrelationNetwork {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;
    std::size_t scale = 0;
    double threshold = kDefaultEdgeThreshold;
};

/// Keeps edge (i, j), i != j, iff |rho_ij| >= threshold. Throws
/// ValidationError unless 0 < threshold <= 1.
CorrelationNetwork build_network(const DccaMatrix& m, double threshold = kDefaultEdgeThreshold);

struct CommunityPartition {
    std::vector<std::string> nodes;    // same order as the network
    std::vector<std::size_t> labels;   // community of each node
    std::size_t n_communities = 0;
    double modularity = 0.0;
    double resolution = 1.0;
    std::uint64_t seed = 0;
    std::size_t negative_edges_excluded = 0;
};

/// Modularity of `labels` over the positive edges of `net`, weighted by rho.
double modularity(const CorrelationNetwork& net, std::span<const std::size_t> labels,
                  double resolution = 1.0);

/// Multi-level greedy modularity optimisation (Louvain) on the positive
/// edges. Nodes are visited in id order shuffled by `seed`; among equally
/// good moves the smallest community label wins, so the result is a pure
/// function of (network, resolution, seed). Labels are renumbered so that
/// community 0 holds the smallest id, community 1 the smallest id not in
/// community 0, and so on.
///
/// Throws AnalysisError if the network has edges but none is positive.
CommunityPartition detect_communities(const CorrelationNetwork& net, double resolution = 1.0,
                                      std::uint64_t seed = 0);

/// Mean over nodes of the summed |weight| of incident edges; 0 when empty.
double average_weighted_degree(const CorrelationNetwork& net);

/// Inclusive calendar window.
struct PeriodWindow {
    Date from;
    Date to;
};

/// Accepts "YYYY:YYYY" (whole calendar years) or "YYYY-MM-DD:YYYY-MM-DD".
PeriodWindow parse_period(std::string_view text);
std::string format_period(const PeriodWindow& w);

/// One restricted panel per window; windows may overlap. Throws DataError
/// for a window outside the panel's dates or one leaving fewer than two
/// shared dates.
std::vector<RatePanel> split_periods(const RatePanel& panel, std::span<const PeriodWindow> windows);

}  // namespace longmem
