#include "longmem/network.hpp"

#include "longmem/error.hpp"

#include <algorithm>
#include <charconv>
#include <iterator>
#include <limits>
#include <optional>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace longmem {

CorrelationNetwork build_network(const DccaMatrix& m, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw ValidationError("edge threshold must lie in (0, 1], got " + std::to_string(threshold));
    const std::size_t n = m.size();
    if (m.rho.size() != n * n) throw ValidationError("matrix shape does not match its ids");

    CorrelationNetwork net{m.ids, {}, m.scale, threshold};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = m(i, j);
            if (std::abs(r) >= threshold) net.edges.push_back({i, j, r});
        }
    }
    return net;
}

namespace {

constexpr double kGainEpsilon = 1e-12;

// Undirected weighted graph for one Louvain level. `self` holds the summed
// weight inside a collapsed node counted in both directions, so that
// strength[i] = self[i] + sum of incident edge weights.
struct LevelGraph {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj;
    std::vector<double> self;
    std::vector<double> strength;
    double total = 0.0;  // sum of strengths (twice the edge weight)

    std::size_t size() const { return adj.size(); }
};

LevelGraph positive_graph(const CorrelationNetwork& net) {
    LevelGraph g;
    const std::size_t n = net.nodes.size();
    g.adj.resize(n);
    g.self.assign(n, 0.0);
    g.strength.assign(n, 0.0);
    for (const auto& e : net.edges) {
        if (!(e.weight > 0.0)) continue;
        g.adj[e.a].emplace_back(e.b, e.weight);
        g.adj[e.b].emplace_back(e.a, e.weight);
        g.strength[e.a] += e.weight;
        g.strength[e.b] += e.weight;
    }
    g.total = std::accumulate(g.strength.begin(), g.strength.end(), 0.0);
    return g;
}

// One round of local moving. Returns the community of every node and
// whether any node changed community.
std::pair<std::vector<std::size_t>, bool> local_moving(const LevelGraph& g, double resolution,
                                                       std::mt19937_64& rng,
                                                       std::vector<std::size_t> order) {
    const std::size_t n = g.size();
    std::vector<std::size_t> comm(n);
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<double> tot = g.strength;

    std::shuffle(order.begin(), order.end(), rng);

    std::vector<double> link(n, 0.0);
    std::vector<char> touched_flag(n, 0);
    std::vector<std::size_t> touched;
    bool any_move = false;

    for (int pass = 0; pass < 1000; ++pass) {
        bool moved = false;
        for (const std::size_t i : order) {
            const std::size_t home = comm[i];
            const double ki = g.strength[i];
            touched.clear();
            for (const auto& [j, w] : g.adj[i]) {
                const std::size_t c = comm[j];
                if (!touched_flag[c]) {
                    touched_flag[c] = 1;
                    touched.push_back(c);
                }
                link[c] += w;
            }
            std::sort(touched.begin(), touched.end());

            tot[home] -= ki;
            const double scale = resolution * ki / g.total;
            const double stay_gain = link[home] - scale * tot[home];

            std::size_t best = home;
            double best_gain = -std::numeric_limits<double>::infinity();
            for (const std::size_t c : touched) {
                if (c == home) continue;
                const double gain = link[c] - scale * tot[c];
                if (gain > best_gain + kGainEpsilon) {
                    best_gain = gain;
                    best = c;
                }
            }
            if (best == home || !(best_gain > stay_gain + kGainEpsilon)) best = home;

            tot[best] += ki;
            if (best != home) {
                comm[i] = best;
                moved = true;
            }
            for (const std::size_t c : touched) {
                link[c] = 0.0;
                touched_flag[c] = 0;
            }
        }
        if (!moved) break;
        any_move = true;
    }
    return {std::move(comm), any_move};
}

// Renumbers communities 0..k-1 by first appearance in node order and
// collapses each into a single node.
LevelGraph aggregate(const LevelGraph& g, std::vector<std::size_t>& comm) {
    std::vector<std::size_t> renumber(g.size(), g.size());
    std::size_t k = 0;
    for (auto& c : comm) {
        if (renumber[c] == g.size()) renumber[c] = k++;
        c = renumber[c];
    }

    LevelGraph out;
    out.adj.resize(k);
    out.self.assign(k, 0.0);
    out.strength.assign(k, 0.0);
    out.total = g.total;
    std::vector<std::map<std::size_t, double>> links(k);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t ci = comm[i];
        out.self[ci] += g.self[i];
        out.strength[ci] += g.strength[i];
        for (const auto& [j, w] : g.adj[i]) {
            const std::size_t cj = comm[j];
            if (ci == cj) {
                out.self[ci] += w;
            } else {
                links[ci][cj] += w;
            }
        }
    }
    for (std::size_t c = 0; c < k; ++c)
        for (const auto& [d, w] : links[c]) out.adj[c].emplace_back(d, w);
    return out;
}

std::vector<std::size_t> canonical_order(const std::vector<std::string>& nodes) {
    std::vector<std::size_t> idx(nodes.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
    return idx;
}

// Community 0 is the one holding the smallest id, and so on.
std::size_t canonicalize(const std::vector<std::string>& nodes, std::vector<std::size_t>& labels) {
    std::map<std::size_t, std::size_t> relabel;
    for (const std::size_t i : canonical_order(nodes)) relabel.try_emplace(labels[i], relabel.size());
    for (auto& l : labels) l = relabel.at(l);
    return relabel.size();
}

}  // namespace

double modularity(const CorrelationNetwork& net, std::span<const std::size_t> labels, double resolution) {
    if (labels.size() != net.nodes.size()) throw ValidationError("one label per node required");
    const auto g = positive_graph(net);
    if (g.total <= 0.0) return 0.0;
    const std::size_t k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<double> inside(k, 0.0), tot(k, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        tot[labels[i]] += g.strength[i];
        for (const auto& [j, w] : g.adj[i])
            if (labels[j] == labels[i]) inside[labels[i]] += w;
    }
    double q = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const double frac = tot[c] / g.total;
        q += inside[c] / g.total - resolution * frac * frac;
    }
    return q;
}

CommunityPartition detect_communities(const CorrelationNetwork& net, double resolution,
                                      std::uint64_t seed) {
    if (net.nodes.empty()) throw ValidationError("community detection on an empty network");
    if (!(resolution > 0.0)) throw ValidationError("resolution must be positive");

    CommunityPartition part;
    part.nodes = net.nodes;
    part.resolution = resolution;
    part.seed = seed;
    part.negative_edges_excluded = static_cast<std::size_t>(
        std::count_if(net.edges.begin(), net.edges.end(), [](const Edge& e) { return !(e.weight > 0.0); }));
    if (!net.edges.empty() && part.negative_edges_excluded == net.edges.size())
        throw AnalysisError("network at s=" + std::to_string(net.scale) +
                            " has only negative edges; modularity is undefined");

    const std::size_t n = net.nodes.size();
    part.labels.resize(n);
    std::iota(part.labels.begin(), part.labels.end(), 0);

    LevelGraph g = positive_graph(net);
    if (g.total > 0.0) {
        std::mt19937_64 rng(seed);
        std::vector<std::size_t> order = canonical_order(net.nodes);
        for (;;) {
            auto [comm, moved] = local_moving(g, resolution, rng, order);
            if (!moved) break;
            g = aggregate(g, comm);
            for (auto& l : part.labels) l = comm[l];
            order.resize(g.size());
            std::iota(order.begin(), order.end(), 0);
        }
    }

    part.n_communities = canonicalize(part.nodes, part.labels);
    part.modularity = modularity(net, part.labels, resolution);

    // Never report less than the single-community partition achieves.
    const std::vector<std::size_t> together(n, 0);
    const double q_together = modularity(net, together, resolution);
    if (g.total > 0.0 && q_together > part.modularity) {
        part.labels = together;
        part.n_communities = 1;
        part.modularity = q_together;
    }
    return part;
}

double average_weighted_degree(const CorrelationNetwork& net) {
    if (net.nodes.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& e : net.edges) sum += 2.0 * std::abs(e.weight);
    return sum / static_cast<double>(net.nodes.size());
}

PeriodWindow parse_period(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw ValidationError("period must look like FROM:TO, got '" + std::string(text) + "'");
    const auto from_text = text.substr(0, colon);
    const auto to_text = text.substr(colon + 1);

    auto parse_year = [](std::string_view y) -> std::optional<int> {
        if (y.size() != 4) return std::nullopt;
        int v = 0;
        const auto res = std::from_chars(y.data(), y.data() + y.size(), v);
        if (res.ec != std::errc{} || res.ptr != y.data() + y.size()) return std::nullopt;
        return v;
    };
    using namespace std::chrono;
    PeriodWindow w;
    if (const auto y = parse_year(from_text)) {
        w.from = sys_days{year{*y} / January / 1};
    } else if (const auto d = parse_date(from_text)) {
        w.from = *d;
    } else {
        throw ValidationError("bad period start '" + std::string(from_text) + "'");
    }
    if (const auto y = parse_year(to_text)) {
        w.to = sys_days{year{*y} / December / 31};
    } else if (const auto d = parse_date(to_text)) {
        w.to = *d;
    } else {
        throw ValidationError("bad period end '" + std::string(to_text) + "'");
    }
    if (w.to < w.from) throw ValidationError("period ends before it starts: " + std::string(text));
    return w;
}

std::string format_period(const PeriodWindow& w) {
    return format_date(w.from) + ":" + format_date(w.to);
}

std::vector<RatePanel> split_periods(const RatePanel& panel, std::span<const PeriodWindow> windows) {
    if (windows.empty()) throw ValidationError("no period windows given");
    if (panel.empty()) throw ValidationError("cannot split an empty panel");
    const auto calendar = panel.date_index();

    std::vector<RatePanel> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        if (calendar.empty() || w.to < calendar.front() || w.from > calendar.back())
            throw DataError("period " + format_period(w) + " lies outside the panel dates");
        auto inside = [&](Date d) { return d >= w.from && d <= w.to; };

        std::vector<Date> sub_calendar;
        std::copy_if(calendar.begin(), calendar.end(), std::back_inserter(sub_calendar), inside);

        std::vector<TimeSeries> members;
        std::vector<std::size_t> observed(sub_calendar.size(), 0);
        for (const auto& s : panel.series()) {
            std::vector<Date> dates;
            std::vector<double> values;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (inside(s.dates()[i])) {
                    dates.push_back(s.dates()[i]);
                    values.push_back(s.values()[i]);
                }
            }
            if (dates.size() < 2)
                throw DataError("period " + format_period(w) + " leaves series " + s.id() +
                                " with fewer than 2 observations");
            std::size_t k = 0;
            for (const Date d : dates) {
                while (sub_calendar[k] != d) ++k;
                ++observed[k];
            }
            members.emplace_back(s.id(), std::move(dates), std::move(values));
        }
        const auto shared = std::count(observed.begin(), observed.end(), panel.size());
        if (shared < 2)
            throw DataError("period " + format_period(w) + " has fewer than 2 shared dates");
        out.emplace_back(std::move(members), std::move(sub_calendar));
    }
    return out;
}

}  // namespace longmem
