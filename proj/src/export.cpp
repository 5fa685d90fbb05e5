#include "longmem/export.hpp"

#include "text.hpp"

#include <ostream>

namespace longmem::io {

using detail::format_double;
using nlohmann::ordered_json;

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

void write_fluctuation_table(std::ostream& out, const FluctuationFunction& f) {
    out << "s,F\n";
    for (const auto& p : f.points) out << p.scale << ',' << format_double(p.value) << '\n';
}

void write_fluctuation_table(std::ostream& out, std::span<const FluctuationFunction> fs) {
    out << "id,s,F,n_segments\n";
    for (const auto& f : fs)
        for (const auto& p : f.points)
            out << f.series_id << ',' << p.scale << ',' << format_double(p.value) << ',' << p.n_segments
                << '\n';
}

void write_cross_fluctuation_table(std::ostream& out, const CrossFluctuation& f) {
    out << "s,F2_dcca\n";
    for (const auto& p : f.points) out << p.scale << ',' << format_double(p.f2) << '\n';
}

void write_hurst_table(std::ostream& out, std::span<const HurstEstimate> estimates) {
    out << "id,H,stderr,r2,s_lo,s_hi,n_points,n_excluded_zero\n";
    for (const auto& e : estimates) {
        out << e.series_id << ',' << format_double(e.hurst) << ',' << format_double(e.stderr_hurst) << ','
            << format_double(e.r_squared) << ',' << e.fit_range.lo << ',' << e.fit_range.hi << ','
            << e.n_points << ',' << e.n_excluded_zero << '\n';
    }
}

void write_histogram_table(std::ostream& out, const HurstHistogram& h) {
    out << "bin_low,bin_high,count\n";
    for (const auto& b : h.bins)
        out << format_double(b.low) << ',' << format_double(b.high) << ',' << b.count << '\n';
}

void write_crossover_table(std::ostream& out,
                           std::span<const std::pair<std::string, CrossoverReport>> reports) {
    out << "id,breakpoint,breakpoint_estimate,slope_left,slope_right,sse_single,sse_piecewise,"
           "improvement_ratio\n";
    for (const auto& [id, r] : reports) {
        out << id << ',';
        if (r.breakpoint_scale) out << *r.breakpoint_scale;
        out << ',' << format_double(r.breakpoint_estimate) << ',' << format_double(r.slope_left) << ','
            << format_double(r.slope_right) << ',' << format_double(r.sse_single) << ','
            << format_double(r.sse_piecewise) << ',' << format_double(r.improvement_ratio) << '\n';
    }
}

void write_matrix_table(std::ostream& out, const DccaMatrix& m) {
    out << "id";
    for (const auto& id : m.ids) out << ',' << id;
    out << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << m.ids[i];
        for (std::size_t j = 0; j < m.size(); ++j) out << ',' << format_double(m(i, j));
        out << '\n';
    }
}

void write_rho_curve_table(std::ostream& out, const RhoCurve& curve) {
    out << "s,rho\n";
    for (const auto& p : curve.points) out << p.scale << ',' << format_double(p.rho) << '\n';
}

void write_partition_table(std::ostream& out, const CommunityPartition& p) {
    out << "id,community\n";
    for (std::size_t i = 0; i < p.nodes.size(); ++i) out << p.nodes[i] << ',' << p.labels[i] << '\n';
}

void write_graphml(std::ostream& out, const CorrelationNetwork& net, const CommunityPartition* p) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
           "  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n"
           "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n";
    out << "  <graph id=\"s" << net.scale << "\" edgedefault=\"undirected\">\n";
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        out << "    <node id=\"" << xml_escape(net.nodes[i]) << "\"";
        if (p) {
            out << ">\n      <data key=\"community\">" << p->labels[i] << "</data>\n    </node>\n";
        } else {
            out << "/>\n";
        }
    }
    for (const auto& e : net.edges) {
        out << "    <edge source=\"" << xml_escape(net.nodes[e.a]) << "\" target=\""
            << xml_escape(net.nodes[e.b]) << "\">\n      <data key=\"weight\">" << format_double(e.weight)
            << "</data>\n    </edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
}

void write_dot(std::ostream& out, const CorrelationNetwork& net, const CommunityPartition* p) {
    out << "graph s" << net.scale << " {\n";
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        out << "  " << dot_quote(net.nodes[i]);
        if (p) out << " [community=" << p->labels[i] << "]";
        out << ";\n";
    }
    for (const auto& e : net.edges) {
        out << "  " << dot_quote(net.nodes[e.a]) << " -- " << dot_quote(net.nodes[e.b])
            << " [weight=" << format_double(e.weight) << "];\n";
    }
    out << "}\n";
}

ordered_json to_json(const DetrendMethod& m) {
    ordered_json j;
    j["name"] = m.name();
    if (m.kind() == DetrendMethod::Kind::dfa) {
        j["kind"] = "dfa";
        j["order"] = m.order();
    } else {
        j["kind"] = "dma";
        j["alignment"] = m.alignment() == MaAlignment::centered ? "centered" : "backward";
    }
    return j;
}

ordered_json to_json(const FluctuationFunction& f) {
    ordered_json pts = ordered_json::array();
    for (const auto& p : f.points)
        pts.push_back({{"s", p.scale}, {"F", p.value}, {"n_segments", p.n_segments}});
    return {{"series_id", f.series_id}, {"method", to_json(f.method)}, {"points", std::move(pts)}};
}

ordered_json to_json(const CrossFluctuation& f) {
    ordered_json pts = ordered_json::array();
    for (const auto& p : f.points)
        pts.push_back({{"s", p.scale}, {"F2_dcca", p.f2}, {"n_segments", p.n_segments}});
    return {{"pair", {f.id_a, f.id_b}}, {"method", to_json(f.method)}, {"points", std::move(pts)}};
}

ordered_json to_json(const HurstEstimate& e) {
    return {{"id", e.series_id},
            {"H", e.hurst},
            {"intercept", e.intercept},
            {"stderr", e.stderr_hurst},
            {"r2", e.r_squared},
            {"s_lo", e.fit_range.lo},
            {"s_hi", e.fit_range.hi},
            {"n_points", e.n_points},
            {"n_excluded_zero", e.n_excluded_zero}};
}

ordered_json to_json(const HurstHistogram& h) {
    ordered_json bins = ordered_json::array();
    for (const auto& b : h.bins) bins.push_back({{"low", b.low}, {"high", b.high}, {"count", b.count}});
    const auto& mode = h.bins.at(h.mode_bin);
    return {{"bin_width", h.bin_width},
            {"min", h.min},
            {"max", h.max},
            {"mode_bin", {{"low", mode.low}, {"high", mode.high}, {"count", mode.count}}},
            {"bins", std::move(bins)}};
}

ordered_json to_json(const CrossoverReport& r) {
    ordered_json j;
    j["breakpoint"] = r.breakpoint_scale ? ordered_json(*r.breakpoint_scale) : ordered_json(nullptr);
    j["breakpoint_estimate"] = r.breakpoint_estimate;
    j["slope_left"] = r.slope_left;
    j["slope_right"] = r.slope_right;
    j["sse_single"] = r.sse_single;
    j["sse_piecewise"] = r.sse_piecewise;
    j["improvement_ratio"] = r.improvement_ratio;
    return j;
}

ordered_json to_json(const DccaMatrix& m) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return {{"scale", m.scale}, {"method", to_json(m.method)}, {"ids", m.ids}, {"rho", std::move(rows)}};
}

ordered_json to_json(const RhoCurve& c) {
    ordered_json pts = ordered_json::array();
    for (const auto& p : c.points) pts.push_back({{"s", p.scale}, {"rho", p.rho}});
    return {{"pair", {c.id_a, c.id_b}}, {"method", to_json(c.method)}, {"points", std::move(pts)}};
}

ordered_json to_json(const CorrelationNetwork& net) {
    ordered_json edges = ordered_json::array();
    for (const auto& e : net.edges)
        edges.push_back({{"a", net.nodes[e.a]}, {"b", net.nodes[e.b]}, {"weight", e.weight}});
    return {{"scale", net.scale},
            {"threshold", net.threshold},
            {"nodes", net.nodes},
            {"edges", std::move(edges)},
            {"average_weighted_degree", average_weighted_degree(net)}};
}

ordered_json to_json(const CommunityPartition& p) {
    ordered_json assignment = ordered_json::object();
    for (std::size_t i = 0; i < p.nodes.size(); ++i) assignment[p.nodes[i]] = p.labels[i];
    return {{"modularity", p.modularity},
            {"resolution", p.resolution},
            {"seed", p.seed},
            {"n_communities", p.n_communities},
            {"negative_edges_excluded", p.negative_edges_excluded},
            {"assignment", std::move(assignment)}};
}

}  // namespace longmem::io
