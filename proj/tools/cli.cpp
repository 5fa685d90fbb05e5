#include "cli.hpp"

#include "longmem/dcca.hpp"
#include "longmem/error.hpp"
#include "longmem/export.hpp"
#include "longmem/hurst.hpp"
#include "longmem/network.hpp"
#include "longmem/parallel.hpp"
#include "longmem/scaling.hpp"
#include "longmem/series.hpp"
#include "longmem/synthetic.hpp"
#include "longmem/version.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace longmem::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 1;
const std::vector<std::string> kAllFormats{"csv", "dot", "graphml", "json"};
const std::vector<std::size_t> kSnapshotScales{50, 150, 250};

// ---------------------------------------------------------------------------
// Options

struct Options {
    std::string command;

    std::string input;
    std::string delimiter = ",";
    std::string align = "intersect";
    std::size_t max_gap = 1;
    std::string method = "dma-centered";
    std::size_t s_min = 0;  // 0: command default
    std::size_t s_max = 0;
    std::size_t n_scales = 0;
    std::vector<std::size_t> scales;
    std::string out;
    std::vector<std::string> formats;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool strict = false;

    std::size_t fit_min = 0;
    std::size_t fit_max = kDefaultFitMax;
    double bin_width = 0.02;
    bool crossover = false;
    double crossover_threshold = 0.5;
    std::size_t min_side_points = 3;

    std::vector<std::string> pairs;
    bool all = false;
    std::vector<std::size_t> snapshot_scales;
    double threshold = kDefaultEdgeThreshold;
    double resolution = 1.0;
    std::vector<std::string> periods;

    bool fgn = false;
    std::string blocks;
    std::optional<double> hurst;
    std::size_t n = 8192;
    std::size_t count = 1;
    double weight = 0.9;
    double sigma = 1.0;
    std::string prefix = "fgn";

    std::string manifest;

    std::uint64_t effective_seed() const { return seed.value_or(kDefaultSeed); }
    bool wants(const std::string& format) const {
        return std::find(formats.begin(), formats.end(), format) != formats.end();
    }
};

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::vector<std::string> parts;
    for (const auto x : v) parts.push_back(std::to_string(x));
    return join(parts, ',');
}

std::string sanitize(const std::string& name) {
    std::string out = name;
    for (auto& c : out) {
        const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
        if (!keep) c = '_';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output staging: everything is rendered in memory and written only after the
// whole command has succeeded.

class OutputSet {
public:
    void add(const std::string& name, std::string content) {
        if (!names_.insert(name).second) throw ValidationError("two outputs would share the file name " + name);
        files_.emplace_back(name, std::move(content));
    }
    template <typename Fn>
    void add_text(const std::string& name, Fn&& render) {
        std::ostringstream s;
        render(s);
        add(name, s.str());
    }
    void add_json(const std::string& name, const ordered_json& j) { add(name, j.dump(2) + "\n"); }
    void merge(OutputSet other, const std::string& prefix) {
        for (auto& [name, content] : other.files_) add(prefix + name, std::move(content));
    }
    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& f : files_) out.push_back(f.first);
        return out;
    }
    void write(const fs::path& dir) const {
        for (const auto& [name, content] : files_) {
            const fs::path path = dir / name;
            fs::create_directories(path.parent_path());
            std::ofstream f(path, std::ios::binary | std::ios::trunc);
            f << content;
            if (!f) throw DataError("cannot write " + path.string());
        }
    }

private:
    std::vector<std::pair<std::string, std::string>> files_;
    std::set<std::string> names_;
};

std::uint64_t fnv1a(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read input file " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

std::string hex(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

// ---------------------------------------------------------------------------
// Validation and canonical arguments

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

bool uses_input(const std::string& cmd) { return cmd == "hurst" || cmd == "dcca" || cmd == "network" || cmd == "report"; }

void validate(Options& o) {
    require(!o.out.empty(), "--out is required");
    require(!fs::exists(o.out) || fs::is_directory(o.out), "--out " + o.out + " exists and is not a directory");

    if (o.formats.empty()) o.formats = kAllFormats;
    for (const auto& f : o.formats)
        require(std::find(kAllFormats.begin(), kAllFormats.end(), f) != kAllFormats.end(),
                "unknown --format '" + f + "' (expected csv, json, graphml or dot)");
    std::sort(o.formats.begin(), o.formats.end());
    o.formats.erase(std::unique(o.formats.begin(), o.formats.end()), o.formats.end());

    if (uses_input(o.command)) {
        require(!o.input.empty(), "--input is required");
        require(fs::is_regular_file(o.input), "input file " + o.input + " does not exist");
        o.input = fs::absolute(o.input).lexically_normal().string();
        require(o.delimiter.size() == 1, "--delimiter must be a single character");
        require(o.align == "intersect" || o.align == "ffill", "--align must be intersect or ffill");
        (void)DetrendMethod::parse(o.method);
        require(o.fit_max >= o.fit_min, "--fit-max must not be below --fit-min");
        require(o.bin_width > 0.0, "--bin-width must be positive");
        require(o.crossover_threshold > 0.0 && o.crossover_threshold <= 1.0,
                "--crossover-threshold must lie in (0, 1]");
        require(o.min_side_points >= 2, "--min-side-points must be at least 2");
        require(o.threshold > 0.0 && o.threshold <= 1.0,
                "--threshold must lie in (0, 1], got " + fmt(o.threshold));
        require(o.resolution > 0.0, "--resolution must be positive");
        if (o.snapshot_scales.empty()) o.snapshot_scales = kSnapshotScales;
        std::sort(o.snapshot_scales.begin(), o.snapshot_scales.end());
        o.snapshot_scales.erase(std::unique(o.snapshot_scales.begin(), o.snapshot_scales.end()),
                                o.snapshot_scales.end());
        for (const auto& p : o.periods) (void)parse_period(p);
        for (const auto& p : o.pairs)
            require(std::count(p.begin(), p.end(), ',') == 1 && p.front() != ',' && p.back() != ',',
                    "--pair expects two ids separated by a comma, got '" + p + "'");
        if (o.command == "dcca") require(o.all || !o.pairs.empty(), "dcca needs --pair or --all");
    }
    if (o.command == "synth") {
        require(o.fgn != !o.blocks.empty(), "synth needs exactly one of --fgn or --blocks");
        require(o.count >= 1, "--count must be at least 1");
        if (!o.blocks.empty()) {
            const auto x = o.blocks.find('x');
            require(x != std::string::npos, "--blocks expects BxM, e.g. 3x5");
        }
    }
}

std::vector<std::string> canonical_args(const Options& o) {
    std::vector<std::string> a;
    auto add = [&](const std::string& flag, const std::string& value) {
        a.push_back(flag);
        a.push_back(value);
    };
    auto grid_flags = [&] {
        if (!o.scales.empty()) add("--scales", join_sizes(o.scales));
        if (o.s_min) add("--s-min", std::to_string(o.s_min));
        if (o.s_max) add("--s-max", std::to_string(o.s_max));
        if (o.n_scales) add("--n-scales", std::to_string(o.n_scales));
    };
    if (o.command == "synth") {
        if (o.fgn) {
            a.push_back("--fgn");
            add("--count", std::to_string(o.count));
            add("--prefix", o.prefix);
            add("--sigma", fmt(o.sigma));
        } else {
            add("--blocks", o.blocks);
            add("--weight", fmt(o.weight));
        }
        add("--hurst", fmt(*o.hurst));
        add("--n", std::to_string(o.n));
        add("--seed", std::to_string(o.effective_seed()));
        return a;
    }
    add("--input", o.input);
    add("--delimiter", o.delimiter);
    add("--align", o.align);
    add("--max-gap", std::to_string(o.max_gap));
    add("--method", o.method);
    grid_flags();
    const bool hurst_like = o.command == "hurst" || o.command == "report";
    const bool network_like = o.command == "network" || o.command == "report";
    if (hurst_like) {
        add("--fit-min", std::to_string(o.fit_min));
        add("--fit-max", std::to_string(o.fit_max));
        add("--bin-width", fmt(o.bin_width));
        if (o.crossover) a.push_back("--crossover");
        add("--crossover-threshold", fmt(o.crossover_threshold));
        add("--min-side-points", std::to_string(o.min_side_points));
    }
    if (o.command == "dcca") {
        for (const auto& p : o.pairs) add("--pair", p);
        if (o.all) a.push_back("--all");
    }
    if (o.command == "dcca" || network_like) add("--scale", join_sizes(o.snapshot_scales));
    if (network_like) {
        add("--threshold", fmt(o.threshold));
        add("--resolution", fmt(o.resolution));
        for (const auto& p : o.periods) add("--period", p);
    }
    add("--format", join(o.formats, ','));
    add("--seed", std::to_string(o.effective_seed()));
    if (o.strict) a.push_back("--strict");
    return a;
}

// ---------------------------------------------------------------------------
// Shared pipeline pieces

struct Context {
    const Options& opts;
    std::ostream& out;
    std::ostream& err;
};

RatePanel load_input(const Context& cx) {
    const auto loaded = load_panel(cx.opts.input, IngestionConfig{cx.opts.delimiter[0]});
    if (!loaded.rejected_lines.empty()) {
        cx.err << "warning: skipped " << loaded.rejected_lines.size() << " row(s) with unreadable dates (line";
        for (const auto l : loaded.rejected_lines) cx.err << ' ' << l;
        cx.err << ")\n";
    }
    return loaded.panel;
}

AlignPolicy policy(const Options& o) {
    return o.align == "ffill" ? AlignPolicy::forward_fill(o.max_gap) : AlignPolicy::intersect();
}

struct GridDefaults {
    std::size_t lo;
    std::size_t cap;
    std::size_t divisor;  // default upper scale is min(cap, n / divisor)
    std::size_t count;
};

ScaleGrid resolve_grid(const Options& o, std::size_t n, const DetrendMethod& m, GridDefaults d) {
    const std::size_t floor_scale = std::max<std::size_t>(2, m.min_scale());
    ScaleGrid grid = [&] {
        if (!o.scales.empty()) {
            auto s = o.scales;
            std::sort(s.begin(), s.end());
            s.erase(std::unique(s.begin(), s.end()), s.end());
            return ScaleGrid(std::move(s), floor_scale);
        }
        const std::size_t lo = o.s_min ? o.s_min : d.lo;
        const std::size_t hi = o.s_max ? o.s_max : std::min(d.cap, n / d.divisor);
        const std::size_t count = o.n_scales ? o.n_scales : d.count;
        if (hi < lo)
            throw ValidationError("series of " + std::to_string(n + 1) + " observations are too short for scales from " +
                                  std::to_string(lo));
        return ScaleGrid::log_spaced(lo, hi, count, floor_scale);
    }();
    grid.check_fits(n);
    return grid;
}

std::vector<std::size_t> to_vector(std::span<const std::size_t> s) { return {s.begin(), s.end()}; }

ordered_json input_json(const Options& o) {
    return {{"path", o.input}, {"fnv1a64", hex(fnv1a(o.input))}};
}

// ---------------------------------------------------------------------------
// hurst

struct HurstResult {
    OutputSet files;
    ordered_json config;
    bool partial = false;
};

HurstResult compute_hurst(const Context& cx, const RatePanel& raw) {
    const auto& o = cx.opts;
    const auto panel = align(raw, policy(o));
    const auto method = DetrendMethod::parse(o.method);
    const std::size_t n = panel.date_index().size() - 1;
    const auto grid = resolve_grid(o, n, method, {ScaleGrid::kDefaultMinScale, ScaleGrid::kYearScale, 4,
                                                  ScaleGrid::kDefaultPoints});
    HurstOptions ho{FitRange{o.fit_min, o.fit_max}, o.bin_width};
    auto dist = hurst_distribution(panel, method, grid, ho);
    if (dist.estimates.empty()) {
        std::string msg = "every series failed:";
        for (const auto& f : dist.failures) msg += "\n  " + f.series_id + ": " + f.message;
        throw AnalysisError(msg);
    }

    std::vector<std::pair<std::string, CrossoverReport>> crossovers;
    if (o.crossover) {
        for (const auto& f : dist.fluctuations) {
            try {
                crossovers.emplace_back(f.series_id,
                                        detect_crossover(f, {o.min_side_points, o.crossover_threshold}));
            } catch (const AnalysisError& e) {
                dist.failures.push_back({f.series_id, std::string("crossover: ") + e.what()});
            }
        }
    }

    HurstResult r;
    r.partial = !dist.failures.empty();
    for (const auto& f : dist.failures) cx.err << "warning: " << f.series_id << ": " << f.message << '\n';
    for (const auto& e : dist.estimates) {
        const auto cls = classify(e.hurst, 2.0 * e.stderr_hurst);
        cx.out << e.series_id << "  H=" << fmt(e.hurst) << "  stderr=" << fmt(e.stderr_hurst) << "  "
               << to_string(cls) << '\n';
    }
    const auto& h = *dist.histogram;
    const auto& mode = h.bins[h.mode_bin];
    cx.out << "H range [" << fmt(h.min) << ", " << fmt(h.max) << "], mode bin [" << fmt(mode.low) << ", "
           << fmt(mode.high) << ")\n";

    if (o.wants("csv")) {
        r.files.add_text("hurst.csv", [&](std::ostream& s) { io::write_hurst_table(s, dist.estimates); });
        r.files.add_text("histogram.csv", [&](std::ostream& s) { io::write_histogram_table(s, h); });
        r.files.add_text("fluctuations.csv",
                         [&](std::ostream& s) { io::write_fluctuation_table(s, dist.fluctuations); });
        if (o.crossover)
            r.files.add_text("crossover.csv", [&](std::ostream& s) { io::write_crossover_table(s, crossovers); });
        if (!dist.failures.empty()) {
            r.files.add_text("failures.csv", [&](std::ostream& s) {
                s << "id,message\n";
                for (const auto& f : dist.failures) {
                    std::string msg = f.message;
                    std::replace(msg.begin(), msg.end(), ',', ';');
                    std::replace(msg.begin(), msg.end(), '\n', ' ');
                    s << f.series_id << ',' << msg << '\n';
                }
            });
        }
    }
    if (o.wants("json")) {
        ordered_json j;
        j["method"] = io::to_json(method);
        ordered_json est = ordered_json::array();
        for (const auto& e : dist.estimates) {
            auto row = io::to_json(e);
            row["class"] = to_string(classify(e.hurst, 2.0 * e.stderr_hurst));
            est.push_back(std::move(row));
        }
        j["estimates"] = std::move(est);
        ordered_json failures = ordered_json::array();
        for (const auto& f : dist.failures) failures.push_back({{"id", f.series_id}, {"message", f.message}});
        j["failures"] = std::move(failures);
        j["histogram"] = io::to_json(h);
        if (o.crossover) {
            ordered_json cs = ordered_json::array();
            for (const auto& [id, c] : crossovers) {
                auto row = io::to_json(c);
                row["id"] = id;
                cs.push_back(std::move(row));
            }
            j["crossover"] = std::move(cs);
        }
        ordered_json fl = ordered_json::array();
        for (const auto& f : dist.fluctuations) fl.push_back(io::to_json(f));
        j["fluctuations"] = std::move(fl);
        r.files.add_json("hurst.json", j);
    }

    r.config = {{"method", o.method},
                {"align", o.align},
                {"scales", to_vector(grid.scales())},
                {"fit_min", o.fit_min},
                {"fit_max", o.fit_max},
                {"bin_width", o.bin_width},
                {"crossover", o.crossover},
                {"crossover_threshold", o.crossover_threshold},
                {"series", panel.size()},
                {"observations", panel.date_index().size()}};
    return r;
}

// ---------------------------------------------------------------------------
// dcca

struct Result {
    OutputSet files;
    ordered_json config;
};

Result compute_dcca(const Context& cx, const RatePanel& raw, bool matrices_only) {
    const auto& o = cx.opts;
    const auto panel = align(raw, policy(o));
    const auto method = DetrendMethod::parse(o.method);
    const std::size_t n = panel.date_index().size() - 1;
    Result r;
    r.config = {{"method", o.method}, {"align", o.align}};

    if (!matrices_only && !o.pairs.empty()) {
        const auto grid = resolve_grid(o, n, method, {5, 500, 2, 30});
        r.config["pair_scales"] = to_vector(grid.scales());
        ordered_json pairs = ordered_json::array();
        for (const auto& p : o.pairs) {
            const auto comma = p.find(',');
            const std::string a = p.substr(0, comma), b = p.substr(comma + 1);
            for (const auto& id : {a, b})
                require(panel.find(id) != nullptr, "unknown series id '" + id + "' in --pair");
            const auto curve = rho_vs_scale(panel.at(a), panel.at(b), grid, method);
            const std::string stem = "rho_" + sanitize(a) + "__" + sanitize(b);
            if (o.wants("csv"))
                r.files.add_text(stem + ".csv", [&](std::ostream& s) { io::write_rho_curve_table(s, curve); });
            if (o.wants("json")) r.files.add_json(stem + ".json", io::to_json(curve));
            pairs.push_back({a, b});
            const auto [lo, hi] = std::minmax_element(curve.points.begin(), curve.points.end(),
                                                      [](const RhoPoint& x, const RhoPoint& y) { return x.rho < y.rho; });
            cx.out << a << " ~ " << b << "  rho in [" << fmt(lo->rho) << ", " << fmt(hi->rho) << "] over s "
                   << grid.front() << ".." << grid.back() << '\n';
        }
        r.config["pairs"] = std::move(pairs);
    }
    if (matrices_only || o.all) {
        r.config["matrix_scales"] = o.snapshot_scales;
        for (const auto s : o.snapshot_scales) {
            const auto m = pairwise_matrix(panel, s, method);
            const std::string stem = "matrix_s" + std::to_string(s);
            if (o.wants("csv")) r.files.add_text(stem + ".csv", [&](std::ostream& out) { io::write_matrix_table(out, m); });
            if (o.wants("json")) r.files.add_json(stem + ".json", io::to_json(m));
            cx.out << "matrix at s=" << s << ": " << m.size() << " series\n";
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// network

Result compute_network(const Context& cx, const RatePanel& raw) {
    const auto& o = cx.opts;
    const auto method = DetrendMethod::parse(o.method);
    const std::uint64_t seed = o.effective_seed();

    std::vector<std::pair<std::string, RatePanel>> parts;
    if (o.periods.empty()) {
        parts.emplace_back("full", align(raw, policy(o)));
    } else {
        std::vector<PeriodWindow> windows;
        for (const auto& p : o.periods) windows.push_back(parse_period(p));
        auto split = split_periods(raw, windows);
        for (std::size_t i = 0; i < split.size(); ++i)
            parts.emplace_back(format_period(windows[i]), align(split[i], policy(o)));
    }

    Result r;
    r.config = {{"method", o.method},
                {"align", o.align},
                {"threshold", o.threshold},
                {"resolution", o.resolution},
                {"snapshot_scales", o.snapshot_scales}};
    ordered_json periods = ordered_json::array();

    std::ostringstream awd_csv;
    awd_csv << "period,s,avg_weighted_degree,edges\n";
    ordered_json awd_json = ordered_json::array();

    for (const auto& [label, panel] : parts) {
        const std::size_t n = panel.date_index().size() - 1;
        const std::string tag = sanitize(label == "full" ? label : label.substr(0, 4) + "-" + label.substr(11, 4));
        const auto grid = resolve_grid(o, n, method, {ScaleGrid::kDefaultMinScale, ScaleGrid::kYearScale, 4,
                                                      ScaleGrid::kDefaultPoints});
        for (const auto s : o.snapshot_scales)
            require(s >= method.min_scale() && s <= n / 2,
                    "snapshot scale " + std::to_string(s) + " does not fit period " + label + " (" +
                        std::to_string(n + 1) + " observations)");

        ordered_json curve = ordered_json::array();
        for (const auto s : grid.scales()) {
            const auto net = build_network(pairwise_matrix(panel, s, method), o.threshold);
            const double awd = average_weighted_degree(net);
            awd_csv << label << ',' << s << ',' << fmt(awd) << ',' << net.edges.size() << '\n';
            curve.push_back({{"s", s}, {"avg_weighted_degree", awd}, {"edges", net.edges.size()}});
        }
        awd_json.push_back({{"period", label}, {"points", std::move(curve)}});

        for (const auto s : o.snapshot_scales) {
            const auto net = build_network(pairwise_matrix(panel, s, method), o.threshold);
            if (net.edges.empty())
                cx.err << "warning: network for " << label << " at s=" << s << " has no edges at threshold "
                       << fmt(o.threshold) << '\n';
            const bool any_positive =
                std::any_of(net.edges.begin(), net.edges.end(), [](const Edge& e) { return e.weight > 0.0; });
            if (!net.edges.empty() && !any_positive)
                cx.err << "warning: network for " << label << " at s=" << s
                       << " has only negative edges; every node is its own community\n";
            const auto part = [&] {
                if (any_positive) return detect_communities(net, o.resolution, seed);
                CorrelationNetwork bare = net;
                bare.edges.clear();
                auto p = detect_communities(bare, o.resolution, seed);
                p.negative_edges_excluded = net.edges.size();
                return p;
            }();
            const std::string stem = tag + "_s" + std::to_string(s);
            if (o.wants("csv"))
                r.files.add_text("partition_" + stem + ".csv",
                                 [&](std::ostream& out) { io::write_partition_table(out, part); });
            if (o.wants("graphml"))
                r.files.add_text("network_" + stem + ".graphml",
                                 [&](std::ostream& out) { io::write_graphml(out, net, &part); });
            if (o.wants("dot"))
                r.files.add_text("network_" + stem + ".dot", [&](std::ostream& out) { io::write_dot(out, net, &part); });
            if (o.wants("json"))
                r.files.add_json("network_" + stem + ".json",
                                 {{"period", label}, {"network", io::to_json(net)}, {"partition", io::to_json(part)}});
            cx.out << label << " s=" << s << ": " << net.edges.size() << " edges, " << part.n_communities
                   << " communities, Q=" << fmt(part.modularity) << ", avg weighted degree "
                   << fmt(average_weighted_degree(net)) << '\n';
        }
        periods.push_back({{"label", label},
                           {"file_tag", tag},
                           {"observations", panel.date_index().size()},
                           {"awd_scales", to_vector(grid.scales())}});
    }
    if (o.wants("csv")) r.files.add("awd.csv", awd_csv.str());
    if (o.wants("json")) r.files.add_json("awd.json", awd_json);
    r.config["periods"] = std::move(periods);
    return r;
}

// ---------------------------------------------------------------------------
// synth

Result compute_synth(const Context& cx) {
    const auto& o = cx.opts;
    Result r;
    RatePanel panel;
    if (o.fgn) {
        const FgnSpec spec{o.n, *o.hurst, o.effective_seed(), o.sigma};
        panel = generate_fgn_panel(o.count, spec, o.prefix);
        r.config = {{"kind", "fgn"}, {"count", o.count}, {"hurst", spec.hurst}, {"n", spec.n}, {"sigma", spec.sigma}};
    } else {
        BlockSpec spec;
        const auto x = o.blocks.find('x');
        try {
            spec.n_blocks = std::stoul(o.blocks.substr(0, x));
            spec.block_size = std::stoul(o.blocks.substr(x + 1));
        } catch (const std::exception&) {
            throw ValidationError("--blocks expects BxM, e.g. 3x5, got '" + o.blocks + "'");
        }
        spec.common_weight = o.weight;
        spec.hurst = *o.hurst;
        spec.n = o.n;
        spec.seed = o.effective_seed();
        panel = generate_blocks(spec);
        r.files.add_text("membership.csv", [&](std::ostream& s) {
            s << "id,block\n";
            const auto groups = block_membership(spec);
            for (std::size_t b = 0; b < groups.size(); ++b)
                for (const auto& id : groups[b]) s << id << ',' << b + 1 << '\n';
        });
        r.config = {{"kind", "blocks"},
                    {"n_blocks", spec.n_blocks},
                    {"block_size", spec.block_size},
                    {"common_weight", spec.common_weight},
                    {"hurst", spec.hurst},
                    {"n", spec.n}};
    }
    r.files.add_text("panel.csv", [&](std::ostream& s) { write_panel(s, panel); });
    cx.out << "generated " << panel.size() << " series of " << panel.date_index().size() << " observations\n";
    return r;
}

// ---------------------------------------------------------------------------
// Dispatch

ordered_json manifest(const Options& o, const ordered_json& config, const OutputSet& files) {
    const auto v = version_info();
    ordered_json j;
    j["tool"] = "longmem";
    j["command"] = o.command;
    j["args"] = canonical_args(o);
    j["versions"] = {{"longmem", v.longmem}, {"eigen", v.eigen}, {"fftw", v.fftw}};
    j["seed"] = o.effective_seed();
    if (uses_input(o.command)) j["input"] = input_json(o);
    j["config"] = config;
    j["outputs"] = files.names();
    return j;
}

void apply_threads(const Options& o) {
    if (o.threads) {
        set_max_threads(*o.threads);
        return;
    }
    if (const char* env = std::getenv("LONGMEM_THREADS"); env && *env) {
        unsigned v = 0;
        const std::string_view text(env);
        const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        require(res.ec == std::errc{} && res.ptr == text.data() + text.size(),
                "LONGMEM_THREADS must be a non-negative integer, got '" + std::string(text) + "'");
        set_max_threads(v);
    }
}

int execute(Options& o, std::ostream& out, std::ostream& err) {
    validate(o);
    apply_threads(o);
    if (o.command == "synth" && !o.hurst) o.hurst = o.fgn ? FgnSpec{}.hurst : BlockSpec{}.hurst;
    const Context cx{o, out, err};

    out << "seed: " << o.effective_seed() << (o.seed ? "" : " (default)") << '\n';

    OutputSet files;
    ordered_json config;
    bool partial = false;
    if (o.command == "synth") {
        auto r = compute_synth(cx);
        files = std::move(r.files);
        config = std::move(r.config);
    } else {
        const auto raw = load_input(cx);
        if (o.command == "hurst") {
            auto r = compute_hurst(cx, raw);
            files = std::move(r.files);
            config = std::move(r.config);
            partial = r.partial;
        } else if (o.command == "dcca") {
            auto r = compute_dcca(cx, raw, false);
            files = std::move(r.files);
            config = std::move(r.config);
        } else if (o.command == "network") {
            auto r = compute_network(cx, raw);
            files = std::move(r.files);
            config = std::move(r.config);
        } else {
            auto h = compute_hurst(cx, raw);
            auto d = compute_dcca(cx, raw, true);
            auto n = compute_network(cx, raw);
            files.merge(std::move(h.files), "hurst/");
            files.merge(std::move(d.files), "dcca/");
            files.merge(std::move(n.files), "network/");
            config = {{"hurst", h.config}, {"dcca", d.config}, {"network", n.config}};
            partial = h.partial;
        }
    }

    files.add_json("manifest.json", manifest(o, config, files));
    files.write(o.out);
    out << "wrote " << files.names().size() << " file(s) to " << o.out << '\n';
    if (partial && o.strict) {
        err << "error: some series failed and --strict is set\n";
        return kPartial;
    }
    return kOk;
}

int rerun(const Options& o, std::ostream& out, std::ostream& err) {
    require(!o.manifest.empty(), "--manifest is required");
    std::ifstream in(o.manifest);
    require(static_cast<bool>(in), "cannot read manifest " + o.manifest);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest " + o.manifest + " is not valid JSON: " + e.what());
    }
    require(j.value("tool", "") == "longmem" && j.contains("command") && j.contains("args"),
            "manifest " + o.manifest + " was not written by longmem");
    const auto command = j["command"].get<std::string>();
    if (j.contains("input")) {
        const auto path = j["input"]["path"].get<std::string>();
        require(fs::is_regular_file(path), "input file " + path + " named in the manifest does not exist");
        require(hex(fnv1a(path)) == j["input"]["fnv1a64"].get<std::string>(),
                "input file " + path + " has changed since the manifest was written");
    }
    std::vector<std::string> args{command};
    for (const auto& a : j["args"]) args.push_back(a.get<std::string>());
    args.insert(args.end(), {"--out", o.out});
    if (o.threads) args.insert(args.end(), {"--threads", std::to_string(*o.threads)});
    return run(args, out, err);
}

// ---------------------------------------------------------------------------
// Command-line definition

void add_common(CLI::App* sub, Options& o, bool with_input) {
    sub->add_option("--out", o.out, "Output directory (created if missing)")->required();
    sub->add_option("--seed", o.seed, "Seed for every random choice (default 1)");
    sub->add_option("--threads", o.threads, "Worker thread cap; 0 = all cores (fallback: LONGMEM_THREADS)");
    if (!with_input) return;
    sub->add_option("--input", o.input, "Panel CSV: date column then one column per series")->required();
    sub->add_option("--delimiter", o.delimiter, "Field delimiter of the input")->capture_default_str();
    sub->add_option("--align", o.align, "Calendar alignment: intersect or ffill")->capture_default_str();
    sub->add_option("--max-gap", o.max_gap, "Longest run of missing dates ffill may fill")->capture_default_str();
    sub->add_option("--method", o.method, "Detrending: dfa1, dfa2, ..., dma-centered, dma-backward")
        ->capture_default_str();
    sub->add_option("--scales", o.scales, "Explicit scale grid, comma separated")->delimiter(',');
    sub->add_option("--s-min", o.s_min, "Smallest scale of the log-spaced grid");
    sub->add_option("--s-max", o.s_max, "Largest scale of the log-spaced grid");
    sub->add_option("--n-scales", o.n_scales, "Number of log-spaced scales");
    sub->add_option("--format", o.formats, "Output formats: csv,json,graphml,dot (default all)")->delimiter(',');
    sub->add_flag("--strict", o.strict, "Exit with code 3 when any series fails");
}

void add_hurst_options(CLI::App* sub, Options& o) {
    sub->add_option("--fit-min", o.fit_min, "Smallest scale used in the Hurst fit")->capture_default_str();
    sub->add_option("--fit-max", o.fit_max, "Largest scale used in the Hurst fit")->capture_default_str();
    sub->add_option("--bin-width", o.bin_width, "Histogram bin width")->capture_default_str();
    sub->add_flag("--crossover", o.crossover, "Also search each fluctuation function for a crossover");
    sub->add_option("--crossover-threshold", o.crossover_threshold, "Minimum SSE improvement ratio for a crossover")
        ->capture_default_str();
    sub->add_option("--min-side-points", o.min_side_points, "Minimum fit points on each side of a crossover")
        ->capture_default_str();
}

void add_network_options(CLI::App* sub, Options& o) {
    sub->add_option("--threshold", o.threshold, "Keep edges with |rho| >= threshold, in (0, 1]")
        ->capture_default_str();
    sub->add_option("--resolution", o.resolution, "Modularity resolution")->capture_default_str();
    sub->add_option("--period", o.periods, "Sub-period YYYY:YYYY or YYYY-MM-DD:YYYY-MM-DD (repeatable)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Long-range correlation analysis of rate panels (DFA, DMA, DCCA, correlation networks)",
                 "longmem"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("longmem ") + version_info().longmem);

    auto* hurst = app.add_subcommand("hurst", "Hurst exponent per series, histogram and optional crossovers");
    add_common(hurst, o, true);
    add_hurst_options(hurst, o);

    auto* dcca = app.add_subcommand("dcca", "rho_DCCA curves for pairs or matrices for the whole panel");
    add_common(dcca, o, true);
    dcca->add_option("--pair", o.pairs, "Series pair a,b (repeatable)");
    dcca->add_flag("--all", o.all, "All-pairs matrices at the --scale values");
    dcca->add_option("--scale", o.snapshot_scales, "Matrix scales, comma separated (default 50,150,250)")
        ->delimiter(',');

    auto* network = app.add_subcommand("network", "Thresholded correlation networks, communities and degree curves");
    add_common(network, o, true);
    network->add_option("--scale", o.snapshot_scales, "Snapshot scales, comma separated (default 50,150,250)")
        ->delimiter(',');
    add_network_options(network, o);

    auto* synth = app.add_subcommand("synth", "Write a synthetic panel (fGn-driven rate paths or block ensemble)");
    add_common(synth, o, false);
    synth->add_flag("--fgn", o.fgn, "Independent fGn-driven series");
    synth->add_option("--blocks", o.blocks, "Block ensemble BxM, e.g. 3x5");
    synth->add_option("--hurst", o.hurst, "Hurst exponent in (0, 1) (default 0.5 for --fgn, 0.8 for --blocks)");
    synth->add_option("--n", o.n, "Noise samples per series")->capture_default_str();
    synth->add_option("--count", o.count, "Number of --fgn series")->capture_default_str();
    synth->add_option("--weight", o.weight, "Common-factor weight in [0, 1] for --blocks")->capture_default_str();
    synth->add_option("--sigma", o.sigma, "Noise standard deviation for --fgn")->capture_default_str();
    synth->add_option("--prefix", o.prefix, "Id prefix for --fgn series")->capture_default_str();

    auto* report = app.add_subcommand("report", "hurst, dcca matrices and network in one run");
    add_common(report, o, true);
    add_hurst_options(report, o);
    report->add_option("--scale", o.snapshot_scales, "Matrix and snapshot scales (default 50,150,250)")
        ->delimiter(',');
    add_network_options(report, o);

    auto* again = app.add_subcommand("rerun", "Repeat a run from its manifest.json");
    again->add_option("--manifest", o.manifest, "Manifest written by an earlier run")->required();
    again->add_option("--out", o.out, "Output directory")->required();
    again->add_option("--threads", o.threads, "Worker thread cap");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kValidation;
    }
    for (auto* sub : app.get_subcommands()) o.command = sub->get_name();

    try {
        if (o.command == "rerun") return rerun(o, out, err);
        return execute(o, out, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntime;
    }
}

}  // namespace longmem::cli
