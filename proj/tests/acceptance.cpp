// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "cli.hpp"
#include "longmem/dcca.hpp"
#include "longmem/error.hpp"
#include "longmem/hurst.hpp"
#include "longmem/network.hpp"
#include "longmem/synthetic.hpp"

#include "oracle.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace longmem;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

std::string num(double v, int precision = 4) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

const DetrendMethod kAllMethods[] = {DetrendMethod::dfa(1), DetrendMethod::dfa(2), DetrendMethod::dma(),
                                     DetrendMethod::dma(MaAlignment::backward)};

oracle::Kind oracle_kind(const DetrendMethod& m) {
    if (m.kind() == DetrendMethod::Kind::dfa) return oracle::Kind::dfa;
    return m.alignment() == MaAlignment::centered ? oracle::Kind::dma_centered : oracle::Kind::dma_backward;
}

// 1 -------------------------------------------------------------------------

Verdict hurst_recovery() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::string where;
    for (const double h : {0.3, 0.5, 0.7, 0.9}) {
        for (const auto& m : {DetrendMethod::dfa(1), DetrendMethod::dma()}) {
            double sum = 0.0;
            for (std::uint64_t seed = 1; seed <= 20; ++seed) sum += support::estimate_h(h, 8192, seed, m);
            const double bias = std::abs(sum / 20.0 - h);
            if (bias > worst) {
                worst = bias;
                where = m.name() + " at H=" + num(h);
            }
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst <= 0.05 && seconds < 60.0,
            "max |mean(H) - H| = " + num(worst) + " (" + where + "), limit 0.05; " + num(seconds, 3) + " s"};
}

// 2 -------------------------------------------------------------------------

Verdict rho_identities() {
    double self_err = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto p = support::fgn_profile(0.3 + 0.12 * static_cast<double>(seed), 2048, seed);
        for (const auto& m : kAllMethods)
            for (const std::size_t s : {5, 10, 50, 250, 1000})
                if (s >= m.min_scale()) self_err = std::max(self_err, std::abs(rho_dcca(p, p, s, m) - 1.0));
    }

    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> hurst(0.05, 0.95);
    std::uniform_int_distribution<std::size_t> scale(5, 512);
    std::uniform_int_distribution<int> method(0, 3);
    double peak = 0.0;
    int asymmetric = 0;
    for (int draw = 0; draw < 1000; ++draw) {
        const auto a = support::fgn_profile(hurst(rng), 1024, rng());
        const auto b = support::fgn_profile(hurst(rng), 1024, rng());
        const auto& m = kAllMethods[method(rng)];
        const std::size_t s = std::max(scale(rng), m.min_scale());
        const double ab = rho_dcca(a, b, s, m);
        const double ba = rho_dcca(b, a, s, m);
        asymmetric += ab == ba ? 0 : 1;
        peak = std::max(peak, std::abs(ab));
    }
    return {self_err <= 1e-12 && peak <= 1.0 + 1e-9 && asymmetric == 0,
            "max |rho(x,x)-1| = " + num(self_err, 3) + "; max |rho| over 1000 draws = " + num(peak, 6) +
                "; asymmetric draws = " + std::to_string(asymmetric)};
}

// 3 -------------------------------------------------------------------------

Verdict brute_force() {
    std::mt19937_64 rng(31415);
    double worst = 0.0;
    std::size_t comparisons = 0;
    for (std::size_t n = 20; n <= 60; ++n) {
        const auto a = support::random_walk(n, rng());
        const auto b = support::random_walk(n, rng());
        for (const std::size_t s : {std::size_t{5}, std::size_t{10}}) {
            for (const auto& m : kAllMethods) {
                if (s < m.min_scale()) continue;
                const auto kind = oracle_kind(m);
                const int order = static_cast<int>(m.order());
                const int si = static_cast<int>(s);
                const ScaleGrid grid({s}, 5);
                worst = std::max(worst, oracle::relative_error(fluctuation(std::span<const double>(a), grid, m).points[0].value,
                                                               oracle::fluctuation(a, si, kind, order)));
                worst = std::max(worst, oracle::relative_error(cross_fluctuation(a, b, grid, m).points[0].f2,
                                                               oracle::f2_cross(a, b, si, kind, order)));
                worst = std::max(worst, oracle::relative_error(rho_dcca(a, b, s, m), oracle::rho(a, b, si, kind, order)));
                comparisons += 3;
            }
        }
    }
    return {worst <= 1e-10, "max relative error " + num(worst, 3) + " over " + std::to_string(comparisons) +
                                " comparisons (DFA orders 1-2, DMA centered and backward), limit 1e-10"};
}

// 4 -------------------------------------------------------------------------

double broken_power_law(double s) {
    constexpr double brk = 250.0;
    if (s <= brk) return 0.3 * std::pow(s, 0.85);
    return 0.3 * std::pow(brk, 0.85) * std::pow(s / brk, 0.5);
}

FluctuationFunction curve(const std::vector<std::size_t>& scales, auto&& value_of) {
    FluctuationFunction f;
    f.series_id = "curve";
    for (const auto s : scales) f.points.push_back({s, value_of(static_cast<double>(s)), 2});
    return f;
}

std::size_t nearest_index(const std::vector<std::size_t>& scales, double target) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scales.size(); ++i)
        if (std::abs(std::log(scales[i] / target)) < std::abs(std::log(scales[best] / target))) best = i;
    return best;
}

Verdict crossover() {
    const auto g = ScaleGrid::log_spaced(10, 1000, 25);
    std::vector<std::size_t> scales(g.scales().begin(), g.scales().end());
    const std::size_t target = nearest_index(scales, 250.0);

    const auto clean = detect_crossover(curve(scales, broken_power_law));
    const bool clean_ok = clean.breakpoint_scale && *clean.breakpoint_scale == scales[target] &&
                          std::abs(clean.slope_left - 0.85) <= 1e-6 && std::abs(clean.slope_right - 0.5) <= 1e-6;

    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, 0.02);
        const auto r = detect_crossover(curve(scales, [&](double s) { return broken_power_law(s) * std::pow(10.0, noise(rng)); }));
        if (!r.breakpoint_scale) continue;
        const auto idx =
            static_cast<std::size_t>(std::lower_bound(scales.begin(), scales.end(), *r.breakpoint_scale) - scales.begin());
        hits += idx + 1 >= target && idx <= target + 1 ? 1 : 0;
    }
    std::string clean_text = "noiseless break at ";
    clean_text += clean.breakpoint_scale ? std::to_string(*clean.breakpoint_scale) : "none";
    clean_text += " (nearest grid scale " + std::to_string(scales[target]) + "), slopes " + num(clean.slope_left, 8) +
                  " / " + num(clean.slope_right, 8);
    return {clean_ok && hits >= 18, clean_text + "; noisy within one step in " + std::to_string(hits) + "/20"};
}

// 5 -------------------------------------------------------------------------

Verdict segmentation() {
    const std::size_t scales[] = {50, 150, 250};
    int recovered[3] = {0, 0, 0};
    int ordering_failures = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        BlockSpec spec;  // 3 x 5, weight 0.9, H = 0.8, n = 8192
        spec.seed = seed;
        const auto panel = generate_blocks(spec);
        for (int k = 0; k < 3; ++k) {
            const auto m = pairwise_matrix(panel, scales[k], DetrendMethod::dma());
            double within = 0.0, across = 0.0;
            int nw = 0, na = 0;
            for (std::size_t i = 0; i < m.size(); ++i)
                for (std::size_t j = i + 1; j < m.size(); ++j) {
                    if (i / 5 == j / 5) {
                        within += m(i, j);
                        ++nw;
                    } else {
                        across += m(i, j);
                        ++na;
                    }
                }
            ordering_failures += within / nw > across / na ? 0 : 1;
            const auto p = detect_communities(build_network(m, 0.8), 1.0, seed);
            bool exact = true;
            for (std::size_t i = 0; i < p.labels.size(); ++i) exact = exact && p.labels[i] == i / 5;
            recovered[k] += exact ? 1 : 0;
        }
    }
    const bool ok = *std::min_element(recovered, recovered + 3) >= 18 && ordering_failures == 0;
    return {ok, "exact recovery " + std::to_string(recovered[0]) + "/20, " + std::to_string(recovered[1]) + "/20, " +
                    std::to_string(recovered[2]) + "/20 at s = 50, 150, 250; within <= across in " +
                    std::to_string(ordering_failures) + " of 60 cases"};
}

// 6 -------------------------------------------------------------------------

Verdict era_dominance() {
    const auto grid = ScaleGrid::default_for(8192);
    int violations = 0;
    double min_gap = 1e300;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        BlockSpec strong, weak;
        strong.seed = weak.seed = seed;
        weak.common_weight = 0.6;
        const auto ps = generate_blocks(strong);
        const auto pw = generate_blocks(weak);
        for (const auto s : grid.scales()) {
            const double hi = average_weighted_degree(build_network(pairwise_matrix(ps, s, DetrendMethod::dma())));
            const double lo = average_weighted_degree(build_network(pairwise_matrix(pw, s, DetrendMethod::dma())));
            violations += hi > lo ? 0 : 1;
            min_gap = std::min(min_gap, hi - lo);
        }
    }
    return {violations == 0, "weight 0.9 above weight 0.6 at all " + std::to_string(grid.size()) +
                                 " scales for 20 seeds; violations " + std::to_string(violations) +
                                 ", smallest margin " + num(min_gap)};
}

// 7 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool same_tree(const fs::path& a, const fs::path& b) {
    std::vector<fs::path> fa, fb;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa.empty() || fa != fb) return false;
    return std::all_of(fa.begin(), fa.end(), [&](const fs::path& rel) { return slurp(a / rel) == slurp(b / rel); });
}

Verdict cli_determinism() {
    const fs::path root = fs::temp_directory_path() / "longmem_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    std::ostringstream sink;
    auto call = [&](std::vector<std::string> args) { return cli::run(args, sink, sink); };

    const std::string blocks = (root / "blocks").string();
    const std::string dated = (root / "dated").string();
    const std::vector<std::vector<std::string>> commands{
        {"synth", "--blocks", "3x5", "--n", "2600", "--out", blocks},
        {"synth", "--fgn", "--hurst", "0.7", "--n", "2600", "--count", "4", "--seed", "3", "--out", dated},
        {"hurst", "--input", blocks + "/panel.csv", "--crossover", "--method", "dfa1"},
        {"dcca", "--input", blocks + "/panel.csv", "--pair", "b1:m1,b2:m2", "--all"},
        {"network", "--input", dated + "/panel.csv", "--period", "2007:2012", "--period", "2011:2016", "--threshold", "0.1"},
        {"report", "--input", blocks + "/panel.csv"},
    };
    std::vector<std::string> failed;
    int k = 0;
    for (auto args : commands) {
        const std::string first = args[0] == "synth" ? args.back() : (root / ("run" + std::to_string(k))).string();
        if (args[0] != "synth") args.insert(args.end(), {"--out", first});
        const std::string second = (root / ("rerun" + std::to_string(k))).string();
        ++k;
        const bool ok = call(args) == 0 &&
                        call({"rerun", "--manifest", first + "/manifest.json", "--out", second, "--threads", "2"}) == 0 &&
                        same_tree(first, second);
        if (!ok) failed.push_back(args[0]);
    }
    fs::remove_all(root);
    std::string detail = std::to_string(commands.size() - failed.size()) + "/" + std::to_string(commands.size()) +
                         " runs reproduced byte-for-byte (synth x2, hurst, dcca, network, report)";
    for (const auto& f : failed) detail += "; differs: " + f;
    return {failed.empty(), detail};
}

// 8 -------------------------------------------------------------------------

Verdict degenerate() {
    std::vector<std::string> problems;

    const auto panel = generate_fgn_panel(2, {512, 0.6, 6, 1.0});
    const auto& x = panel.series()[0];
    const TimeSeries flat("flat", {x.dates().begin(), x.dates().end()}, std::vector<double>(x.size(), 2.5));
    auto names_flat = [&](auto&& call) {
        try {
            call();
        } catch (const DegenerateSeriesError& e) {
            return e.ids() == std::vector<std::string>{"flat"} && std::string(e.what()).find("flat") != std::string::npos;
        }
        return false;
    };
    if (!names_flat([&] { (void)rho_dcca(x, flat, 20, DetrendMethod::dma()); }))
        problems.push_back("rho_dcca did not name the constant series");
    if (!names_flat([&] { (void)pairwise_matrix(RatePanel({x, flat}), 20, DetrendMethod::dfa(1)); }))
        problems.push_back("pairwise_matrix did not name the constant series");

    auto f = curve({10, 20, 40, 80, 160}, [](double s) { return std::pow(s, 0.6); });
    f.points[2].value = 0.0;
    const auto e = fit_hurst(f);
    if (e.n_excluded_zero != 1 || e.n_points != 4 || std::abs(e.hurst - 0.6) > 1e-12)
        problems.push_back("zero F point was not excluded from the fit");
    bool all_zero_rejected = false;
    try {
        (void)fit_hurst(curve({10, 20, 40, 80}, [](double) { return 0.0; }));
    } catch (const AnalysisError&) {
        all_zero_rejected = true;
    }
    if (!all_zero_rejected) problems.push_back("all-zero F was fitted");

    std::vector<double> line(1000);
    for (std::size_t i = 0; i < line.size(); ++i) line[i] = 5.0 + 0.125 * static_cast<double>(i);
    double peak = 0.0;
    for (const auto& p : fluctuation(std::span<const double>(line), ScaleGrid({10, 25, 100, 250}), DetrendMethod::dfa(1)).points)
        peak = std::max(peak, p.value);
    if (peak > 1e-12 * line.back()) problems.push_back("linear profile gave F = " + num(peak, 3));

    std::string detail = problems.empty() ? "constant series named in both paths; zero F excluded; linear profile max F = " +
                                                num(peak, 3)
                                          : problems.front();
    for (std::size_t i = 1; i < problems.size(); ++i) detail += "; " + problems[i];
    return {problems.empty(), detail};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Verdict (*check)();
    };
    const Criterion criteria[] = {
        {"hurst recovery", hurst_recovery},
        {"rho bounds and identities", rho_identities},
        {"brute-force equivalence", brute_force},
        {"crossover detection", crossover},
        {"segmentation recovery", segmentation},
        {"era comparison", era_dominance},
        {"cli determinism", cli_determinism},
        {"degenerate handling", degenerate},
    };
    int failures = 0;
    int index = 1;
    for (const auto& c : criteria) {
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS" : "FAIL") << "  [" << index++ << "] " << c.name << ": " << v.detail << std::endl;
    }
    std::cout << (std::size(criteria) - failures) << "/" << std::size(criteria) << " criteria passed\n";
    return failures == 0 ? 0 : 1;
}
