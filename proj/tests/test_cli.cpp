#include "cli.hpp"

#include "doctest.h"

#include <filesystem>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using longmem::cli::run;

namespace {

struct Sandbox {
    fs::path root;
    explicit Sandbox(const std::string& name) : root(fs::temp_directory_path() / ("longmem_cli_" + name)) {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Sandbox() { fs::remove_all(root); }
    std::string operator/(const std::string& rel) const { return (root / rel).string(); }
};

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

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
    if (fa != fb || fa.empty()) return false;
    for (const auto& rel : fa)
        if (slurp(a / rel) != slurp(b / rel)) return false;
    return true;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream s(text);
    for (std::string l; std::getline(s, l);) out.push_back(l);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
}

std::string full_precision(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

std::string blocks_panel(const Sandbox& box) {
    REQUIRE(call({"synth", "--blocks", "3x5", "--n", "2048", "--out", box / "syn"}).code == 0);
    return box / "syn/panel.csv";
}

}  // namespace

TEST_CASE("help and parse errors") {
    CHECK(call({"--help"}).code == 0);
    CHECK(call({"hurst", "--help"}).code == 0);
    CHECK(call({}).code == 1);
    CHECK(call({"frobnicate"}).code == 1);
    CHECK(call({"hurst", "--out", "x"}).code == 1);  // --input missing
}

TEST_CASE("synth is deterministic and announces its seed") {
    Sandbox box("synth");
    const auto a = call({"synth", "--fgn", "--hurst", "0.7", "--n", "512", "--count", "3", "--out", box / "a"});
    const auto b = call({"synth", "--fgn", "--hurst", "0.7", "--n", "512", "--count", "3", "--out", box / "b"});
    REQUIRE(a.code == 0);
    CHECK(a.out.find("seed: 1 (default)") != std::string::npos);
    CHECK(same_tree(box.root / "a", box.root / "b"));

    const auto c = call({"synth", "--fgn", "--hurst", "0.7", "--n", "512", "--count", "3", "--seed", "2", "--out",
                         box / "c"});
    CHECK(c.out.find("seed: 2\n") != std::string::npos);
    CHECK(slurp(box.root / "a/panel.csv") != slurp(box.root / "c/panel.csv"));

    const auto rows = lines(slurp(box.root / "a/panel.csv"));
    CHECK(rows.size() == 514);
    CHECK(rows[0] == "date,fgn1,fgn2,fgn3");
}

TEST_CASE("block panel has fifteen columns and membership") {
    Sandbox box("blocks");
    blocks_panel(box);
    const auto header = lines(slurp(box.root / "syn/panel.csv"))[0];
    CHECK(std::count(header.begin(), header.end(), ',') == 15);
    const auto members = lines(slurp(box.root / "syn/membership.csv"));
    REQUIRE(members.size() == 16);
    CHECK(members[1] == "b1:m1,1");
    CHECK(members[15] == "b3:m5,3");
}

TEST_CASE("synth rejects bad configurations without writing") {
    Sandbox box("synth_bad");
    CHECK(call({"synth", "--out", box / "o"}).code == 1);
    CHECK(call({"synth", "--fgn", "--blocks", "3x5", "--out", box / "o"}).code == 1);
    CHECK(call({"synth", "--fgn", "--hurst", "1.2", "--out", box / "o"}).code == 1);
    CHECK(call({"synth", "--blocks", "3by5", "--out", box / "o"}).code == 1);
    CHECK(call({"synth", "--blocks", "3x5", "--weight", "1.5", "--out", box / "o"}).code == 1);
    CHECK_FALSE(fs::exists(box.root / "o"));
}

TEST_CASE("network recovers three communities from the block panel") {
    Sandbox box("network");
    const auto panel = blocks_panel(box);
    const auto r = call({"network", "--input", panel, "--scale", "50", "--out", box / "net"});
    REQUIRE(r.code == 0);
    const auto part = lines(slurp(box.root / "net/partition_full_s50.csv"));
    REQUIRE(part.size() == 16);
    CHECK(part[0] == "id,community");
    for (std::size_t i = 1; i < part.size(); ++i)
        CHECK(part[i].substr(part[i].find(',') + 1) == std::to_string((i - 1) / 5));
    CHECK(fs::exists(box.root / "net/network_full_s50.graphml"));
    CHECK(fs::exists(box.root / "net/network_full_s50.dot"));
    CHECK(lines(slurp(box.root / "net/awd.csv"))[0] == "period,s,avg_weighted_degree,edges");

    const auto csv_only = call({"network", "--input", panel, "--scale", "50", "--format", "csv", "--out", box / "c"});
    REQUIRE(csv_only.code == 0);
    CHECK_FALSE(fs::exists(box.root / "c/network_full_s50.graphml"));
    CHECK(fs::exists(box.root / "c/partition_full_s50.csv"));
}

TEST_CASE("invalid network parameters exit 1 and write nothing") {
    Sandbox box("network_bad");
    const auto panel = blocks_panel(box);
    const auto r = call({"network", "--input", panel, "--threshold", "1.01", "--out", box / "o"});
    CHECK(r.code == 1);
    CHECK(r.err.find("threshold") != std::string::npos);
    CHECK(call({"network", "--input", panel, "--threshold", "0", "--out", box / "o"}).code == 1);
    CHECK(call({"network", "--input", panel, "--period", "2012:2007", "--out", box / "o"}).code == 1);
    CHECK(call({"network", "--input", panel, "--method", "dfa0", "--out", box / "o"}).code == 1);
    CHECK(call({"network", "--input", panel, "--format", "png", "--out", box / "o"}).code == 1);
    CHECK_FALSE(fs::exists(box.root / "o"));
}

TEST_CASE("networks with only negative edges fall back to singletons") {
    Sandbox box("negative");
    std::string text = "date,a,b\n";
    double a = 3.0, b = 3.0;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u;
    for (int d = 0; d < 400; ++d) {
        // Step sizes sum to a constant, so the absolute increments are perfectly anticorrelated.
        const double x = u(rng);
        a += 0.01 * x;
        b += 0.01 * (1.0 - x);
        const int day = d % 28 + 1, month = d / 28 % 12 + 1, year = 2000 + d / 336;
        char date[16];
        std::snprintf(date, sizeof date, "%04d-%02d-%02d", year, month, day);
        text += std::string(date) + "," + full_precision(a) + "," + full_precision(b) + "\n";
    }
    write_text(box / "neg.csv", text);
    const auto r = call({"network", "--input", box / "neg.csv", "--scale", "20", "--out", box / "o"});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("only negative edges") != std::string::npos);
    CHECK(slurp(box.root / "o/partition_full_s20.csv") == "id,community\na,0\nb,1\n");
}

TEST_CASE("missing input exits nonzero without outputs") {
    Sandbox box("missing");
    const auto r = call({"hurst", "--input", box / "absent.csv", "--out", box / "o"});
    CHECK(r.code == 1);
    CHECK(r.err.find("absent.csv") != std::string::npos);
    CHECK_FALSE(fs::exists(box.root / "o"));
}

TEST_CASE("a series paired with itself has rho one at every scale") {
    Sandbox box("self");
    const auto panel = blocks_panel(box);
    const auto r = call({"dcca", "--input", panel, "--pair", "b2:m3,b2:m3", "--out", box / "d"});
    REQUIRE(r.code == 0);
    const auto rows = lines(slurp(box.root / "d/rho_b2_m3__b2_m3.csv"));
    REQUIRE(rows.size() > 10);
    CHECK(rows[0] == "s,rho");
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].substr(rows[i].find(',') + 1) == "1");

    const auto unknown = call({"dcca", "--input", panel, "--pair", "b2:m3,zz", "--out", box / "u"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("zz") != std::string::npos);
    CHECK(call({"dcca", "--input", panel, "--out", box / "u"}).code == 1);
    CHECK_FALSE(fs::exists(box.root / "u"));
}

TEST_CASE("degenerate series") {
    Sandbox box("degenerate");
    REQUIRE(call({"synth", "--fgn", "--count", "3", "--n", "1024", "--out", box / "syn"}).code == 0);
    // Replace the second column by a constant.
    auto rows = lines(slurp(box.root / "syn/panel.csv"));
    std::string text;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto cells = rows[i];
        const auto a = cells.find(',', cells.find(',') + 1);
        const auto b = cells.find(',', a + 1);
        text += cells.substr(0, a + 1) + (i == 0 ? "flat" : "3") + cells.substr(b) + "\n";
    }
    write_text(box / "flat.csv", text);

    const auto all = call({"dcca", "--input", box / "flat.csv", "--all", "--out", box / "m"});
    CHECK(all.code == 2);
    CHECK(all.err.find("flat") != std::string::npos);
    CHECK_FALSE(fs::exists(box.root / "m"));

    const auto h = call({"hurst", "--input", box / "flat.csv", "--out", box / "h"});
    CHECK(h.code == 0);
    CHECK(h.err.find("flat") != std::string::npos);
    CHECK(lines(slurp(box.root / "h/hurst.csv")).size() == 3);
    CHECK(slurp(box.root / "h/failures.csv").find("flat,") != std::string::npos);

    const auto strict = call({"hurst", "--input", box / "flat.csv", "--strict", "--out", box / "s"});
    CHECK(strict.code == 3);
    CHECK(fs::exists(box.root / "s/hurst.csv"));
}

TEST_CASE("every series failing is a runtime error") {
    Sandbox box("all_fail");
    std::string text = "date,a,b\n";
    for (int d = 1; d <= 28; ++d) text += "2020-02-" + std::string(d < 10 ? "0" : "") + std::to_string(d) + ",1,2\n";
    write_text(box / "flat.csv", text);
    CHECK(call({"hurst", "--input", box / "flat.csv", "--scales", "4,5,6", "--out", box / "o"}).code == 2);
    CHECK_FALSE(fs::exists(box.root / "o"));
}

TEST_CASE("rerun from a manifest is byte-identical") {
    Sandbox box("rerun");
    const auto panel = blocks_panel(box);
    const std::vector<std::vector<std::string>> commands{
        {"hurst", "--input", panel, "--crossover", "--method", "dfa1"},
        {"dcca", "--input", panel, "--pair", "b1:m1,b2:m1", "--all", "--scale", "60"},
        {"network", "--input", panel, "--scale", "50,150"},
        {"report", "--input", panel, "--scale", "100"},
        {"synth", "--fgn", "--n", "700", "--count", "2", "--seed", "9"},
    };
    int k = 0;
    for (auto args : commands) {
        const std::string first = box / ("first" + std::to_string(k));
        const std::string second = box / ("second" + std::to_string(k));
        ++k;
        args.insert(args.end(), {"--out", first});
        INFO(args[0]);
        REQUIRE(call(args).code == 0);
        REQUIRE(call({"rerun", "--manifest", first + "/manifest.json", "--out", second, "--threads", "1"}).code == 0);
        CHECK(same_tree(first, second));
    }

    // A changed input is refused.
    write_text(panel, slurp(panel) + "\n");
    CHECK(call({"rerun", "--manifest", box / "first0/manifest.json", "--out", box / "again"}).code == 1);
    CHECK(call({"rerun", "--manifest", box / "nothing.json", "--out", box / "again"}).code == 1);
}

TEST_CASE("thread count does not change outputs") {
    Sandbox box("threads");
    const auto panel = blocks_panel(box);
    REQUIRE(call({"report", "--input", panel, "--threads", "1", "--out", box / "one"}).code == 0);
    REQUIRE(call({"report", "--input", panel, "--threads", "4", "--out", box / "four"}).code == 0);
    CHECK(same_tree(box.root / "one", box.root / "four"));
}
