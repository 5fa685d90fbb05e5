#include "longmem/series.hpp"

#include "longmem/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_set>

namespace longmem {

using detail::format_double;
using detail::parse_double;
using detail::split;
using detail::trim;

std::optional<Date> parse_date(std::string_view text) {
    text = trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int v = 0;
        const char* b = text.data() + pos;
        const auto res = std::from_chars(b, b + len, v);
        if (res.ec != std::errc{} || res.ptr != b + len) return std::nullopt;
        return v;
    };
    const auto y = field(0, 4);
    const auto m = field(5, 2);
    const auto d = field(8, 2);
    if (!y || !m || !d || *m < 1 || *d < 1) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{*y},
                                          std::chrono::month{static_cast<unsigned>(*m)},
                                          std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

// ---------------------------------------------------------------------------
// TimeSeries / RatePanel

TimeSeries::TimeSeries(std::string id, std::vector<Date> dates, std::vector<double> values)
    : id_(std::move(id)), dates_(std::move(dates)), values_(std::move(values)) {
    if (dates_.size() != values_.size())
        throw DataError("series " + id_ + ": dates and values differ in length");
    if (values_.size() < 2)
        throw DataError("series " + id_ + ": length " + std::to_string(values_.size()) + " < 2");
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (dates_[i] <= dates_[i - 1])
            throw DataError("series " + id_ + ": dates not strictly increasing at " +
                            format_date(dates_[i]));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]))
            throw DataError("series " + id_ + ": non-finite value at " + format_date(dates_[i]));
    }
}

TimeSeries TimeSeries::with_values(std::vector<double> values) const {
    return TimeSeries(id_, dates_, std::move(values));
}

namespace {

std::vector<Date> union_of_dates(std::span<const TimeSeries> series) {
    std::set<Date> all;
    for (const auto& s : series) all.insert(s.dates().begin(), s.dates().end());
    return {all.begin(), all.end()};
}

}  // namespace

RatePanel::RatePanel(std::vector<TimeSeries> series)
    : RatePanel(series, union_of_dates(series)) {}

RatePanel::RatePanel(std::vector<TimeSeries> series, std::vector<Date> date_index)
    : series_(std::move(series)), date_index_(std::move(date_index)) {
    if (!std::is_sorted(date_index_.begin(), date_index_.end()) ||
        std::adjacent_find(date_index_.begin(), date_index_.end()) != date_index_.end())
        throw DataError("panel calendar must be strictly increasing");
    std::unordered_set<std::string> seen;
    for (const auto& s : series_) {
        if (!seen.insert(s.id()).second) throw DataError("duplicate series id: " + s.id());
        if (!std::includes(date_index_.begin(), date_index_.end(), s.dates().begin(),
                           s.dates().end()))
            throw DataError("series " + s.id() + " has dates outside the panel calendar");
    }
}

bool RatePanel::is_aligned() const noexcept {
    return std::all_of(series_.begin(), series_.end(), [&](const TimeSeries& s) {
        return std::equal(s.dates().begin(), s.dates().end(), date_index_.begin(),
                          date_index_.end());
    });
}

const TimeSeries* RatePanel::find(std::string_view id) const noexcept {
    for (const auto& s : series_)
        if (s.id() == id) return &s;
    return nullptr;
}

const TimeSeries& RatePanel::at(std::string_view id) const {
    if (const auto* s = find(id)) return *s;
    throw ValidationError("unknown series id: " + std::string(id));
}

std::vector<std::string> RatePanel::ids() const {
    std::vector<std::string> out;
    out.reserve(series_.size());
    for (const auto& s : series_) out.push_back(s.id());
    return out;
}

// ---------------------------------------------------------------------------
// CSV ingestion

LoadedPanel read_panel(std::istream& in, const IngestionConfig& config) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty input: missing header row");
    ++line_no;

    const auto header = split(line, config.delimiter);
    if (header.size() < 2) throw DataError("no numeric columns: header has only a date column");

    std::vector<std::string> labels;
    std::unordered_set<std::string> seen;
    for (std::size_t c = 1; c < header.size(); ++c) {
        std::string label(trim(header[c]));
        if (label.empty()) throw DataError("empty column label at position " + std::to_string(c + 1));
        if (!seen.insert(label).second) throw DataError("duplicate column label: " + label);
        labels.push_back(std::move(label));
    }

    struct Row {
        Date date;
        std::vector<std::optional<double>> cells;
    };
    std::map<Date, Row> rows;
    std::vector<std::size_t> rejected;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line, config.delimiter);
        const auto date = parse_date(cells[0]);
        if (!date) {
            rejected.push_back(line_no);
            continue;
        }
        if (cells.size() > header.size())
            throw DataError("line " + std::to_string(line_no) + ": more cells than header columns");

        Row row{*date, std::vector<std::optional<double>>(labels.size())};
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const auto text = trim(cells[c]);
            if (text.empty()) continue;
            const auto v = parse_double(text);
            if (!v || !std::isfinite(*v))
                throw DataError("line " + std::to_string(line_no) + ", column " + labels[c - 1] +
                                ": not a finite number: '" + std::string(text) + "'");
            row.cells[c - 1] = *v;
        }
        if (!rows.emplace(*date, std::move(row)).second)
            throw DataError("duplicate date " + format_date(*date) + " at line " +
                            std::to_string(line_no));
    }

    std::vector<Date> calendar;
    calendar.reserve(rows.size());
    for (const auto& [d, _] : rows) calendar.push_back(d);

    std::vector<TimeSeries> series;
    series.reserve(labels.size());
    for (std::size_t c = 0; c < labels.size(); ++c) {
        std::vector<Date> dates;
        std::vector<double> values;
        for (const auto& [d, row] : rows) {
            if (row.cells[c]) {
                dates.push_back(d);
                values.push_back(*row.cells[c]);
            }
        }
        series.emplace_back(labels[c], std::move(dates), std::move(values));
    }
    return {RatePanel(std::move(series), std::move(calendar)), std::move(rejected)};
}

LoadedPanel load_panel(const std::filesystem::path& path, const IngestionConfig& config) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    return read_panel(in, config);
}

void write_panel(std::ostream& out, const RatePanel& panel, char delimiter) {
    out << "date";
    for (const auto& s : panel.series()) out << delimiter << s.id();
    out << '\n';

    std::vector<std::size_t> cursor(panel.size(), 0);
    for (const Date d : panel.date_index()) {
        out << format_date(d);
        for (std::size_t k = 0; k < panel.size(); ++k) {
            const auto& s = panel.series()[k];
            out << delimiter;
            if (cursor[k] < s.size() && s.dates()[cursor[k]] == d) {
                out << format_double(s.values()[cursor[k]]);
                ++cursor[k];
            }
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Alignment

namespace {

// Values of `s` laid out on `calendar`; nullopt where unobserved.
std::vector<std::optional<double>> on_calendar(const TimeSeries& s, std::span<const Date> calendar) {
    std::vector<std::optional<double>> out(calendar.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < calendar.size() && j < s.size(); ++i) {
        if (s.dates()[j] == calendar[i]) out[i] = s.values()[j++];
    }
    return out;
}

void forward_fill_in_place(std::vector<std::optional<double>>& cells, std::size_t max_gap,
                           const std::string& id) {
    if (!cells.empty() && !cells.front())
        throw DataError("series " + id +
                        ": missing values at the start of the calendar cannot be forward-filled");
    std::size_t i = 0;
    while (i < cells.size()) {
        if (cells[i]) {
            ++i;
            continue;
        }
        std::size_t run_end = i;
        while (run_end < cells.size() && !cells[run_end]) ++run_end;
        // Runs reaching the end of the calendar are treated like interior gaps.
        if (run_end - i <= max_gap) {
            const double fill = *cells[i - 1];
            for (std::size_t k = i; k < run_end; ++k) cells[k] = fill;
        }
        i = run_end;
    }
}

}  // namespace

RatePanel align(const RatePanel& panel, AlignPolicy policy) {
    if (panel.empty()) throw DataError("cannot align an empty panel");

    const auto calendar = panel.date_index();
    std::vector<std::vector<std::optional<double>>> grid;
    grid.reserve(panel.size());
    for (const auto& s : panel.series()) {
        grid.push_back(on_calendar(s, calendar));
        if (policy.kind == AlignPolicy::Kind::forward_fill)
            forward_fill_in_place(grid.back(), policy.max_gap, s.id());
    }

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < calendar.size(); ++i) {
        const bool complete =
            std::all_of(grid.begin(), grid.end(), [i](const auto& col) { return col[i].has_value(); });
        if (complete) keep.push_back(i);
    }
    if (keep.size() < 2)
        throw DataError("aligned panel has " + std::to_string(keep.size()) +
                        " shared dates; at least 2 required");

    std::vector<Date> shared;
    shared.reserve(keep.size());
    for (const auto i : keep) shared.push_back(calendar[i]);

    std::vector<TimeSeries> out;
    out.reserve(panel.size());
    for (std::size_t k = 0; k < panel.size(); ++k) {
        std::vector<double> values;
        values.reserve(keep.size());
        for (const auto i : keep) values.push_back(*grid[k][i]);
        out.emplace_back(panel.series()[k].id(), shared, std::move(values));
    }
    return RatePanel(std::move(out), std::move(shared));
}

// ---------------------------------------------------------------------------
// Increments and profile

IncrementSeries::IncrementSeries(std::string parent_id, std::vector<double> values)
    : parent_id_(std::move(parent_id)), values_(std::move(values)) {
    for (const double v : values_) {
        if (!(v >= 0.0)) throw DataError("increment series " + parent_id_ + " has a negative value");
    }
}

IncrementSeries increments(const TimeSeries& series) {
    const auto v = series.values();
    std::vector<double> out(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) out[i] = std::abs(v[i + 1] - v[i]);
    return IncrementSeries(series.id(), std::move(out));
}

Profile Profile::from_fluctuations(std::string parent_id, std::span<const double> x) {
    if (x.size() < 2)
        throw DataError("profile of " + parent_id + " needs at least 2 fluctuation values");
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    std::vector<double> y(x.size());
    double run = 0.0;
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        run += x[i] - mean;
        abs_sum += std::abs(x[i]);
        y[i] = run;
    }
    if (std::abs(y.back()) > 1e-9 * abs_sum)
        throw AnalysisError("profile of " + parent_id + " does not telescope to zero");
    return Profile(std::move(parent_id), std::move(y));
}

Profile profile(const IncrementSeries& x) {
    return Profile::from_fluctuations(x.parent_id(), x.values());
}

Profile series_profile(const TimeSeries& series) { return profile(increments(series)); }

}  // namespace longmem
