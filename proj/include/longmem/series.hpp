#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace longmem {

/// Calendar date of one observation. Scale arithmetic never looks at the
/// calendar; it counts observations (trading days).
using Date = std::chrono::sys_days;

/// Parses an ISO `YYYY-MM-DD` date. Returns nullopt for anything else,
/// including impossible dates such as 2021-02-30.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

/// A dated observation vector.
///
/// Dates are strictly increasing, there are at least two observations and
/// every value is finite. The constructor enforces this and throws DataError.
class TimeSeries {
public:
    TimeSeries(std::string id, std::vector<Date> dates, std::vector<double> values);

    const std::string& id() const noexcept { return id_; }
    std::span<const Date> dates() const noexcept { return dates_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Same dates, values replaced (used for affine transforms in tests and
    /// for restricting to sub-periods).
    TimeSeries with_values(std::vector<double> values) const;

private:
    std::string id_;
    std::vector<Date> dates_;
    std::vector<double> values_;
};

/// A collection of series over a shared calendar.
///
/// `date_index` is the master calendar (the CSV row dates); each member
/// series holds only the dates on which it was observed. After `align` every
/// member's dates equal `date_index`.
class RatePanel {
public:
    RatePanel() = default;
    /// Calendar is the union of the members' dates.
    explicit RatePanel(std::vector<TimeSeries> series);
    RatePanel(std::vector<TimeSeries> series, std::vector<Date> date_index);

    std::span<const TimeSeries> series() const noexcept { return series_; }
    std::span<const Date> date_index() const noexcept { return date_index_; }
    std::size_t size() const noexcept { return series_.size(); }
    bool empty() const noexcept { return series_.empty(); }
    bool is_aligned() const noexcept;

    const TimeSeries* find(std::string_view id) const noexcept;
    const TimeSeries& at(std::string_view id) const;
    std::vector<std::string> ids() const;

private:
    std::vector<TimeSeries> series_;
    std::vector<Date> date_index_;
};

struct IngestionConfig {
    char delimiter = ',';
};

struct LoadedPanel {
    RatePanel panel;
    /// 1-based line numbers of rows dropped because the date did not parse.
    std::vector<std::size_t> rejected_lines;
};

/// Reads a delimited table: header row of series ids whose first cell names
/// the date column, ISO dates in the first column, decimal numbers or empty
/// cells after it. Empty cells are missing observations.
LoadedPanel read_panel(std::istream& in, const IngestionConfig& config = {});
LoadedPanel load_panel(const std::filesystem::path& path, const IngestionConfig& config = {});

/// Writes a panel in the same schema `read_panel` accepts. Values use the
/// shortest round-trip decimal form, so a write/read cycle is lossless.
void write_panel(std::ostream& out, const RatePanel& panel, char delimiter = ',');

struct AlignPolicy {
    enum class Kind { intersect, forward_fill };
    Kind kind = Kind::intersect;
    std::size_t max_gap = 0;

    static AlignPolicy intersect() { return {}; }
    static AlignPolicy forward_fill(std::size_t max_gap) { return {Kind::forward_fill, max_gap}; }
};

/// Brings every member onto one shared calendar.
///
/// intersect keeps the dates on which every series is observed. forward_fill
/// first fills runs of at most `max_gap` missing dates with the previous
/// observation, then intersects. A series that is missing the first calendar
/// dates has nothing to fill from, and forward_fill rejects it.
RatePanel align(const RatePanel& panel, AlignPolicy policy = AlignPolicy::intersect());

/// Absolute first differences |R(i+1) - R(i)|; length N-1, all values >= 0.
class IncrementSeries {
public:
    IncrementSeries(std::string parent_id, std::vector<double> values);

    const std::string& parent_id() const noexcept { return parent_id_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    std::string parent_id_;
    std::vector<double> values_;
};

IncrementSeries increments(const TimeSeries& series);

/// Mean-centred cumulative sum Y(t) = sum_{i<=t} (X(i) - <X>).
///
/// The last element telescopes to zero; construction checks it against
/// 1e-9 * sum|X|.
class Profile {
public:
    /// Builds the profile of an arbitrary real fluctuation sequence (length
    /// >= 2). Used for absolute increments and for noise that is already a
    /// stationary increment process, such as fractional Gaussian noise.
    static Profile from_fluctuations(std::string parent_id, std::span<const double> x);

    const std::string& parent_id() const noexcept { return parent_id_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    Profile(std::string parent_id, std::vector<double> values)
        : parent_id_(std::move(parent_id)), values_(std::move(values)) {}

    std::string parent_id_;
    std::vector<double> values_;
};

Profile profile(const IncrementSeries& x);

/// profile(increments(series)).
Profile series_profile(const TimeSeries& series);

}  // namespace longmem
