#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace longmem {

/// Bad arguments or configuration: raised before any computation starts.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data (CSV content, date sets, lengths).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a result for the given data.
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One or more series have a vanishing fluctuation function, so ratios such
/// as rho_DCCA are undefined. Carries the offending ids.
class DegenerateSeriesError : public AnalysisError {
public:
    explicit DegenerateSeriesError(std::vector<std::string> ids)
        : AnalysisError(make_message(ids)), ids_(std::move(ids)) {}

    const std::vector<std::string>& ids() const noexcept { return ids_; }

private:
    static std::string make_message(const std::vector<std::string>& ids) {
        std::string msg = "degenerate series (zero detrended fluctuation):";
        for (const auto& id : ids) {
            msg += ' ';
            msg += id;
        }
        return msg;
    }

    std::vector<std::string> ids_;
};

}  // namespace longmem
