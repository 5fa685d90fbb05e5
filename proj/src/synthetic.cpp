#include "longmem/synthetic.hpp"

#include "longmem/error.hpp"
#include "longmem/parallel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <optional>
#include <random>

namespace longmem {

namespace {

void validate(const FgnSpec& spec) {
    if (!(spec.hurst > 0.0 && spec.hurst < 1.0))
        throw ValidationError("Hurst exponent must lie in (0, 1), got " + std::to_string(spec.hurst));
    if (spec.n < 16) throw ValidationError("fGn length must be at least 16");
    if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma))
        throw ValidationError("fGn sigma must be positive");
}

// FFTW planning is not thread-safe; execution on private buffers is, but the
// plans here are single-use so the whole transform runs under the lock.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

std::vector<std::complex<double>> forward_dft(std::vector<std::complex<double>> data) {
    std::vector<std::complex<double>> out(data.size());
    std::lock_guard lock(fftw_mutex());
    auto* in_ptr = reinterpret_cast<fftw_complex*>(data.data());
    auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(data.size()), in_ptr, out_ptr, FFTW_FORWARD,
                                      FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    return out;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::vector<double> hosking(const FgnSpec& spec, std::mt19937_64& rng) {
    const auto gamma = fgn_autocovariance(spec.hurst, spec.sigma, spec.n);
    std::normal_distribution<double> normal;
    std::vector<double> x(spec.n);
    std::vector<double> phi(spec.n, 0.0);
    std::vector<double> prev(spec.n, 0.0);
    double v = gamma[0];
    x[0] = std::sqrt(v) * normal(rng);
    for (std::size_t t = 1; t < spec.n; ++t) {
        double num = gamma[t];
        for (std::size_t j = 1; j < t; ++j) num -= prev[j] * gamma[t - j];
        const double ptt = num / v;
        phi[t] = ptt;
        for (std::size_t j = 1; j < t; ++j) phi[j] = prev[j] - ptt * prev[t - j];
        v *= 1.0 - ptt * ptt;
        double mean = 0.0;
        for (std::size_t j = 1; j <= t; ++j) mean += phi[j] * x[t - j];
        x[t] = mean + std::sqrt(std::max(v, 0.0)) * normal(rng);
        std::copy(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(t) + 1, prev.begin());
    }
    return x;
}

// Returns an empty vector when the embedding is not non-negative definite.
std::vector<double> circulant(const FgnSpec& spec, std::mt19937_64& rng) {
    const std::size_t half = next_pow2(spec.n);
    const std::size_t m = 2 * half;
    const auto gamma = fgn_autocovariance(spec.hurst, spec.sigma, half);

    std::vector<std::complex<double>> row(m);
    for (std::size_t k = 0; k <= half; ++k) row[k] = gamma[k];
    for (std::size_t k = 1; k < half; ++k) row[m - k] = gamma[k];
    const auto spectrum = forward_dft(std::move(row));

    std::vector<double> lambda(m);
    double lambda_max = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        lambda[k] = spectrum[k].real();
        lambda_max = std::max(lambda_max, lambda[k]);
    }
    for (auto& l : lambda) {
        if (l < -1e-10 * lambda_max) return {};
        l = std::max(l, 0.0);
    }

    std::normal_distribution<double> normal;
    const auto md = static_cast<double>(m);
    std::vector<std::complex<double>> w(m);
    w[0] = std::sqrt(lambda[0] / md) * normal(rng);
    w[half] = std::sqrt(lambda[half] / md) * normal(rng);
    for (std::size_t k = 1; k < half; ++k) {
        const double scale = std::sqrt(lambda[k] / (2.0 * md));
        const double re = normal(rng);
        const double im = normal(rng);
        w[k] = {scale * re, scale * im};
        w[m - k] = std::conj(w[k]);
    }
    const auto z = forward_dft(std::move(w));

    std::vector<double> x(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) x[i] = z[i].real();
    return x;
}

}  // namespace

std::vector<double> fgn_autocovariance(double hurst, double sigma, std::size_t max_lag) {
    const double two_h = 2.0 * hurst;
    const double var = sigma * sigma;
    std::vector<double> out(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        const auto kd = static_cast<double>(k);
        out[k] = 0.5 * var *
                 (std::pow(kd + 1.0, two_h) - 2.0 * std::pow(kd, two_h) + std::pow(std::abs(kd - 1.0), two_h));
    }
    return out;
}

std::vector<double> fgn_values(const FgnSpec& spec, FgnMethod method) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    if (method == FgnMethod::circulant) {
        auto x = circulant(spec, rng);
        if (!x.empty()) return x;
        rng.seed(spec.seed);
    }
    return hosking(spec, rng);
}

Date synthetic_start_date() {
    using namespace std::chrono;
    return sys_days{year{2007} / January / 4};
}

std::vector<Date> business_days(Date start, std::size_t count) {
    using std::chrono::Saturday;
    using std::chrono::Sunday;
    using std::chrono::weekday;
    std::vector<Date> out;
    out.reserve(count);
    Date d = start;
    while (out.size() < count) {
        const weekday wd{d};
        if (wd != Saturday && wd != Sunday) out.push_back(d);
        d += std::chrono::days{1};
    }
    return out;
}

TimeSeries generate_fgn(const FgnSpec& spec, std::string id) {
    auto values = fgn_values(spec);
    auto dates = business_days(synthetic_start_date(), values.size());
    return TimeSeries(std::move(id), std::move(dates), std::move(values));
}

TimeSeries rate_path(std::string id, std::span<const double> noise, double sigma,
                     std::uint64_t sign_seed, const RatePathSpec& shape) {
    if (noise.empty()) throw ValidationError("rate path needs at least one increment");
    if (!(shape.step > 0.0)) throw ValidationError("rate path step must be positive");
    const double lowest = *std::min_element(noise.begin(), noise.end());
    const double offset = std::max(6.0 * sigma, sigma - lowest);

    std::mt19937_64 rng(sign_seed);
    std::bernoulli_distribution coin(0.5);
    std::vector<double> level(noise.size() + 1);
    level[0] = shape.start_level;
    for (std::size_t i = 0; i < noise.size(); ++i) {
        const double magnitude = shape.step * (offset + noise[i]);
        level[i + 1] = level[i] + (coin(rng) ? magnitude : -magnitude);
    }
    auto dates = business_days(synthetic_start_date(), level.size());
    return TimeSeries(std::move(id), std::move(dates), std::move(level));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

RatePanel generate_fgn_panel(std::size_t count, const FgnSpec& spec, const std::string& prefix) {
    validate(spec);
    if (count == 0) throw ValidationError("fGn panel needs at least one series");
    const std::size_t width = std::to_string(count).size();
    std::vector<std::optional<TimeSeries>> members(count);
    parallel_for(count, [&](std::size_t i) {
        FgnSpec member = spec;
        member.seed = derive_seed(spec.seed, 2 * i);
        const auto noise = fgn_values(member);
        std::string index = std::to_string(i + 1);
        index.insert(0, width - index.size(), '0');
        members[i] = rate_path(prefix + index, noise, spec.sigma, derive_seed(spec.seed, 2 * i + 1));
    });
    std::vector<TimeSeries> out;
    out.reserve(count);
    for (auto& m : members) out.push_back(std::move(*m));
    return RatePanel(std::move(out));
}

void validate(const BlockSpec& spec) {
    if (spec.n_blocks < 2) throw ValidationError("block ensemble needs at least 2 blocks");
    if (spec.block_size < 2) throw ValidationError("block size must be at least 2");
    if (!(spec.common_weight >= 0.0 && spec.common_weight <= 1.0))
        throw ValidationError("common weight must lie in [0, 1]");
    validate(FgnSpec{spec.n, spec.hurst, spec.seed, 1.0});
}

std::string block_member_id(const BlockSpec& spec, std::size_t block, std::size_t member) {
    auto padded = [](std::size_t v, std::size_t width) {
        std::string s = std::to_string(v);
        s.insert(0, width - std::min(width, s.size()), '0');
        return s;
    };
    return "b" + padded(block + 1, std::to_string(spec.n_blocks).size()) + ":m" +
           padded(member + 1, std::to_string(spec.block_size).size());
}

std::vector<std::vector<std::string>> block_membership(const BlockSpec& spec) {
    std::vector<std::vector<std::string>> out(spec.n_blocks);
    for (std::size_t b = 0; b < spec.n_blocks; ++b)
        for (std::size_t m = 0; m < spec.block_size; ++m) out[b].push_back(block_member_id(spec, b, m));
    return out;
}

RatePanel generate_blocks(const BlockSpec& spec) {
    validate(spec);
    const double w = spec.common_weight;
    // Stream layout per block b: factor, signs, then one stream per member.
    const std::uint64_t per_block = spec.block_size + 2;
    auto noise_for = [&](std::uint64_t stream) {
        return fgn_values(FgnSpec{spec.n, spec.hurst, derive_seed(spec.seed, stream), 1.0});
    };

    std::vector<std::optional<TimeSeries>> members(spec.n_blocks * spec.block_size);
    parallel_for(spec.n_blocks, [&](std::size_t b) {
        const std::uint64_t base = b * per_block;
        const auto factor = noise_for(base);
        const std::uint64_t sign_seed = derive_seed(spec.seed, base + 1);
        for (std::size_t m = 0; m < spec.block_size; ++m) {
            const auto own = noise_for(base + 2 + m);
            std::vector<double> mix(spec.n);
            for (std::size_t i = 0; i < spec.n; ++i) mix[i] = w * factor[i] + (1.0 - w) * own[i];
            members[b * spec.block_size + m] =
                rate_path(block_member_id(spec, b, m), mix, 1.0, sign_seed);
        }
    });
    std::vector<TimeSeries> out;
    out.reserve(members.size());
    for (auto& m : members) out.push_back(std::move(*m));
    return RatePanel(std::move(out));
}

}  // namespace longmem
