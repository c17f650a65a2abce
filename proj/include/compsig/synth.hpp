#pragma once
// Controlled statistical regimes: the one-head fixed-entropy family, its
// entropy, i.i.d. text sampling from it, entropy sweeps and random baselines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "compsig/compress.hpp"
#include "compsig/error.hpp"
#include "compsig/parallel.hpp"
#include "compsig/rng.hpp"

namespace compsig {

namespace detail {

inline void check_regime(double h, std::size_t n) {
    if (n < 2) throw usage_error("vocabulary size must be >= 2");
    if (!(h >= 1.0 / static_cast<double>(n) && h <= 1.0)) {
        throw usage_error("h = " + std::to_string(h) + " outside [1/n, 1] for n = " + std::to_string(n));
    }
}

} // namespace detail

// Fixed-length pseudo-words w000001, w000002, ...
inline std::vector<std::string> pseudo_vocabulary(std::size_t n) {
    std::size_t width = 6;
    for (std::size_t m = n; m >= 1000000; m /= 10) ++width;
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        std::string digits = std::to_string(i);
        out.push_back("w" + std::string(width - digits.size(), '0') + digits);
    }
    return out;
}

class EntropyRegime {
public:
    EntropyRegime(double h, std::size_t n) : EntropyRegime(h, pseudo_vocabulary(n)) {}

    EntropyRegime(double h, std::vector<std::string> vocab) : h_(h), vocab_(std::move(vocab)) {
        detail::check_regime(h_, vocab_.size());
        std::vector<std::string> sorted = vocab_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw usage_error("regime vocabulary has duplicate words");
        }
        if (!sorted.empty() && sorted.front().empty()) throw usage_error("regime vocabulary has an empty word");
    }

    double h() const { return h_; }
    std::size_t n() const { return vocab_.size(); }
    const std::vector<std::string>& vocab() const { return vocab_; }

private:
    double h_;
    std::vector<std::string> vocab_;
};

// p(w_1) = h, p(w_i) = (1 − h)/(n − 1) for i ≥ 2.
inline std::vector<double> regime_pmf(double h, std::size_t n) {
    detail::check_regime(h, n);
    std::vector<double> p(n, (1.0 - h) / static_cast<double>(n - 1));
    p[0] = h;
    return p;
}

// Entropy of regime_pmf(h, n) in bits, with 0·log 0 = 0.
inline double regime_entropy(double h, std::size_t n) {
    detail::check_regime(h, n);
    const double head = h > 0.0 ? h * std::log2(h) : 0.0;
    const double rest = 1.0 - h;
    const double tail = rest > 0.0 ? rest * std::log2(rest / static_cast<double>(n - 1)) : 0.0;
    return 0.0 - (head + tail);
}

struct SampledText {
    double h = 0.0;
    std::size_t n = 0;
    std::size_t length = 0;
    std::uint64_t seed = 0;
    std::string text;
};

// N i.i.d. tokens from the regime joined by single spaces.
inline SampledText sample_text(const EntropyRegime& regime, std::size_t N, std::uint64_t seed) {
    if (N < 1) throw usage_error("sample length must be >= 1");
    Rng rng(seed);
    const auto& vocab = regime.vocab();
    const std::uint64_t tail = vocab.size() - 1;
    SampledText out{regime.h(), regime.n(), N, seed, {}};
    for (std::size_t i = 0; i < N; ++i) {
        const std::string& w = rng.uniform() < regime.h() ? vocab[0] : vocab[1 + rng.below(tail)];
        if (i) out.text += ' ';
        out.text += w;
    }
    return out;
}

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation (n − 1); 0 for a single value.
inline double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct SweepRow {
    double h = 0.0;
    double entropy_bits = 0.0;
    double mean_ratio = 0.0;
    double sd_ratio = 0.0;
};

struct SweepParams {
    std::size_t n = 5000;
    std::size_t count = 20;
    std::size_t tokens = 479;
    std::size_t samples_per_h = 50;
    std::uint64_t seed = 0;
};

// `count` equally spaced h in [1/n, 1] (endpoints exact). Sample s of grid point i
// uses derive_seed(derive_seed(seed, i), s), so results do not depend on scheduling.
inline std::vector<double> entropy_grid(std::size_t n, std::size_t count) {
    if (count < 2) throw usage_error("sweep needs at least 2 grid points");
    const double lo = 1.0 / static_cast<double>(n);
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = lo + (1.0 - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    grid.front() = lo;
    grid.back() = 1.0;
    return grid;
}

inline std::vector<SweepRow> entropy_sweep(const SweepParams& p, const CompressorConfig& cfg = {}) {
    if (p.samples_per_h < 1) throw usage_error("samples per h must be >= 1");
    const auto grid = entropy_grid(p.n, p.count);
    const auto vocab = pseudo_vocabulary(p.n);
    std::vector<EntropyRegime> regimes;
    for (double h : grid) regimes.emplace_back(h, vocab);
    std::vector<double> ratios(grid.size() * p.samples_per_h);
    parallel_for(ratios.size(), [&](std::size_t j) {
        const std::size_t i = j / p.samples_per_h;
        const std::size_t s = j % p.samples_per_h;
        const auto t = sample_text(regimes[i], p.tokens, derive_seed(derive_seed(p.seed, i), s));
        ratios[j] = compression_ratio(t.text, cfg);
    });
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> r(ratios.begin() + static_cast<std::ptrdiff_t>(i * p.samples_per_h),
                              ratios.begin() + static_cast<std::ptrdiff_t>((i + 1) * p.samples_per_h));
        rows.push_back({grid[i], regime_entropy(grid[i], p.n), mean(r), sample_sd(r)});
    }
    return rows;
}

enum class BaselineMode { uniform, empirical };

inline BaselineMode parse_baseline_mode(std::string_view s) {
    if (s == "uniform") return BaselineMode::uniform;
    if (s == "empirical") return BaselineMode::empirical;
    throw usage_error("unknown baseline mode '" + std::string(s) + "' (expected uniform|empirical)");
}

// N words drawn i.i.d. from `vocab`, uniformly or by `weights`.
inline std::string random_baseline(const std::vector<std::string>& vocab, const std::vector<double>& weights,
                                   std::size_t N, BaselineMode mode, std::uint64_t seed) {
    if (vocab.empty()) throw usage_error("baseline vocabulary is empty");
    if (N < 1) throw usage_error("baseline length must be >= 1");
    std::vector<double> cdf;
    if (mode == BaselineMode::empirical) {
        if (weights.size() != vocab.size()) throw usage_error("empirical baseline needs one weight per vocabulary word");
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw usage_error("baseline weights must be finite and non-negative");
            total += w;
            cdf.push_back(total);
        }
        if (std::abs(total - 1.0) > 1e-6) throw usage_error("baseline weights must sum to 1, got " + std::to_string(total));
    }
    Rng rng(seed);
    std::string text;
    for (std::size_t i = 0; i < N; ++i) {
        std::size_t idx;
        if (mode == BaselineMode::uniform) {
            idx = rng.below(vocab.size());
        } else {
            const double u = rng.uniform() * cdf.back();
            idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            idx = std::min(idx, vocab.size() - 1);
        }
        if (i) text += ' ';
        text += vocab[idx];
    }
    return text;
}

} // namespace compsig
