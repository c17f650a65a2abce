#pragma once
// Aggregation of prefix curves into figure-ready summaries, and the table
// layouts of every tool output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "compsig/compress.hpp"
#include "compsig/corpus.hpp"
#include "compsig/error.hpp"
#include "compsig/features.hpp"
#include "compsig/model.hpp"
#include "compsig/parallel.hpp"
#include "compsig/synth.hpp"
#include "compsig/table.hpp"

namespace compsig {

inline constexpr const char* tool_version = "1.0.0";

// Linear interpolation between closest ranks (R type 7) over sorted values.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw data_error("quantile of empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct CurveBin {
    double center = 0.0;
    double mean = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    std::size_t count = 0;
};

struct BinnedCurve {
    std::string label;
    std::vector<CurveBin> bins;
};

namespace detail {

// Summary over a bag of values; sorting first makes it independent of input order.
inline CurveBin summarize(double center, std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    double m = sum / static_cast<double>(values.size());
    m = std::clamp(m, values.front(), values.back());
    return {center, m, quantile_sorted(values, 0.25), quantile_sorted(values, 0.75), values.size()};
}

} // namespace detail

// Pools prefix points per label over a k-axis shared by all labels, split into
// n_bins uniform bins over the observed [k_min, k_max]. Bins with fewer than
// min_count points are dropped.
inline std::vector<BinnedCurve> bin_curves(const std::vector<PrefixCurve>& curves, std::size_t n_bins,
                                           std::size_t min_count) {
    if (n_bins < 1) throw usage_error("n_bins must be >= 1");
    if (min_count < 1) throw usage_error("min_count must be >= 1");
    std::size_t kmin = SIZE_MAX, kmax = 0;
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            kmin = std::min(kmin, p.k);
            kmax = std::max(kmax, p.k);
        }
    }
    if (kmax == 0) throw data_error("no curve points to bin");
    const double lo = static_cast<double>(kmin);
    const double width = static_cast<double>(kmax - kmin) / static_cast<double>(n_bins);
    std::map<std::string, std::vector<std::vector<double>>> pooled;
    for (const auto& c : curves) {
        auto& bins = pooled[c.label];
        bins.resize(n_bins);
        for (const auto& p : c.points) {
            std::size_t b = 0;
            if (width > 0.0) {
                b = static_cast<std::size_t>(std::floor((static_cast<double>(p.k) - lo) / width));
                b = std::min(b, n_bins - 1);
            }
            bins[b].push_back(p.ratio);
        }
    }
    std::vector<BinnedCurve> out;
    for (auto& [label, bins] : pooled) {
        BinnedCurve bc{label, {}};
        for (std::size_t b = 0; b < n_bins; ++b) {
            if (bins[b].size() < min_count) continue;
            const double center = width > 0.0 ? lo + (static_cast<double>(b) + 0.5) * width : lo;
            bc.bins.push_back(detail::summarize(center, std::move(bins[b])));
        }
        out.push_back(std::move(bc));
    }
    return out;
}

// Sentence-by-sentence curves grouped by number of sentences k: per label and k,
// mean and quartiles over the documents that have a k-sentence prefix.
inline std::vector<BinnedCurve> group_curves_by_k(const std::vector<PrefixCurve>& curves) {
    std::map<std::string, std::map<std::size_t, std::vector<double>>> grouped;
    for (const auto& c : curves) {
        for (const auto& p : c.points) grouped[c.label][p.k].push_back(p.ratio);
    }
    std::vector<BinnedCurve> out;
    for (auto& [label, by_k] : grouped) {
        BinnedCurve bc{label, {}};
        for (auto& [k, values] : by_k) bc.bins.push_back(detail::summarize(static_cast<double>(k), std::move(values)));
        out.push_back(std::move(bc));
    }
    return out;
}

inline std::vector<BinnedCurve> incremental_group_curve(const std::vector<SegmentedDocument>& docs,
                                                        const CompressorConfig& cfg = {}) {
    std::vector<PrefixCurve> curves(docs.size());
    parallel_for(docs.size(), [&](std::size_t i) { curves[i] = prefix_curve(docs[i], PrefixUnit::sentence, 1, cfg); });
    return group_curves_by_k(curves);
}

// ---------------------------------------------------------------------------
// Table layouts

inline Table curves_table(const std::vector<PrefixCurve>& curves) {
    Table t{{"doc_id", "label", "unit", "k", "bytes_in", "ratio"}, {}};
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            t.rows.push_back({c.doc_id, c.label, to_string(c.unit), static_cast<std::int64_t>(p.k),
                              static_cast<std::int64_t>(p.bytes_in), p.ratio});
        }
    }
    return t;
}

inline Table binned_table(const std::vector<BinnedCurve>& curves) {
    Table t{{"label", "bin_center", "mean", "q25", "q75", "count"}, {}};
    for (const auto& c : curves) {
        for (const auto& b : c.bins) {
            t.rows.push_back({c.label, b.center, b.mean, b.q25, b.q75, static_cast<std::int64_t>(b.count)});
        }
    }
    return t;
}

inline Table sweep_table(const std::vector<SweepRow>& rows, const SweepParams& p) {
    Table t{{"h", "entropy_bits", "mean_ratio", "sd_ratio", "n", "N", "samples_per_h", "seed"}, {}};
    for (const auto& r : rows) {
        t.rows.push_back({r.h, r.entropy_bits, r.mean_ratio, r.sd_ratio, static_cast<std::int64_t>(p.n),
                          static_cast<std::int64_t>(p.tokens), static_cast<std::int64_t>(p.samples_per_h),
                          std::to_string(p.seed)});
    }
    return t;
}

struct FeatureRow {
    std::string doc_id;
    std::string label;
    std::size_t word_count = 0;
    FeatureVector features;
};

inline std::vector<std::string> feature_columns() {
    return {feature_names.begin(), feature_names.end()};
}

inline Table features_table(const std::vector<FeatureRow>& rows) {
    Table t{{"doc_id", "label", "word_count"}, {}};
    for (auto name : feature_names) t.columns.emplace_back(name);
    for (const auto& r : rows) {
        std::vector<Cell> row{r.doc_id, r.label, static_cast<std::int64_t>(r.word_count)};
        for (double v : r.features.values()) row.emplace_back(v);
        t.rows.push_back(std::move(row));
    }
    return t;
}

// Feature CSV as read back for training: ids, labels and the feature matrix in
// the CSV's own column order (every column other than doc_id/label/word_count).
struct FeatureData {
    std::vector<std::string> doc_ids;
    std::vector<std::string> labels;
    std::vector<std::string> columns;
    Matrix x;
};

inline FeatureData feature_data(const Table& t) {
    FeatureData d;
    const std::size_t id_col = t.column("doc_id");
    const std::size_t label_col = t.column("label");
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (t.columns[c] == "doc_id" || t.columns[c] == "label" || t.columns[c] == "word_count") continue;
        cols.push_back(c);
        d.columns.push_back(t.columns[c]);
    }
    if (cols.empty()) throw data_error("feature table has no feature columns");
    d.x = Matrix(t.rows.size(), cols.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        d.doc_ids.push_back(text_cell(t, r, id_col));
        d.labels.push_back(text_cell(t, r, label_col));
        for (std::size_t j = 0; j < cols.size(); ++j) d.x(r, j) = number_cell(t, r, cols[j]);
    }
    return d;
}

// Conventions recorded in every sidecar.
inline nlohmann::ordered_json conventions_json() {
    return {{"entropy_base", "bits (log2)"},
            {"char_entropy_symbols", "unicode code points of the text, whitespace included"},
            {"normalized_entropy_single_symbol", 1.0},
            {"repetition_distance", "index difference of consecutive occurrences (adjacent = 1)"},
            {"repetition_no_repeat_sentinel", "(word_count, 0)"},
            {"repetition_sd", "population"},
            {"prefix_slope_regressor", "k / k_max"},
            {"prefix_single_point_slope", 0.0},
            {"split_halves", "sentence start nearest half the byte length, earlier on ties"},
            {"shuffle_seed", "derive_seed(seed, fnv1a64(doc_id))"},
            {"quantile_rule", "type 7 (linear interpolation between closest ranks)"},
            {"sweep_sd", "sample (n - 1)"},
            {"codec", "gzip (RFC 1952) via zlib deflate, windowBits 15, memLevel 8, default strategy"}};
}

inline nlohmann::ordered_json compressor_json(const CompressorConfig& cfg) {
    return {{"level", cfg.level}, {"include_header", cfg.include_header}, {"framing_bytes", gzip_framing_bytes}};
}

} // namespace compsig
