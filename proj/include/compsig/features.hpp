#pragma once
// Per-document feature battery: compression, conditional compression, prefix
// curve summary, word-order contribution, entropies and repetition statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "compsig/compress.hpp"
#include "compsig/corpus.hpp"
#include "compsig/error.hpp"
#include "compsig/rng.hpp"
#include "compsig/unicode.hpp"

namespace compsig {

inline constexpr std::size_t feature_count = 11;

inline constexpr std::array<std::string_view, feature_count> feature_names = {
    "compression_ratio", "conditional_compression", "prefix_mean", "prefix_slope",
    "shuffle_gap",       "shuffle_ncd",             "char_entropy_norm", "word_entropy_norm",
    "ttr",               "rep_dist_mean",           "rep_dist_sd"};

struct FeatureVector {
    double compression_ratio = 0.0;
    double conditional_compression = 0.0;
    double prefix_mean = 0.0;
    double prefix_slope = 0.0;
    double shuffle_gap = 0.0;
    double shuffle_ncd = 0.0;
    double char_entropy_norm = 0.0;
    double word_entropy_norm = 0.0;
    double ttr = 0.0;
    double rep_dist_mean = 0.0;
    double rep_dist_sd = 0.0;

    // Values in feature_names order.
    std::array<double, feature_count> values() const {
        return {compression_ratio, conditional_compression, prefix_mean, prefix_slope, shuffle_gap, shuffle_ncd,
                char_entropy_norm, word_entropy_norm, ttr, rep_dist_mean, rep_dist_sd};
    }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FeatureOptions {
    PrefixUnit prefix_unit = PrefixUnit::character;
    std::size_t prefix_step = 200;
};

// Splits at the sentence start whose byte offset is nearest to half the text
// (earlier boundary on ties). x keeps the whitespace that precedes y.
inline std::pair<std::string_view, std::string_view> split_halves(const SegmentedDocument& seg) {
    if (seg.sentence_spans.size() < 2) throw data_error("cannot split: document has fewer than 2 sentences");
    const std::string_view text = seg.doc.text;
    const double mid = static_cast<double>(text.size()) / 2.0;
    std::size_t best = seg.sentence_spans[1].begin;
    for (std::size_t j = 2; j < seg.sentence_spans.size(); ++j) {
        const std::size_t cut = seg.sentence_spans[j].begin;
        if (std::abs(static_cast<double>(cut) - mid) < std::abs(static_cast<double>(best) - mid)) best = cut;
    }
    return {text.substr(0, best), text.substr(best)};
}

// Permutes the whitespace-delimited tokens inside each sentence independently.
// Whitespace runs stay in place, so the shuffled text has the same byte length.
inline Document shuffle_within_sentences(const SegmentedDocument& seg, std::uint64_t seed) {
    Document out = seg.doc;
    Rng rng(seed);
    std::string text;
    text.reserve(seg.doc.text.size());
    std::size_t cursor = 0;
    for (const Span& span : seg.sentence_spans) {
        text.append(seg.doc.text, cursor, span.begin - cursor);
        const std::string_view s = std::string_view(seg.doc.text).substr(span.begin, span.end - span.begin);
        std::vector<std::string_view> tokens;
        std::vector<std::string_view> gaps;
        std::size_t i = 0;
        while (i < s.size()) {
            std::size_t b = i;
            while (i < s.size()) {
                const auto d = unicode::decode_at(s, i);
                if (unicode::is_space(d.cp)) break;
                i += d.length;
            }
            tokens.push_back(s.substr(b, i - b));
            b = i;
            while (i < s.size()) {
                const auto d = unicode::decode_at(s, i);
                if (!unicode::is_space(d.cp)) break;
                i += d.length;
            }
            if (i > b) gaps.push_back(s.substr(b, i - b));
        }
        rng.shuffle(tokens);
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            text.append(tokens[t]);
            if (t < gaps.size()) text.append(gaps[t]);
        }
        cursor = span.end;
    }
    text.append(seg.doc.text, cursor, std::string::npos);
    out.text = std::move(text);
    return out;
}

// H(p_T) / log2(V) for the empirical distribution of `tokens`; 1.0 when V = 1.
template <class Range>
double normalized_entropy(const Range& tokens) {
    using T = std::decay_t<decltype(*std::begin(tokens))>;
    std::map<T, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& t : tokens) {
        ++counts[t];
        ++total;
    }
    if (total == 0) throw data_error("entropy of empty token sequence");
    if (counts.size() == 1) return 1.0;
    std::vector<std::size_t> c;
    c.reserve(counts.size());
    for (const auto& kv : counts) c.push_back(kv.second);
    std::sort(c.begin(), c.end());
    double h = 0.0;
    const double n = static_cast<double>(total);
    for (std::size_t k : c) {
        const double p = static_cast<double>(k) / n;
        h -= p * std::log2(p);
    }
    return std::clamp(h / std::log2(static_cast<double>(counts.size())), 0.0, 1.0);
}

inline double type_token_ratio(const std::vector<std::string>& words) {
    if (words.empty()) throw data_error("type-token ratio of empty word list");
    std::unordered_map<std::string_view, char> seen;
    for (const auto& w : words) seen.emplace(w, 0);
    return static_cast<double>(seen.size()) / static_cast<double>(words.size());
}

struct RepetitionStats {
    double mean = 0.0;
    double sd = 0.0;
};

// Index differences between consecutive occurrences of every repeated word
// (adjacent duplicates give 1); population sd. Without repeats: (word count, 0).
inline RepetitionStats repetition_distances(const std::vector<std::string>& words) {
    if (words.empty()) throw data_error("repetition distances of empty word list");
    std::unordered_map<std::string_view, std::size_t> last;
    std::vector<double> gaps;
    for (std::size_t i = 0; i < words.size(); ++i) {
        auto [it, inserted] = last.try_emplace(words[i], i);
        if (!inserted) {
            gaps.push_back(static_cast<double>(i - it->second));
            it->second = i;
        }
    }
    if (gaps.empty()) return {static_cast<double>(words.size()), 0.0};
    double sum = 0.0;
    for (double g : gaps) sum += g;
    const double m = sum / static_cast<double>(gaps.size());
    double ss = 0.0;
    for (double g : gaps) ss += (g - m) * (g - m);
    return {m, std::sqrt(ss / static_cast<double>(gaps.size()))};
}

struct PrefixStats {
    double mean = 0.0;
    double slope = 0.0;
};

// Mean ratio and OLS slope of ratio against k / k_max.
inline PrefixStats prefix_stats(const PrefixCurve& curve) {
    if (curve.points.empty()) throw data_error("prefix stats of empty curve");
    const std::size_t n = curve.points.size();
    const double kmax = static_cast<double>(curve.points.back().k);
    double sx = 0.0, sy = 0.0;
    for (const auto& p : curve.points) {
        sx += static_cast<double>(p.k) / kmax;
        sy += p.ratio;
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    if (n == 1) return {my, 0.0};
    // y centred on the first ratio: same slope, and exactly 0 for a flat curve
    const double y0 = curve.points.front().ratio;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : curve.points) {
        const double dx = static_cast<double>(p.k) / kmax - mx;
        sxy += dx * (p.ratio - y0);
        sxx += dx * dx;
    }
    return {my, sxx > 0.0 ? sxy / sxx : 0.0};
}

// Shuffle seed for a document: a function of (run seed, document id) only.
inline std::uint64_t shuffle_seed(std::uint64_t seed, std::string_view doc_id) { return derive_seed(seed, doc_id); }

// Computes every feature for one document. Never reads seg.doc.label.
inline FeatureVector extract(const SegmentedDocument& seg, const CompressorConfig& cfg, std::uint64_t seed,
                             const FeatureOptions& opts = {}) {
    return with_context("document '" + seg.doc.id + "'", [&] {
        if (seg.word_count < 1) throw data_error("feature extraction needs at least 1 word");
        const std::string_view text = seg.doc.text;
        FeatureVector f;
        f.compression_ratio = with_context("compression_ratio", [&] { return compression_ratio(text, cfg); });
        f.conditional_compression = with_context("conditional_compression", [&] {
            const auto [x, y] = split_halves(seg);
            return conditional_compression(x, y, cfg);
        });
        with_context("prefix_curve", [&] {
            const auto stats = prefix_stats(prefix_curve(seg, opts.prefix_unit, opts.prefix_step, cfg));
            f.prefix_mean = stats.mean;
            f.prefix_slope = stats.slope;
        });
        with_context("shuffle", [&] {
            const Document shuffled = shuffle_within_sentences(seg, shuffle_seed(seed, seg.doc.id));
            f.shuffle_gap = compression_ratio(shuffled.text, cfg) - f.compression_ratio;
            f.shuffle_ncd = ncd(text, shuffled.text, cfg);
        });
        f.char_entropy_norm = normalized_entropy(unicode::code_points(text));
        f.word_entropy_norm = normalized_entropy(seg.words);
        f.ttr = type_token_ratio(seg.words);
        const auto rep = repetition_distances(seg.words);
        f.rep_dist_mean = rep.mean;
        f.rep_dist_sd = rep.sd;
        for (double v : f.values()) {
            if (!std::isfinite(v)) throw Error(ErrorKind::internal, "non-finite feature value");
        }
        return f;
    });
}

} // namespace compsig
