#pragma once
// Corpus ingestion and text preparation: JSONL documents, cleanup rules,
// sentence/word segmentation and length-based sampling.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "compsig/error.hpp"
#include "compsig/rng.hpp"
#include "compsig/unicode.hpp"

namespace compsig {

struct Document {
    std::string id;
    std::string label;
    std::string text; // UTF-8; this string is the byte view every codec sees
    std::map<std::string, std::string> meta;

    friend bool operator==(const Document&, const Document&) = default;
};

// Half-open byte range [begin, end) into a text.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    friend bool operator==(const Span&, const Span&) = default;
};

struct SegmentedDocument {
    Document doc;
    std::vector<std::string> sentences;
    std::vector<Span> sentence_spans; // parallel to sentences, into doc.text
    std::vector<std::string> words;
    std::size_t word_count = 0;
};

// ---------------------------------------------------------------------------
// JSONL

namespace detail {

inline std::string meta_string(const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
}

} // namespace detail

inline std::vector<Document> read_jsonl(std::istream& in) {
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw data_error("malformed JSON at line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!rec.is_object()) {
            throw data_error("record is not an object at line " + std::to_string(line_no));
        }

        Document doc;
        for (const char* key : {"id", "label", "text"}) {
            auto it = rec.find(key);
            if (it == rec.end()) {
                throw data_error(std::string("missing field ") + key + " at line " + std::to_string(line_no));
            }
            if (!it->is_string()) {
                throw data_error(std::string("field ") + key + " is not a string at line " +
                                 std::to_string(line_no));
            }
        }
        doc.id = rec["id"].get<std::string>();
        doc.label = rec["label"].get<std::string>();
        doc.text = rec["text"].get<std::string>();
        if (doc.id.empty()) throw data_error("empty id at line " + std::to_string(line_no));
        if (!seen.insert(doc.id).second) {
            throw data_error("duplicate id '" + doc.id + "' at line " + std::to_string(line_no));
        }
        for (auto it = rec.begin(); it != rec.end(); ++it) {
            if (it.key() == "id" || it.key() == "label" || it.key() == "text") continue;
            doc.meta.emplace(it.key(), detail::meta_string(it.value()));
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

inline std::vector<Document> load_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    return with_context(path, [&] { return read_jsonl(in); });
}

inline void write_jsonl(std::ostream& out, const std::vector<Document>& docs) {
    for (const auto& d : docs) {
        nlohmann::ordered_json rec;
        rec["id"] = d.id;
        rec["label"] = d.label;
        rec["text"] = d.text;
        for (const auto& [k, v] : d.meta) rec[k] = v;
        out << rec.dump() << '\n';
    }
}

inline void save_jsonl(const std::string& path, const std::vector<Document>& docs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path);
    write_jsonl(out, docs);
    if (!out) throw data_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Preprocessing

struct PreprocessRules {
    bool strip_urls = false;
    bool strip_emoji = false;
    bool strip_markup = false;
    bool collapse_whitespace = false;
    bool nfc = false;

    static PreprocessRules all() { return {true, true, true, true, true}; }
};

namespace detail {

inline bool ascii_alnum(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline bool starts_with_icase(std::string_view s, std::size_t pos, std::string_view prefix) {
    if (pos + prefix.size() > s.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        char c = s[pos + i];
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (c != prefix[i]) return false;
    }
    return true;
}

inline std::string strip_urls(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const bool boundary = i == 0 || !ascii_alnum(s[i - 1]);
        if (boundary && (starts_with_icase(s, i, "http://") || starts_with_icase(s, i, "https://") ||
                         starts_with_icase(s, i, "www."))) {
            while (i < s.size()) {
                const auto d = unicode::decode_at(s, i);
                if (unicode::is_space(d.cp)) break;
                i += d.length;
            }
            continue;
        }
        out += s[i++];
    }
    return out;
}

inline std::string strip_emoji(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool after_emoji = false;
    for (std::size_t i = 0; i < s.size();) {
        const auto d = unicode::decode_at(s, i);
        const bool joiner = d.cp == 0x200D && after_emoji;
        if (unicode::is_emoji_component(d.cp) || joiner) {
            after_emoji = true;
        } else {
            after_emoji = false;
            out.append(s.substr(i, d.length));
        }
        i += d.length;
    }
    return out;
}

inline bool decode_entity(std::string_view name, std::string& out) {
    static const std::map<std::string_view, char32_t> named = {
        {"amp", U'&'}, {"lt", U'<'}, {"gt", U'>'}, {"quot", U'"'}, {"apos", U'\''}, {"nbsp", 0xA0}};
    if (name.size() > 1 && name[0] == '#') {
        char32_t cp = 0;
        const bool hex = name[1] == 'x' || name[1] == 'X';
        const std::string_view digits = name.substr(hex ? 2 : 1);
        if (digits.empty() || digits.size() > 7) return false;
        for (char c : digits) {
            int v;
            if (c >= '0' && c <= '9') v = c - '0';
            else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
            else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
            else return false;
            cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(v);
        }
        if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        unicode::append_utf8(out, cp);
        return true;
    }
    auto it = named.find(name);
    if (it == named.end()) return false;
    unicode::append_utf8(out, it->second);
    return true;
}

// HTML/XML tags and comments become a single space; character entities are decoded.
inline std::string strip_markup(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (c == '<' && s.substr(i, 4) == "<!--") {
            const auto close = s.find("-->", i + 4);
            if (close != std::string_view::npos) {
                out += ' ';
                i = close + 3;
                continue;
            }
        }
        if (c == '<' && i + 1 < s.size()) {
            const char n = s[i + 1];
            const bool tag_start = (n >= 'a' && n <= 'z') || (n >= 'A' && n <= 'Z') || n == '/' || n == '!' || n == '?';
            if (tag_start) {
                const auto close = s.find_first_of("<>", i + 1);
                if (close != std::string_view::npos && s[close] == '>') {
                    out += ' ';
                    i = close + 1;
                    continue;
                }
            }
        }
        if (c == '&') {
            const auto semi = s.find(';', i + 1);
            if (semi != std::string_view::npos && semi - i <= 10 &&
                decode_entity(s.substr(i + 1, semi - i - 1), out)) {
                i = semi + 1;
                continue;
            }
        }
        out += c;
        ++i;
    }
    return out;
}

inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    for (std::size_t i = 0; i < s.size();) {
        const auto d = unicode::decode_at(s, i);
        if (unicode::is_space(d.cp)) {
            pending = !out.empty();
        } else {
            if (pending) out += ' ';
            pending = false;
            out.append(s.substr(i, d.length));
        }
        i += d.length;
    }
    return out;
}

inline std::string apply_rules_once(std::string text, const PreprocessRules& rules) {
    if (rules.strip_urls) text = strip_urls(text);
    if (rules.strip_emoji) text = strip_emoji(text);
    if (rules.strip_markup) text = strip_markup(text);
    if (rules.collapse_whitespace) text = collapse_whitespace(text);
    if (rules.nfc) text = unicode::nfc(text);
    return text;
}

} // namespace detail

// Applies the selected rules in declaration order, repeating the pass until the
// text stops changing (e.g. an entity decoded into a tag), so the result is idempotent.
inline Document preprocess(const Document& doc, const PreprocessRules& rules) {
    Document out = doc;
    constexpr int max_passes = 16;
    for (int pass = 0; pass < max_passes; ++pass) {
        std::string next = detail::apply_rules_once(out.text, rules);
        if (next == out.text) break;
        out.text = std::move(next);
    }
    return out;
}

struct PreprocessConfig {
    PreprocessRules rules;
    std::string abbreviations_path; // empty: built-in list
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline bool parse_bool(const std::string& v, const std::string& key, std::size_t line) {
    std::string l = v;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
    if (l == "false" || l == "0" || l == "no" || l == "off") return false;
    throw data_error("bad boolean '" + v + "' for " + key + " at line " + std::to_string(line));
}

} // namespace detail

// Flat `key = value` file; '#' starts a comment.
inline PreprocessConfig parse_preprocess_config(std::istream& in) {
    PreprocessConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find_first_of("=:");
        if (eq == std::string::npos) throw data_error("expected key = value at line " + std::to_string(line_no));
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key == "strip_urls") cfg.rules.strip_urls = detail::parse_bool(value, key, line_no);
        else if (key == "strip_emoji") cfg.rules.strip_emoji = detail::parse_bool(value, key, line_no);
        else if (key == "strip_markup") cfg.rules.strip_markup = detail::parse_bool(value, key, line_no);
        else if (key == "collapse_whitespace") cfg.rules.collapse_whitespace = detail::parse_bool(value, key, line_no);
        else if (key == "nfc") cfg.rules.nfc = detail::parse_bool(value, key, line_no);
        else if (key == "abbreviations_path") cfg.abbreviations_path = value;
        else throw data_error("unknown config key '" + key + "' at line " + std::to_string(line_no));
    }
    return cfg;
}

inline PreprocessConfig load_preprocess_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    return with_context(path, [&] { return parse_preprocess_config(in); });
}

// ---------------------------------------------------------------------------
// Segmentation

// Lower-case abbreviations without their final period.
inline const std::set<std::string, std::less<>>& default_abbreviations() {
    static const std::set<std::string, std::less<>> list = {
        "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "vs", "etc", "e.g", "i.e", "cf",
        "inc", "ltd", "co", "corp", "no", "nos", "fig", "figs", "vol", "pp", "ed", "eds", "al",
        "approx", "dept", "est", "gen", "gov", "sen", "rep", "col", "lt", "sgt", "capt", "rev",
        "hon", "jan", "feb", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
        "u.s", "u.k", "u.n", "ph.d"};
    return list;
}

inline std::set<std::string, std::less<>> load_abbreviations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open abbreviation list " + path);
    std::set<std::string, std::less<>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string t = detail::trim(line);
        while (!t.empty() && t.back() == '.') t.pop_back();
        if (!t.empty()) out.insert(unicode::to_lower(t));
    }
    return out;
}

class SentenceSplitter {
public:
    SentenceSplitter() : abbreviations_(default_abbreviations()) {}
    explicit SentenceSplitter(std::set<std::string, std::less<>> abbreviations)
        : abbreviations_(std::move(abbreviations)) {}

    // Sentence boundaries as byte spans. A boundary follows a run of . ! ? (plus
    // closing quotes/brackets) when the run is followed by whitespace and an
    // uppercase letter, or by the end of the text. A lone '.' after a listed
    // abbreviation never ends a sentence.
    std::vector<Span> spans(std::string_view text) const {
        std::vector<Span> out;
        std::size_t i = skip_space(text, 0);
        std::size_t start = i;
        while (i < text.size()) {
            const auto d = unicode::decode_at(text, i);
            if (!is_terminator(d.cp)) {
                i += d.length;
                continue;
            }
            const std::size_t run_begin = i;
            bool only_period = true;
            std::size_t end = i;
            while (end < text.size()) {
                const auto t = unicode::decode_at(text, end);
                if (!is_terminator(t.cp)) break;
                if (t.cp != U'.') only_period = false;
                end += t.length;
            }
            if (end - run_begin > 1) only_period = false; // "..." or "?!"
            while (end < text.size()) {
                const auto t = unicode::decode_at(text, end);
                if (!is_closer(t.cp)) break;
                end += t.length;
            }
            const std::size_t next = skip_space(text, end);
            bool boundary = false;
            if (next == text.size()) {
                boundary = true;
            } else if (next > end && starts_upper(text, next)) {
                boundary = !(only_period && is_abbreviation(text, start, run_begin));
            }
            if (boundary) {
                out.push_back({start, end});
                start = next;
                i = next;
            } else {
                i = end;
            }
        }
        if (start < text.size()) {
            std::size_t e = text.size();
            while (e > start) {
                // back up over trailing whitespace
                std::size_t p = e - 1;
                while (p > start && (static_cast<unsigned char>(text[p]) & 0xC0) == 0x80) --p;
                if (!unicode::is_space(unicode::decode_at(text, p).cp)) break;
                e = p;
            }
            if (e > start) out.push_back({start, e});
        }
        return out;
    }

private:
    static bool is_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?' || c == 0x2026; }

    static bool is_closer(char32_t c) {
        return c == U'"' || c == U'\'' || c == U')' || c == U']' || c == 0x201D || c == 0x2019 || c == 0xBB;
    }

    static bool is_opener(char32_t c) {
        return c == U'"' || c == U'\'' || c == U'(' || c == U'[' || c == 0x201C || c == 0x2018 || c == 0xAB;
    }

    static std::size_t skip_space(std::string_view text, std::size_t i) {
        while (i < text.size()) {
            const auto d = unicode::decode_at(text, i);
            if (!unicode::is_space(d.cp)) break;
            i += d.length;
        }
        return i;
    }

    static bool starts_upper(std::string_view text, std::size_t i) {
        while (i < text.size()) {
            const auto d = unicode::decode_at(text, i);
            if (is_opener(d.cp)) {
                i += d.length;
                continue;
            }
            return unicode::is_upper(d.cp);
        }
        return false;
    }

    bool is_abbreviation(std::string_view text, std::size_t sentence_start, std::size_t period) const {
        std::size_t b = period;
        while (b > sentence_start) {
            std::size_t p = b - 1;
            while (p > sentence_start && (static_cast<unsigned char>(text[p]) & 0xC0) == 0x80) --p;
            const auto d = unicode::decode_at(text, p);
            if (unicode::is_space(d.cp) || is_opener(d.cp)) break;
            b = p;
        }
        if (b == period) return false;
        return abbreviations_.contains(unicode::to_lower(text.substr(b, period - b)));
    }

    std::set<std::string, std::less<>> abbreviations_;
};

inline std::vector<std::string> segment_sentences(std::string_view text,
                                                  const SentenceSplitter& splitter = SentenceSplitter{}) {
    if (text.empty()) throw data_error("cannot segment empty text");
    std::vector<std::string> out;
    for (const Span& s : splitter.spans(text)) out.emplace_back(text.substr(s.begin, s.end - s.begin));
    if (out.empty()) throw data_error("text contains no sentences");
    return out;
}

// Whitespace split, leading/trailing punctuation stripped, lower-cased.
inline std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size()) {
            const auto d = unicode::decode_at(text, i);
            if (!unicode::is_space(d.cp)) break;
            i += d.length;
        }
        std::size_t b = i;
        std::size_t e = i;
        while (e < text.size()) {
            const auto d = unicode::decode_at(text, e);
            if (unicode::is_space(d.cp)) break;
            e += d.length;
        }
        i = e;
        while (b < e) {
            const auto d = unicode::decode_at(text, b);
            if (!unicode::is_punct(d.cp)) break;
            b += d.length;
        }
        while (e > b) {
            std::size_t p = e - 1;
            while (p > b && (static_cast<unsigned char>(text[p]) & 0xC0) == 0x80) --p;
            if (!unicode::is_punct(unicode::decode_at(text, p).cp)) break;
            e = p;
        }
        if (e > b) words.push_back(unicode::to_lower(text.substr(b, e - b)));
    }
    return words;
}

inline SegmentedDocument segment(Document doc, const SentenceSplitter& splitter = SentenceSplitter{}) {
    return with_context("document '" + doc.id + "'", [&] {
        SegmentedDocument seg;
        if (doc.text.empty()) throw data_error("cannot segment empty text");
        seg.sentence_spans = splitter.spans(doc.text);
        if (seg.sentence_spans.empty()) throw data_error("text contains no sentences");
        for (const Span& s : seg.sentence_spans) seg.sentences.push_back(doc.text.substr(s.begin, s.end - s.begin));
        seg.words = tokenize_words(doc.text);
        seg.word_count = seg.words.size();
        seg.doc = std::move(doc);
        return seg;
    });
}

// ---------------------------------------------------------------------------
// Length selection

inline constexpr std::size_t unbounded_words = std::numeric_limits<std::size_t>::max();

struct LengthStratum {
    std::string name;
    std::size_t lower = 0; // inclusive
    std::size_t upper = 0; // exclusive

    bool contains(std::size_t n) const { return n >= lower && n < upper; }
};

// Four strata low/mid/high/very_high cut at the quartiles of `word_counts`
// (type-7 quantiles rounded to the nearest integer).
inline std::vector<LengthStratum> default_strata(std::vector<std::size_t> word_counts) {
    if (word_counts.empty()) throw data_error("cannot derive strata from an empty corpus");
    std::sort(word_counts.begin(), word_counts.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(word_counts.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const auto hi = std::min(lo + 1, word_counts.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        const double v = static_cast<double>(word_counts[lo]) * (1.0 - frac) + static_cast<double>(word_counts[hi]) * frac;
        return static_cast<std::size_t>(v + 0.5);
    };
    std::size_t q1 = std::max<std::size_t>(quantile(0.25), 1);
    std::size_t q2 = std::max(quantile(0.5), q1 + 1);
    std::size_t q3 = std::max(quantile(0.75), q2 + 1);
    return {{"low", 0, q1}, {"mid", q1, q2}, {"high", q2, q3}, {"very_high", q3, unbounded_words}};
}

struct StratumSample {
    LengthStratum stratum;
    std::vector<Document> docs;
};

// Uniform sample without replacement of min(per_stratum, available) documents per
// stratum; each stratum draws from its own seed stream, selected docs keep input order.
inline std::vector<StratumSample> stratify_by_length(const std::vector<SegmentedDocument>& docs,
                                                     const std::vector<LengthStratum>& strata,
                                                     std::size_t per_stratum, std::uint64_t seed) {
    if (per_stratum < 1) throw usage_error("per_stratum must be >= 1");
    for (std::size_t i = 0; i < strata.size(); ++i) {
        if (strata[i].lower >= strata[i].upper) throw usage_error("stratum '" + strata[i].name + "' has lower >= upper");
        for (std::size_t j = 0; j < i; ++j) {
            if (strata[i].lower < strata[j].upper && strata[j].lower < strata[i].upper) {
                throw usage_error("strata '" + strata[j].name + "' and '" + strata[i].name + "' overlap");
            }
        }
    }
    std::vector<StratumSample> out;
    for (const auto& stratum : strata) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            if (stratum.contains(docs[i].word_count)) candidates.push_back(i);
        }
        const std::size_t take = std::min(per_stratum, candidates.size());
        Rng rng(derive_seed(seed, stratum.name));
        for (std::size_t i = 0; i < take; ++i) {
            std::swap(candidates[i], candidates[i + rng.below(candidates.size() - i)]);
        }
        candidates.resize(take);
        std::sort(candidates.begin(), candidates.end());
        StratumSample sample{stratum, {}};
        for (std::size_t idx : candidates) sample.docs.push_back(docs[idx].doc);
        out.push_back(std::move(sample));
    }
    return out;
}

// Keeps documents with lo <= word_count <= hi, in order.
inline std::vector<SegmentedDocument> filter_word_count(const std::vector<SegmentedDocument>& docs,
                                                        std::size_t lo, std::size_t hi) {
    if (lo > hi) throw usage_error("filter_word_count: lo > hi");
    std::vector<SegmentedDocument> out;
    for (const auto& d : docs) {
        if (d.word_count >= lo && d.word_count <= hi) out.push_back(d);
    }
    return out;
}

// Word frequencies over a set of documents, sorted by word.
struct Vocabulary {
    std::vector<std::string> words;
    std::vector<double> weights; // relative frequencies, sum to 1
};

inline Vocabulary count_vocabulary(const std::vector<SegmentedDocument>& docs) {
    std::map<std::string, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& d : docs) {
        for (const auto& w : d.words) {
            ++counts[w];
            ++total;
        }
    }
    Vocabulary v;
    for (const auto& [w, c] : counts) {
        v.words.push_back(w);
        v.weights.push_back(static_cast<double>(c) / static_cast<double>(total));
    }
    return v;
}

} // namespace compsig
