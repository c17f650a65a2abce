#pragma once
// Byte-level compression measurements built on gzip (RFC 1952) via zlib.
//
// C(x) is the size of a complete gzip member for x. Every measurement here is a
// pure function of (bytes, config); the deflate state behind it is a per-thread
// cache that is fully reset between calls.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "compsig/corpus.hpp"
#include "compsig/error.hpp"
#include "compsig/unicode.hpp"

namespace compsig {

// 10-byte member header without optional fields, 8-byte CRC32/ISIZE trailer.
inline constexpr std::size_t gzip_framing_bytes = 18;
inline constexpr int default_compression_level = 6;

struct CompressorConfig {
    int level = default_compression_level;
    bool include_header = true;

    void validate() const {
        if (level < 0 || level > 9) throw usage_error("compression level must be in [0, 9], got " + std::to_string(level));
    }
};

namespace detail {

class GzipSizer {
public:
    explicit GzipSizer(int level) {
        stream_.zalloc = Z_NULL;
        stream_.zfree = Z_NULL;
        stream_.opaque = Z_NULL;
        // windowBits 15 + 16 selects the gzip wrapper; memLevel 8 is zlib's default.
        if (deflateInit2(&stream_, level, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
            throw Error(ErrorKind::internal, "deflateInit2 failed");
        }
    }
    GzipSizer(const GzipSizer&) = delete;
    GzipSizer& operator=(const GzipSizer&) = delete;
    ~GzipSizer() { deflateEnd(&stream_); }

    std::size_t size(std::span<const unsigned char> bytes) {
        if (deflateReset(&stream_) != Z_OK) throw Error(ErrorKind::internal, "deflateReset failed");
        // zlib takes a non-const pointer but never writes through next_in.
        stream_.next_in = const_cast<Bytef*>(bytes.data());
        stream_.avail_in = static_cast<uInt>(bytes.size());
        std::size_t total = 0;
        int rc;
        do {
            stream_.next_out = buffer_.data();
            stream_.avail_out = static_cast<uInt>(buffer_.size());
            rc = deflate(&stream_, Z_FINISH);
            if (rc == Z_STREAM_ERROR) throw Error(ErrorKind::internal, "deflate failed");
            total += buffer_.size() - stream_.avail_out;
        } while (rc != Z_STREAM_END);
        return total;
    }

private:
    z_stream stream_{};
    std::array<Bytef, 1 << 16> buffer_{};
};

inline GzipSizer& thread_sizer(int level) {
    thread_local std::array<std::unique_ptr<GzipSizer>, 10> sizers;
    auto& slot = sizers[static_cast<std::size_t>(level)];
    if (!slot) slot = std::make_unique<GzipSizer>(level);
    return *slot;
}

inline std::span<const unsigned char> as_bytes(std::string_view s) {
    return {reinterpret_cast<const unsigned char*>(s.data()), s.size()};
}

} // namespace detail

inline std::size_t compressed_size(std::string_view bytes, const CompressorConfig& cfg = {}) {
    cfg.validate();
    const std::size_t n = detail::thread_sizer(cfg.level).size(detail::as_bytes(bytes));
    return cfg.include_header ? n : n - gzip_framing_bytes;
}

// R(x) = C(x) / |x|; lower is more compressible.
inline double compression_ratio(std::string_view bytes, const CompressorConfig& cfg = {}) {
    if (bytes.empty()) throw data_error("compression ratio of empty input");
    return static_cast<double>(compressed_size(bytes, cfg)) / static_cast<double>(bytes.size());
}

// Marginal cost per byte of y once x has been seen: (C(x ∥ y) − C(x)) / |y|.
inline double conditional_compression(std::string_view x, std::string_view y, const CompressorConfig& cfg = {}) {
    if (y.empty()) throw data_error("conditional compression with empty continuation");
    std::string xy;
    xy.reserve(x.size() + y.size());
    xy.append(x).append(y);
    const double joint = static_cast<double>(compressed_size(xy, cfg));
    const double prior = static_cast<double>(compressed_size(x, cfg));
    return (joint - prior) / static_cast<double>(y.size());
}

// Normalized compression distance.
inline double ncd(std::string_view x, std::string_view y, const CompressorConfig& cfg = {}) {
    if (x.empty() || y.empty()) throw data_error("ncd of empty input");
    std::string xy;
    xy.reserve(x.size() + y.size());
    xy.append(x).append(y);
    const double cx = static_cast<double>(compressed_size(x, cfg));
    const double cy = static_cast<double>(compressed_size(y, cfg));
    const double cxy = static_cast<double>(compressed_size(xy, cfg));
    return (cxy - std::min(cx, cy)) / std::max(cx, cy);
}

// ---------------------------------------------------------------------------
// Prefix curves

enum class PrefixUnit { sentence, character };

inline std::string to_string(PrefixUnit u) { return u == PrefixUnit::sentence ? "sentence" : "character"; }

inline PrefixUnit parse_prefix_unit(std::string_view s) {
    if (s == "sentence") return PrefixUnit::sentence;
    if (s == "character") return PrefixUnit::character;
    throw usage_error("unknown prefix unit '" + std::string(s) + "' (expected sentence|character)");
}

struct PrefixPoint {
    std::size_t k = 0;        // prefix length in units
    std::size_t bytes_in = 0; // prefix length in bytes
    double ratio = 0.0;

    friend bool operator==(const PrefixPoint&, const PrefixPoint&) = default;
};

struct PrefixCurve {
    std::string doc_id;
    std::string label;
    PrefixUnit unit = PrefixUnit::sentence;
    std::vector<PrefixPoint> points;
};

// Byte length of the prefix holding the first k units, k in [1, units]. The last
// unit always extends to the end of the text, so the final prefix is the whole document.
inline std::vector<std::size_t> prefix_byte_ends(const SegmentedDocument& seg, PrefixUnit unit) {
    std::vector<std::size_t> ends;
    const std::string& text = seg.doc.text;
    if (unit == PrefixUnit::sentence) {
        for (const Span& s : seg.sentence_spans) ends.push_back(s.end);
    } else {
        const auto offsets = unicode::code_point_offsets(text);
        ends.assign(offsets.begin() + 1, offsets.end());
    }
    if (!ends.empty()) ends.back() = text.size();
    return ends;
}

// Compression ratio of prefixes k = step, 2·step, … plus the full document. Each
// prefix is compressed independently from an empty codec state.
inline PrefixCurve prefix_curve(const SegmentedDocument& seg, PrefixUnit unit, std::size_t step,
                                const CompressorConfig& cfg = {}) {
    if (step < 1) throw usage_error("prefix step must be >= 1");
    const auto ends = prefix_byte_ends(seg, unit);
    if (ends.empty() || seg.doc.text.empty()) throw data_error("prefix curve of empty document '" + seg.doc.id + "'");
    PrefixCurve curve{seg.doc.id, seg.doc.label, unit, {}};
    const std::string_view text = seg.doc.text;
    const std::size_t n = ends.size();
    for (std::size_t k = step;; k += step) {
        const std::size_t kk = std::min(k, n);
        const std::size_t bytes = ends[kk - 1];
        curve.points.push_back({kk, bytes, compression_ratio(text.substr(0, bytes), cfg)});
        if (kk == n) break;
    }
    return curve;
}

} // namespace compsig
