#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "compsig/compress.hpp"
#include "compsig/parallel.hpp"
#include "compsig/rng.hpp"
#include "test_util.hpp"

using namespace compsig;

namespace {

std::string random_bytes(std::size_t n, std::uint64_t seed) {
    Rng r(seed);
    std::string s(n, '\0');
    for (auto& c : s) c = static_cast<char>(r.below(256));
    return s;
}

std::string repeat(const std::string& s, std::size_t k) {
    std::string out;
    for (std::size_t i = 0; i < k; ++i) out += s;
    return out;
}

const std::string fox = "The quick brown fox jumps over the lazy dog. ";

} // namespace

// Sizes frozen from an independent gzip writer (Python zlib.compressobj, wbits 31).
TEST(CompressedSize, FrozenReferenceSizes) {
    EXPECT_EQ(compressed_size(""), 20u);
    EXPECT_EQ(compressed_size(std::string(1000, 'a')), 29u);
    EXPECT_EQ(compressed_size("hello world"), 31u);
    EXPECT_EQ(compressed_size(repeat(fox, 20)), 73u);
    EXPECT_EQ(compressed_size(std::string(1000, 'a'), {1, true}), 31u);
    EXPECT_EQ(compressed_size(repeat(fox, 20), {1, true}), 75u);
    EXPECT_EQ(compressed_size(std::string(1000, 'a'), {9, true}), 29u);
}

TEST(CompressedSize, HeaderExclusion) {
    const std::string s = repeat(fox, 3);
    EXPECT_EQ(compressed_size(s, {6, false}) + gzip_framing_bytes, compressed_size(s));
    EXPECT_EQ(compressed_size("", {6, false}), 2u);
}

TEST(CompressedSize, Deterministic) {
    const auto s = random_bytes(5000, 1);
    EXPECT_EQ(compressed_size(s), compressed_size(s));
}

TEST(CompressedSize, LevelValidated) {
    EXPECT_THROW(compressed_size("x", {10, true}), Error);
    EXPECT_THROW(compressed_size("x", {-1, true}), Error);
}

TEST(CompressedSize, ThreadSafe) {
    const auto s = random_bytes(3000, 2);
    const auto expected = compressed_size(s);
    std::vector<std::size_t> got(64);
    parallel_for(got.size(), [&](std::size_t i) { got[i] = compressed_size(s); });
    for (auto g : got) EXPECT_EQ(g, expected);
}

TEST(Ratio, Examples) {
    EXPECT_NEAR(compression_ratio(std::string(1000, 'a')), 0.029, 1e-12);
    EXPECT_GT(compression_ratio(random_bytes(1000, 3)), 1.0);
    const auto s = repeat(fox, 5);
    EXPECT_EQ(compression_ratio(s), compression_ratio(s));
    EXPECT_THROW(compression_ratio(""), Error);
}

TEST(Conditional, Examples) {
    const std::string half(500, 'a');
    EXPECT_NEAR(conditional_compression(half, half), 3.0 / 500.0, 1e-12);
    const std::string y = repeat(fox, 4);
    EXPECT_DOUBLE_EQ(conditional_compression("", y),
                     (static_cast<double>(compressed_size(y)) - static_cast<double>(compressed_size(""))) /
                         static_cast<double>(y.size()));
    EXPECT_THROW(conditional_compression("x", ""), Error);
}

TEST(Conditional, NaturalTextAboveFloor) {
    const auto docs = testutil::english_sample();
    for (std::size_t i = 0; i + 1 < docs.size(); ++i) {
        EXPECT_GT(conditional_compression(docs[i].text, docs[i + 1].text), -0.1);
    }
}

TEST(Ncd, SelfDistanceSmall) {
    for (const auto& d : testutil::english_sample()) {
        const double v = ncd(d.text, d.text);
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, 0.15) << d.id;
    }
}

// Codec asymmetry: an independent gzip writer puts 95% of fixture pairs within
// 0.02 and none beyond 0.033.
TEST(Ncd, NearlySymmetricAndBounded) {
    const auto docs = testutil::english_sample();
    std::vector<double> gaps;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (std::size_t j = i + 1; j < docs.size(); ++j) {
            const double a = ncd(docs[i].text, docs[j].text);
            const double b = ncd(docs[j].text, docs[i].text);
            EXPECT_GE(a, 0.0);
            EXPECT_LE(a, 1.1);
            gaps.push_back(std::abs(a - b));
        }
    }
    std::sort(gaps.begin(), gaps.end());
    EXPECT_LE(gaps[gaps.size() * 95 / 100], 0.02);
    EXPECT_LE(gaps.back(), 0.05);
}

TEST(Ncd, IndependentRandomBlocksNearOne) {
    const double v = ncd(random_bytes(4000, 10), random_bytes(4000, 11));
    EXPECT_GT(v, 0.95);
    EXPECT_LE(v, 1.1);
    EXPECT_THROW(ncd("", "x"), Error);
}

// C(x ∥ y) ≥ C(x) − header, and C(x ∥ x) < 2·C(x) − header for text of ≥ 200 bytes.
TEST(CompressedSize, MonotoneAndSubadditiveProperty) {
    const auto docs = testutil::english_sample();
    const auto header = static_cast<double>(gzip_framing_bytes);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto& x = docs[i].text;
        const auto& y = docs[(i * 7 + 3) % docs.size()].text;
        const double cx = static_cast<double>(compressed_size(x));
        EXPECT_GE(static_cast<double>(compressed_size(x + y)), cx - header);
        ASSERT_GE(x.size(), 200u);
        EXPECT_LT(static_cast<double>(compressed_size(x + x)), 2.0 * cx - header);
    }
}

// ---------------------------------------------------------------------------
// Prefix curves

namespace {

SegmentedDocument seg_of(const std::string& text) { return segment(Document{"d", "lab", text, {}}); }

} // namespace

TEST(PrefixCurve, SingleSentence) {
    const auto s = seg_of("Just one sentence here.");
    const auto c = prefix_curve(s, PrefixUnit::sentence, 1);
    ASSERT_EQ(c.points.size(), 1u);
    EXPECT_EQ(c.points[0].k, 1u);
    EXPECT_EQ(c.points[0].ratio, compression_ratio(s.doc.text));
    EXPECT_EQ(c.label, "lab");
}

TEST(PrefixCurve, RepeatedSentencesDecrease) {
    // checked against an independent gzip writer: strictly decreasing from k = 5
    const auto s = seg_of(repeat("The cat sat on the mat and the dog lay by the door. ", 50));
    const auto c = prefix_curve(s, PrefixUnit::sentence, 1);
    ASSERT_EQ(c.points.size(), 50u);
    for (std::size_t i = 4; i + 1 < c.points.size(); ++i) EXPECT_LT(c.points[i + 1].ratio, c.points[i].ratio);
}

TEST(PrefixCurve, PrefixesAreTruePrefixes) {
    const std::string text = "First one.  Second\tone!\n\nThird one? Fourth.";
    const auto s = seg_of(text);
    const auto c = prefix_curve(s, PrefixUnit::sentence, 1);
    ASSERT_EQ(c.points.size(), 4u);
    EXPECT_EQ(c.points[0].bytes_in, std::string("First one.").size());
    EXPECT_EQ(c.points[1].bytes_in, std::string("First one.  Second\tone!").size());
    EXPECT_EQ(c.points.back().bytes_in, text.size());
}

TEST(PrefixCurve, CharacterUnitCountsCodePoints) {
    const std::string text = "\xC3\xA9t\xC3\xA9 \xC3\xA9t\xC3\xA9."; // 8 code points, 11 bytes
    const auto c = prefix_curve(seg_of(text), PrefixUnit::character, 3);
    ASSERT_EQ(c.points.size(), 3u);
    EXPECT_EQ(c.points[0].k, 3u);
    EXPECT_EQ(c.points[0].bytes_in, 5u);
    EXPECT_EQ(c.points[1].k, 6u);
    EXPECT_EQ(c.points[2].k, 8u);
    EXPECT_EQ(c.points[2].bytes_in, text.size());
}

TEST(PrefixCurve, InvariantsOnNaturalText) {
    for (const auto& s : testutil::english_segmented()) {
        for (auto unit : {PrefixUnit::sentence, PrefixUnit::character}) {
            const auto c = prefix_curve(s, unit, unit == PrefixUnit::sentence ? 1 : 200);
            for (std::size_t i = 0; i < c.points.size(); ++i) {
                EXPECT_GT(c.points[i].ratio, 0.0);
                if (i) {
                    EXPECT_GT(c.points[i].k, c.points[i - 1].k);
                    EXPECT_GE(c.points[i].bytes_in, c.points[i - 1].bytes_in);
                }
            }
            EXPECT_EQ(c.points.back().ratio, compression_ratio(s.doc.text));
        }
    }
}

TEST(PrefixCurve, StepValidated) {
    EXPECT_THROW(prefix_curve(seg_of("A b."), PrefixUnit::sentence, 0), Error);
    EXPECT_THROW(parse_prefix_unit("word"), Error);
}
