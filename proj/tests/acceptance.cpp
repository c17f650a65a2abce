// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "compsig/compsig.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace compsig;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    enum Status { pass, fail, skip } status = fail;
    std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

std::string fmt(double v, int digits = 6) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = rank;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = average_ranks(a), rb = average_ranks(b);
    const double ma = mean(ra), mb = mean(rb);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

double standard_error(const std::vector<double>& v) { return sample_sd(v) / std::sqrt(static_cast<double>(v.size())); }

// Tokens grouped into sentences of `per` words: first letter upper-cased, final word closed with a period.
std::string sentencize(const std::vector<std::string>& tokens, std::size_t per) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string w = tokens[i];
        if (i % per == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        if (i % per == per - 1 || i + 1 == tokens.size()) w += '.';
        if (i) out += ' ';
        out += w;
    }
    return out;
}

std::vector<std::string> split_spaces(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

std::vector<FeatureVector> extract_all(const std::vector<SegmentedDocument>& docs, std::uint64_t seed) {
    std::vector<FeatureVector> out(docs.size());
    parallel_for(docs.size(), [&](std::size_t i) { out[i] = extract(docs[i], CompressorConfig{}, seed); });
    return out;
}

Matrix to_matrix(const std::vector<FeatureVector>& rows) {
    Matrix x(rows.size(), feature_count);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto v = rows[r].values();
        for (std::size_t c = 0; c < feature_count; ++c) x(r, c) = v[c];
    }
    return x;
}

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

int run_cli(const testutil::TempDir& dir, const std::vector<std::string>& args) {
    std::string cmd = quote(COMPSIG_CLI);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " >" + quote(dir.file("cli.out")) + " 2>" + quote(dir.file("cli.err"));
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------------------

Outcome entropy_endpoints() {
    double worst_dirac = 0.0, worst_uniform = 0.0;
    for (std::size_t n : {2u, 10u, 5000u}) {
        worst_dirac = std::max(worst_dirac, std::abs(regime_entropy(1.0, n)));
        worst_uniform = std::max(worst_uniform,
                                 std::abs(regime_entropy(1.0 / static_cast<double>(n), n) - std::log2(static_cast<double>(n))));
    }
    return verdict(worst_dirac == 0.0 && worst_uniform <= 1e-12,
                   "max |H(1)| = " + fmt(worst_dirac) + ", max |H(1/n) - log2 n| = " + fmt(worst_uniform));
}

Outcome sweep_trend() {
    SweepParams p;
    p.n = 5000;
    p.count = 20;
    p.tokens = 479;
    p.samples_per_h = 50;
    p.seed = kSeed;
    const auto rows = entropy_sweep(p);
    std::vector<double> ratio, entropy;
    for (const auto& r : rows) {
        ratio.push_back(r.mean_ratio);
        entropy.push_back(r.entropy_bits);
    }
    const double rho = spearman(ratio, entropy);
    return verdict(rows.size() == 20 && rho == 1.0, "spearman = " + fmt(rho, 17) + " over " + std::to_string(rows.size()) + " h values");
}

Outcome baseline_ordering() {
    const auto english = testutil::english_segmented();
    const auto vocab = count_vocabulary(english);
    std::vector<double> r_english, r_uniform, r_empirical;
    for (const auto& d : english) r_english.push_back(compression_ratio(d.doc.text));
    for (std::size_t i = 0; i < 200; ++i) {
        r_uniform.push_back(compression_ratio(
            random_baseline(vocab.words, vocab.weights, 479, BaselineMode::uniform, derive_seed(kSeed, "uniform-" + std::to_string(i)))));
        r_empirical.push_back(compression_ratio(random_baseline(vocab.words, vocab.weights, 479, BaselineMode::empirical,
                                                                derive_seed(kSeed, "empirical-" + std::to_string(i)))));
    }
    const double mu = mean(r_uniform), me = mean(r_empirical), mn = mean(r_english);
    const double se_ue = std::hypot(standard_error(r_uniform), standard_error(r_empirical));
    const double se_en = std::hypot(standard_error(r_empirical), standard_error(r_english));
    const double z_ue = (mu - me) / se_ue, z_en = (me - mn) / se_en;
    return verdict(z_ue > 3.0 && z_en > 3.0,
                   "uniform " + fmt(mu) + " > empirical " + fmt(me) + " > english " + fmt(mn) + " (n=" +
                       std::to_string(english.size()) + "); gaps " + fmt(z_ue, 4) + " and " + fmt(z_en, 4) + " SE");
}

Outcome prefix_regularity() {
    const std::string sentence = "The quick brown fox jumps over the lazy dog near the river.";
    std::string repeated;
    for (int i = 0; i < 50; ++i) repeated += (i ? " " : "") + sentence;
    const auto rep = segment({"repeated", "property", repeated, {}});
    const auto curve = prefix_curve(rep, PrefixUnit::sentence, 1);
    std::vector<std::size_t> rises;
    for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
        if (curve.points[i].k >= 5 && !(curve.points[i + 1].ratio < curve.points[i].ratio)) rises.push_back(curve.points[i + 1].k);
    }
    const double rep_slope = extract(rep, {}, kSeed).prefix_slope;
    const bool rep_ok = rep.sentences.size() == 50 && rises.empty() && rep_slope < 0.0;

    const EntropyRegime uniform(1.0 / 5000.0, 5000);
    const auto tokens = split_spaces(sample_text(uniform, 600, kSeed).text);
    const auto rnd = segment({"random", "property", sentencize(tokens, 12), {}});
    const double rnd_slope = extract(rnd, {}, kSeed).prefix_slope;
    const bool rnd_ok = rnd.sentences.size() == 50 && std::abs(rnd_slope) < 0.05;

    std::string rise_list;
    for (auto k : rises) rise_list += (rise_list.empty() ? "" : ",") + std::to_string(k);
    return verdict(rep_ok && rnd_ok, std::string("identical: ") + (rep_ok ? "ok" : "FAIL") + " (no decrease into k=" +
                                         (rise_list.empty() ? "none" : rise_list) + ", prefix_slope " + fmt(rep_slope) +
                                         "); uniform-random: " + (rnd_ok ? "ok" : "FAIL") + " (|prefix_slope| " +
                                         fmt(std::abs(rnd_slope)) + ", need < 0.05)");
}

Outcome split_oracle() {
    Rng rng(kSeed);
    std::size_t checked = 0, datasets = 0;
    double worst = 0.0;
    bool ok = true;
    while (datasets < 20) {
        const std::size_t n = 8 + rng.below(57);
        const std::size_t m = 1 + rng.below(4);
        const std::size_t classes = 2 + rng.below(2);
        Matrix x(n, m);
        std::vector<std::size_t> distinct(m);
        for (auto& d : distinct) d = 2 + rng.below(15);
        std::vector<std::string> y;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t f = 0; f < m; ++f) x(r, f) = static_cast<double>(rng.below(distinct[f])) * 0.5 - 1.0;
            const double s = x(r, 0) / static_cast<double>(distinct[0]) + 0.4 * rng.uniform();
            y.push_back("c" + std::to_string(static_cast<std::size_t>(std::clamp(s + 0.5, 0.0, 0.999999) * static_cast<double>(classes))));
        }
        if (std::set<std::string>(y.begin(), y.end()).size() < 2) continue;
        ++datasets;
        GBMConfig cfg;
        cfg.n_rounds = 5;
        cfg.max_leaves = 6;
        cfg.min_samples_leaf = 1 + rng.below(4);
        FitTrace trace;
        fit(x, y, cfg, {}, &trace);
        for (const auto& s : trace.splits) {
            const auto best = oracle::best_split(x, s.samples, trace.gradients[s.tree_index], trace.hessians[s.tree_index], cfg.l2_reg,
                                                 cfg.min_samples_leaf);
            const double diff = best.valid ? std::abs(best.gain - s.gain) : INFINITY;
            worst = std::max(worst, diff);
            ok = ok && diff <= 1e-9;
            ++checked;
        }
    }
    return verdict(ok && checked > 0, std::to_string(checked) + " splits over 20 datasets, max |gain - oracle| = " + fmt(worst));
}

Outcome shapley_correctness() {
    // (a) local accuracy on 1000 samples, binary and 3-class.
    Rng rng(kSeed + 6);
    Matrix x(1000, 5);
    std::vector<std::string> y2, y3;
    for (std::size_t r = 0; r < 1000; ++r) {
        for (std::size_t f = 0; f < 5; ++f) x(r, f) = rng.uniform();
        const double s = x(r, 0) + 0.5 * x(r, 1) - 0.3 * x(r, 2) + 0.3 * rng.uniform();
        y2.push_back(s > 0.6 ? "pos" : "neg");
        y3.push_back(s < 0.3 ? "a" : s < 0.8 ? "b" : "c");
    }
    GBMConfig cfg;
    cfg.n_rounds = 50;
    double worst_local = 0.0;
    for (const auto* y : {&y2, &y3}) {
        const auto ens = fit(x, *y, cfg);
        for (std::size_t c = 0; c < ens.classes.size(); ++c) {
            const auto sv = shap_values(ens, x, c);
            for (std::size_t r = 0; r < x.rows(); ++r) {
                const auto raw = raw_scores(ens, x.row(r));
                const double want = ens.n_scores() == 1 ? (c == 1 ? raw[0] : -raw[0]) : raw[c];
                double got = sv.expected_value;
                for (double v : sv.values[r]) got += v;
                worst_local = std::max(worst_local, std::abs(got - want));
            }
        }
    }

    // (b) coalition oracle on random and trained trees of depth <= 3 over <= 4 features.
    double worst_oracle = 0.0;
    std::size_t trees = 0;
    auto compare = [&](const Tree& t, std::size_t m, const std::vector<double>& point) {
        std::vector<double> phi(m, 0.0);
        tree_shap(t, point, phi);
        const auto want = oracle::shapley(t, point, m);
        for (std::size_t f = 0; f < m; ++f) worst_oracle = std::max(worst_oracle, std::abs(phi[f] - want[f]));
    };
    for (int i = 0; i < 300; ++i) {
        const std::size_t m = 1 + rng.below(4);
        const auto t = oracle::random_tree(rng, 1 + rng.below(3), m);
        std::vector<double> point(m);
        for (auto& v : point) v = rng.uniform();
        compare(t, m, point);
        ++trees;
    }
    Matrix x4(300, 4);
    for (std::size_t r = 0; r < 300; ++r) {
        for (std::size_t f = 0; f < 4; ++f) x4(r, f) = rng.uniform();
    }
    std::vector<std::string> y4;
    for (std::size_t r = 0; r < 300; ++r) y4.push_back(x4(r, 0) + x4(r, 3) > 1.0 ? "p" : "q");
    GBMConfig small;
    small.n_rounds = 20;
    small.max_leaves = 4; // at most 3 splits, hence depth <= 3
    small.min_samples_leaf = 5;
    for (const auto& round : fit(x4, y4, small).trees) {
        for (std::size_t r = 0; r < 10; ++r) compare(round[0], 4, {x4.row(r).begin(), x4.row(r).end()});
        ++trees;
    }
    return verdict(worst_local <= 1e-6 && worst_oracle <= 1e-9,
                   "local accuracy max error " + fmt(worst_local) + " (1000 samples); oracle max error " + fmt(worst_oracle) +
                       " over " + std::to_string(trees) + " trees");
}

Outcome synthetic_separability() {
    std::vector<SegmentedDocument> train, test;
    std::vector<std::string> y_train, y_test;
    for (double h : {0.2, 0.8}) {
        const EntropyRegime regime(h, 5000);
        const std::string label = "h" + fmt(h);
        for (std::size_t i = 0; i < 700; ++i) {
            const auto text = sentencize(split_spaces(sample_text(regime, 479, derive_seed(kSeed, label + "-" + std::to_string(i))).text), 12);
            auto seg = segment({label + "-" + std::to_string(i), label, text, {}});
            (i < 500 ? train : test).push_back(std::move(seg));
            (i < 500 ? y_train : y_test).push_back(label);
        }
    }
    const auto ens = fit(to_matrix(extract_all(train, kSeed)), y_train, GBMConfig{.seed = kSeed}, feature_columns());
    const auto m = evaluate(ens, to_matrix(extract_all(test, kSeed)), y_test);
    return verdict(m.accuracy >= 0.95, "test accuracy " + fmt(m.accuracy) + " on " + std::to_string(y_test.size()) +
                                           " documents (500 train / 200 test per class)");
}

std::string family(const std::string& label) {
    std::string l;
    for (char c : label) l += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (l.find("human") != std::string::npos) return "human";
    if (l.find("gpt") != std::string::npos) return "gpt";
    if (l.find("llama") != std::string::npos) return "llama";
    throw data_error("cannot map label '" + label + "' to human, gpt or llama");
}

Outcome parallel_corpus() {
    const char* path = std::getenv("COMPSIG_HAP_CORPUS");
    if (!path || !*path) return {Outcome::skip, "set COMPSIG_HAP_CORPUS to the Human-AI Parallel corpus JSONL to run"};
    std::vector<SegmentedDocument> docs;
    for (auto& d : load_jsonl(path)) docs.push_back(segment(std::move(d)));
    std::vector<FeatureVector> feats(docs.size());
    std::vector<char> usable(docs.size(), 0);
    parallel_for(docs.size(), [&](std::size_t i) {
        try {
            feats[i] = extract(docs[i], {}, kSeed);
            usable[i] = 1;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::data) throw;
        }
    });
    std::vector<FeatureVector> rows;
    std::vector<std::string> fine, coarse, binary;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (!usable[i]) continue;
        rows.push_back(feats[i]);
        fine.push_back(docs[i].doc.label);
        coarse.push_back(family(docs[i].doc.label));
        binary.push_back(coarse.back() == "human" ? "human" : "llm");
    }
    const Matrix x = to_matrix(rows);
    auto score = [&](const std::vector<std::string>& y) {
        const auto split = stratified_split(y, 0.8, kSeed);
        auto subset = [&](const std::vector<std::size_t>& idx) {
            Matrix s(idx.size(), x.cols());
            std::vector<std::string> ys;
            for (std::size_t r = 0; r < idx.size(); ++r) {
                for (std::size_t c = 0; c < x.cols(); ++c) s(r, c) = x(idx[r], c);
                ys.push_back(y[idx[r]]);
            }
            return std::pair{s, ys};
        };
        const auto [xtr, ytr] = subset(split.train);
        const auto [xte, yte] = subset(split.test);
        return evaluate(fit(xtr, ytr, GBMConfig{.seed = kSeed}, feature_columns()), xte, yte);
    };
    const auto m2 = score(binary), m7 = score(fine), m3 = score(coarse);
    const bool ok = std::abs(m2.accuracy - 0.93) <= 0.05 && std::abs(m2.macro_f1 - 0.88) <= 0.05 &&
                    std::abs(m7.accuracy - 0.65) <= 0.05 && std::abs(m3.accuracy - 0.93) <= 0.05;
    return verdict(ok, std::to_string(rows.size()) + " documents; binary acc " + fmt(m2.accuracy, 4) + " macro F1 " +
                           fmt(m2.macro_f1, 4) + "; 7-class acc " + fmt(m7.accuracy, 4) + "; 3-class acc " + fmt(m3.accuracy, 4));
}

Outcome blindness_and_replay() {
    testutil::TempDir dir;
    auto docs = testutil::english_sample();
    save_jsonl(dir.file("a.jsonl"), docs);
    Rng rng(kSeed + 9);
    std::vector<std::string> labels;
    for (const auto& d : docs) labels.push_back(d.label + "-" + std::to_string(rng.below(3)));
    rng.shuffle(labels);
    for (std::size_t i = 0; i < docs.size(); ++i) docs[i].label = labels[i];
    rng.shuffle(docs);
    save_jsonl(dir.file("b.jsonl"), docs);

    bool ok = true;
    std::string detail;
    for (const auto* name : {"a", "b"}) {
        if (run_cli(dir, {"features", dir.file(std::string(name) + ".jsonl"), dir.file(std::string(name) + ".csv"), "--seed", "7"}) != 0) {
            return verdict(false, "features run failed: " + testutil::slurp(dir.file("cli.err")));
        }
    }
    auto by_id = [](const Table& t) {
        std::map<std::string, std::vector<std::string>> out;
        const std::size_t id = t.column("doc_id"), label = t.column("label");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            std::vector<std::string> cells;
            for (std::size_t c = 0; c < t.columns.size(); ++c) {
                if (c != label) cells.push_back(text_cell(t, r, c));
            }
            out[text_cell(t, r, id)] = cells;
        }
        return out;
    };
    const auto fa = by_id(load_csv(dir.file("a.csv"))), fb = by_id(load_csv(dir.file("b.csv")));
    const bool blind = fa == fb && fa.size() == docs.size();
    detail = std::string("permuted/relabelled corpus features ") + (blind ? "identical" : "DIFFER");
    ok = ok && blind;

    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> runs = {
        {{"features", dir.file("a.jsonl"), dir.file("f.csv"), "--seed", "3"}, {dir.file("f.csv"), dir.file("f.csv.meta.json")}},
        {{"train", dir.file("b.csv"), dir.file("m.json"), dir.file("metrics.json"), "--rounds", "10", "--seed", "3"},
         {dir.file("m.json"), dir.file("metrics.json")}},
        {{"importance", dir.file("m.json"), dir.file("b.csv"), dir.file("imp.csv")}, {dir.file("imp.csv")}},
        {{"sweep", dir.file("s.csv"), "--count", "5", "--samples", "4", "--seed", "3"}, {dir.file("s.csv"), dir.file("s.csv.meta.json")}},
        {{"curves", dir.file("a.jsonl"), dir.file("c.csv"), "--min-count", "5"}, {dir.file("c.csv"), dir.file("c.csv.meta.json")}},
        {{"baselines", dir.file("bl.jsonl"), "--vocab", dir.file("a.jsonl"), "--mode", "empirical", "--n-docs", "20"},
         {dir.file("bl.jsonl"), dir.file("bl.jsonl.meta.json")}},
    };
    std::size_t replayed = 0, identical = 0;
    for (const auto& [args, outputs] : runs) {
        if (run_cli(dir, args) != 0) {
            ok = false;
            detail += "; " + args[0] + " failed: " + testutil::slurp(dir.file("cli.err"));
            continue;
        }
        std::vector<std::string> first;
        for (const auto& o : outputs) first.push_back(testutil::slurp(o));
        for (const auto& o : outputs) std::filesystem::remove(o);
        ++replayed;
        if (run_cli(dir, {"replay", outputs.front() + ".manifest.json"}) != 0) {
            ok = false;
            detail += "; replay of " + args[0] + " failed";
            continue;
        }
        bool same = true;
        for (std::size_t i = 0; i < outputs.size(); ++i) same = same && testutil::slurp(outputs[i]) == first[i];
        identical += same;
        ok = ok && same;
    }
    detail += "; " + std::to_string(identical) + "/" + std::to_string(replayed) + " replayed manifests byte-identical";
    return verdict(ok, detail);
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 entropy endpoints", entropy_endpoints},
        {"2 entropy sweep trend", sweep_trend},
        {"3 baseline ordering", baseline_ordering},
        {"4 prefix-curve regularity", prefix_regularity},
        {"5 histogram split oracle", split_oracle},
        {"6 shapley correctness", shapley_correctness},
        {"7 synthetic separability", synthetic_separability},
        {"8 human-ai parallel corpus", parallel_corpus},
        {"9 feature blindness and replay", blindness_and_replay},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {Outcome::fail, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* tag = o.status == Outcome::pass ? "PASS" : o.status == Outcome::skip ? "SKIP" : "FAIL";
        failures += o.status == Outcome::fail;
        std::cout << tag << "  [" << name << "] " << o.detail << " (" << fmt(secs, 3) << " s)" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
