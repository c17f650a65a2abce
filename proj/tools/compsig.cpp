// compsig: command-line front end for corpus preparation, compression
// features, entropy sweeps, prefix curves and the boosted-tree classifier.
//
// Every subcommand writes <primary output>.manifest.json recording its full
// argument list; `compsig replay <manifest>` re-runs it.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "compsig/compsig.hpp"

namespace {

using namespace compsig;
using ojson = nlohmann::ordered_json;

struct Common {
    std::uint64_t seed = 0;
    int level = default_compression_level;
    bool no_header = false;

    CompressorConfig compressor() const {
        CompressorConfig cfg{level, !no_header};
        cfg.validate();
        return cfg;
    }
};

void add_seed(CLI::App* cmd, Common& c) { cmd->add_option("--seed", c.seed, "Seed for every random step")->capture_default_str(); }

void add_codec(CLI::App* cmd, Common& c) {
    cmd->add_option("--level", c.level, "gzip compression level")->check(CLI::Range(0, 9))->capture_default_str();
    cmd->add_flag("--no-header", c.no_header, "Exclude the 18 gzip framing bytes from C(x)");
}

void write_manifest(const std::string& primary_output, const std::vector<std::string>& argv, const std::string& command,
                    std::uint64_t seed, const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
    ojson m;
    m["tool"] = "compsig";
    m["version"] = tool_version;
    m["command"] = command;
    m["argv"] = argv;
    m["seed"] = seed;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    save_json(primary_output + ".manifest.json", m);
}

ojson sidecar_base(const std::string& command, const Common& c) {
    ojson j;
    j["tool"] = "compsig";
    j["version"] = tool_version;
    j["command"] = command;
    j["seed"] = c.seed;
    j["compressor"] = compressor_json(c.compressor());
    j["conventions"] = conventions_json();
    return j;
}

std::vector<SegmentedDocument> segment_all(const std::vector<Document>& docs, const SentenceSplitter& splitter,
                                           bool skip_invalid, std::size_t& skipped) {
    std::vector<std::optional<SegmentedDocument>> segs(docs.size());
    std::vector<std::string> errors(docs.size());
    parallel_for(docs.size(), [&](std::size_t i) {
        try {
            segs[i] = segment(docs[i], splitter);
        } catch (const Error& e) {
            if (!skip_invalid || e.kind() != ErrorKind::data) throw;
            errors[i] = e.what();
        }
    });
    std::vector<SegmentedDocument> out;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (segs[i]) out.push_back(std::move(*segs[i]));
        else std::cerr << "compsig: skipped: " << errors[i] << '\n';
    }
    skipped += docs.size() - out.size();
    return out;
}

SentenceSplitter make_splitter(const std::string& abbreviations) {
    return abbreviations.empty() ? SentenceSplitter{} : SentenceSplitter{load_abbreviations(abbreviations)};
}

// "a=b,c=d" label remapping; unmapped labels pass through.
std::map<std::string, std::string> parse_label_map(const std::string& spec) {
    std::map<std::string, std::string> m;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
            throw usage_error("bad label mapping '" + item + "' (expected from=to)");
        }
        m[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return m;
}

void remap(std::vector<std::string>& labels, const std::map<std::string, std::string>& m) {
    for (auto& l : labels) {
        if (auto it = m.find(l); it != m.end()) l = it->second;
    }
}

FeatureData load_features(const std::string& path, const std::string& label_map) {
    auto d = with_context(path, [&] { return feature_data(load_csv(path)); });
    remap(d.labels, parse_label_map(label_map));
    return d;
}

// ---------------------------------------------------------------------------

struct PreprocessArgs {
    std::string in, out, config;
    PreprocessRules rules;
};

void run_preprocess(const PreprocessArgs& a, const std::vector<std::string>& argv) {
    PreprocessRules rules = a.rules;
    if (!a.config.empty()) {
        const auto cfg = load_preprocess_config(a.config);
        rules.strip_urls |= cfg.rules.strip_urls;
        rules.strip_emoji |= cfg.rules.strip_emoji;
        rules.strip_markup |= cfg.rules.strip_markup;
        rules.collapse_whitespace |= cfg.rules.collapse_whitespace;
        rules.nfc |= cfg.rules.nfc;
    }
    auto docs = load_jsonl(a.in);
    parallel_for(docs.size(), [&](std::size_t i) { docs[i] = preprocess(docs[i], rules); });
    save_jsonl(a.out, docs);
    write_manifest(a.out, argv, "preprocess", 0, {a.in}, {a.out});
    std::cerr << "compsig: preprocessed " << docs.size() << " documents\n";
}

struct FeaturesArgs {
    Common common;
    std::string in, out, abbreviations, unit = "character";
    std::size_t prefix_step = 200;
    std::size_t min_words = 0, max_words = unbounded_words;
    bool skip_invalid = false;
};

void run_features(const FeaturesArgs& a, const std::vector<std::string>& argv) {
    const auto cfg = a.common.compressor();
    const FeatureOptions opts{parse_prefix_unit(a.unit), a.prefix_step};
    if (opts.prefix_step < 1) throw usage_error("--prefix-step must be >= 1");
    const auto docs = load_jsonl(a.in);
    std::size_t skipped = 0;
    auto segs = segment_all(docs, make_splitter(a.abbreviations), a.skip_invalid, skipped);
    segs = filter_word_count(segs, a.min_words, a.max_words);
    std::vector<std::optional<FeatureRow>> rows(segs.size());
    std::vector<std::string> errors(segs.size());
    parallel_for(segs.size(), [&](std::size_t i) {
        try {
            rows[i] = FeatureRow{segs[i].doc.id, segs[i].doc.label, segs[i].word_count, extract(segs[i], cfg, a.common.seed, opts)};
        } catch (const Error& e) {
            if (!a.skip_invalid || e.kind() != ErrorKind::data) throw;
            errors[i] = e.what();
        }
    });
    std::vector<FeatureRow> kept;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i]) kept.push_back(std::move(*rows[i]));
        else {
            std::cerr << "compsig: skipped: " << errors[i] << '\n';
            ++skipped;
        }
    }
    save_csv(a.out, features_table(kept));
    auto meta = sidecar_base("features", a.common);
    meta["prefix_unit"] = a.unit;
    meta["prefix_step"] = a.prefix_step;
    meta["word_filter"] = {{"min", a.min_words}, {"max", a.max_words}};
    meta["documents_in"] = docs.size();
    meta["documents_out"] = kept.size();
    meta["documents_skipped"] = skipped;
    meta["columns"] = features_table({}).columns;
    save_json(a.out + ".meta.json", meta);
    write_manifest(a.out, argv, "features", a.common.seed, {a.in}, {a.out, a.out + ".meta.json"});
    std::cerr << "compsig: wrote features for " << kept.size() << " documents (" << skipped << " skipped)\n";
}

struct SweepArgs {
    Common common;
    SweepParams params;
    std::string out;
};

void run_sweep(SweepArgs a, const std::vector<std::string>& argv) {
    a.params.seed = a.common.seed;
    const auto rows = entropy_sweep(a.params, a.common.compressor());
    save_csv(a.out, sweep_table(rows, a.params));
    auto meta = sidecar_base("sweep", a.common);
    meta["n"] = a.params.n;
    meta["count"] = a.params.count;
    meta["tokens"] = a.params.tokens;
    meta["samples_per_h"] = a.params.samples_per_h;
    meta["vocabulary"] = "pseudo-words w000001..";
    save_json(a.out + ".meta.json", meta);
    write_manifest(a.out, argv, "sweep", a.common.seed, {}, {a.out, a.out + ".meta.json"});
}

struct BaselinesArgs {
    Common common;
    std::string vocab, mode = "uniform", out;
    std::size_t n_docs = 1000, tokens = 479;
};

Vocabulary load_vocabulary(const std::string& path) {
    if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") {
        std::size_t skipped = 0;
        return count_vocabulary(segment_all(load_jsonl(path), SentenceSplitter{}, true, skipped));
    }
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    Vocabulary v;
    std::vector<double> counts;
    bool weighted = true;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        v.words.push_back(line.substr(0, tab));
        if (tab == std::string::npos) {
            weighted = false;
        } else {
            counts.push_back(with_context(path + ":" + std::to_string(line_no), [&] { return parse_double(line.substr(tab + 1)); }));
        }
    }
    if (weighted && !counts.empty()) {
        double total = 0.0;
        for (double c : counts) total += c;
        for (double c : counts) v.weights.push_back(c / total);
    }
    return v;
}

void run_baselines(const BaselinesArgs& a, const std::vector<std::string>& argv) {
    const auto mode = parse_baseline_mode(a.mode);
    const auto vocab = load_vocabulary(a.vocab);
    if (mode == BaselineMode::empirical && vocab.weights.empty()) {
        throw usage_error("empirical mode needs word weights (a .jsonl corpus or a word<TAB>count file)");
    }
    std::vector<Document> docs(a.n_docs);
    parallel_for(a.n_docs, [&](std::size_t i) {
        char id[32];
        std::snprintf(id, sizeof id, "%s-%06zu", a.mode.c_str(), i + 1);
        docs[i] = {id, "random_" + a.mode,
                   random_baseline(vocab.words, vocab.weights, a.tokens, mode, derive_seed(a.common.seed, i)),
                   {{"baseline_mode", a.mode}}};
    });
    save_jsonl(a.out, docs);
    auto meta = sidecar_base("baselines", a.common);
    meta["mode"] = a.mode;
    meta["n_docs"] = a.n_docs;
    meta["tokens"] = a.tokens;
    meta["vocabulary_size"] = vocab.words.size();
    save_json(a.out + ".meta.json", meta);
    write_manifest(a.out, argv, "baselines", a.common.seed, {a.vocab}, {a.out, a.out + ".meta.json"});
}

struct CurvesArgs {
    Common common;
    std::string in, out, raw, abbreviations, unit = "sentence", grouping = "binned";
    std::size_t step = 1, bins = 20, min_count = 100;
    std::size_t min_words = 0, max_words = unbounded_words;
    bool skip_invalid = false;
};

void run_curves(const CurvesArgs& a, const std::vector<std::string>& argv) {
    const auto cfg = a.common.compressor();
    const auto unit = parse_prefix_unit(a.unit);
    if (a.grouping != "binned" && a.grouping != "by-k") throw usage_error("--grouping must be binned or by-k");
    std::size_t skipped = 0;
    auto segs = segment_all(load_jsonl(a.in), make_splitter(a.abbreviations), a.skip_invalid, skipped);
    segs = filter_word_count(segs, a.min_words, a.max_words);
    std::vector<PrefixCurve> curves(segs.size());
    parallel_for(segs.size(), [&](std::size_t i) { curves[i] = prefix_curve(segs[i], unit, a.step, cfg); });
    const auto summary = a.grouping == "binned" ? bin_curves(curves, a.bins, a.min_count) : group_curves_by_k(curves);
    save_csv(a.out, binned_table(summary));
    std::vector<std::string> outputs{a.out, a.out + ".meta.json"};
    if (!a.raw.empty()) {
        save_csv(a.raw, curves_table(curves));
        outputs.push_back(a.raw);
    }
    auto meta = sidecar_base("curves", a.common);
    meta["unit"] = a.unit;
    meta["step"] = a.step;
    meta["grouping"] = a.grouping;
    meta["bins"] = a.bins;
    meta["min_count"] = a.min_count;
    meta["documents"] = segs.size();
    meta["documents_skipped"] = skipped;
    save_json(a.out + ".meta.json", meta);
    write_manifest(a.out, argv, "curves", a.common.seed, {a.in}, outputs);
}

struct TrainArgs {
    Common common;
    GBMConfig gbm;
    std::string features, model, metrics, labels;
    double split = 0.8;
};

void run_train(TrainArgs a, const std::vector<std::string>& argv) {
    a.gbm.seed = a.common.seed;
    const auto data = load_features(a.features, a.labels);
    const auto split = stratified_split(data.labels, a.split, a.common.seed);
    std::vector<std::string> train_labels, test_labels;
    for (auto i : split.train) train_labels.push_back(data.labels[i]);
    for (auto i : split.test) test_labels.push_back(data.labels[i]);
    const Matrix train_x = data.x.select_rows(split.train);
    const auto ens = fit(train_x, train_labels, a.gbm, data.columns);
    save_model(ens, a.model);

    ojson m;
    m["split"] = {{"strategy", "stratified"}, {"train_fraction", a.split}, {"seed", a.common.seed},
                  {"n_train", split.train.size()}, {"n_test", split.test.size()}};
    m["classes"] = ens.classes;
    m["train"] = metrics_to_json(evaluate(ens, train_x, train_labels));
    if (!split.test.empty()) {
        const auto test = evaluate(ens, data.x.select_rows(split.test), test_labels);
        m["test"] = metrics_to_json(test);
        std::cout << "test set (" << split.test.size() << " documents)\n" << metrics_table(test);
    }
    save_json(a.metrics, m);
    write_manifest(a.model, argv, "train", a.common.seed, {a.features}, {a.model, a.metrics});
}

struct EvalArgs {
    std::string model, features, metrics, labels;
};

void run_eval(const EvalArgs& a, const std::vector<std::string>& argv) {
    const auto ens = load_model(a.model);
    const auto data = load_features(a.features, a.labels);
    const auto metrics = evaluate(ens, select_columns(data.x, data.columns, ens.feature_names), data.labels);
    ojson m;
    m["model"] = a.model;
    m["classes"] = ens.classes;
    m["test"] = metrics_to_json(metrics);
    save_json(a.metrics, m);
    std::cout << metrics_table(metrics);
    write_manifest(a.metrics, argv, "eval", ens.config.seed, {a.model, a.features}, {a.metrics});
}

struct ImportanceArgs {
    std::string model, features, out, per_sample, cls;
};

void run_importance(const ImportanceArgs& a, const std::vector<std::string>& argv) {
    const auto ens = load_model(a.model);
    const auto data = load_features(a.features, "");
    const Matrix x = select_columns(data.x, data.columns, ens.feature_names);
    std::vector<std::size_t> classes;
    if (!a.cls.empty()) {
        classes = encode_labels(ens.classes, {a.cls});
    } else if (ens.n_scores() == 1) {
        classes = {1};
    } else {
        for (std::size_t c = 0; c < ens.classes.size(); ++c) classes.push_back(c);
    }
    Table summary{{"class", "feature", "mean_abs_shap"}, {}};
    Table samples{{"doc_id", "class", "expected_value"}, {}};
    for (const auto& f : ens.feature_names) samples.columns.push_back(f);
    for (std::size_t c : classes) {
        const auto res = shap_values(ens, x, c);
        for (std::size_t f = 0; f < ens.feature_names.size(); ++f) {
            summary.rows.push_back({ens.classes[c], ens.feature_names[f], res.mean_abs[f]});
        }
        if (!a.per_sample.empty()) {
            for (std::size_t r = 0; r < x.rows(); ++r) {
                std::vector<Cell> row{data.doc_ids[r], ens.classes[c], res.expected_value};
                for (double v : res.values[r]) row.emplace_back(v);
                samples.rows.push_back(std::move(row));
            }
        }
    }
    save_csv(a.out, summary);
    std::vector<std::string> outputs{a.out};
    if (!a.per_sample.empty()) {
        save_csv(a.per_sample, samples);
        outputs.push_back(a.per_sample);
    }
    write_manifest(a.out, argv, "importance", ens.config.seed, {a.model, a.features}, outputs);
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& argv);

void run_replay(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw data_error("cannot open " + manifest_path);
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw data_error(manifest_path + ": " + e.what());
    }
    if (!m.contains("argv") || !m["argv"].is_array()) throw data_error(manifest_path + ": manifest has no argv");
    const auto argv = m["argv"].get<std::vector<std::string>>();
    if (!argv.empty() && argv.front() == "replay") throw data_error("refusing to replay a replay manifest");
    if (const int rc = run(argv); rc != 0) throw Error(static_cast<ErrorKind>(rc), "replayed command failed");
}

int run(const std::vector<std::string>& argv) {
    CLI::App app{"Compression-based statistical signatures of text"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    PreprocessArgs pre;
    auto* c_pre = app.add_subcommand("preprocess", "Apply cleanup rules to a JSONL corpus");
    c_pre->add_option("input", pre.in, "Input JSONL")->required()->check(CLI::ExistingFile);
    c_pre->add_option("output", pre.out, "Output JSONL")->required();
    c_pre->add_option("--config", pre.config, "key = value rules file")->check(CLI::ExistingFile);
    c_pre->add_flag("--strip-urls", pre.rules.strip_urls);
    c_pre->add_flag("--strip-emoji", pre.rules.strip_emoji);
    c_pre->add_flag("--strip-markup", pre.rules.strip_markup);
    c_pre->add_flag("--collapse-whitespace", pre.rules.collapse_whitespace);
    c_pre->add_flag("--nfc", pre.rules.nfc);

    FeaturesArgs feat;
    auto* c_feat = app.add_subcommand("features", "Compute the feature battery for every document");
    c_feat->add_option("input", feat.in, "Input JSONL")->required()->check(CLI::ExistingFile);
    c_feat->add_option("output", feat.out, "Output CSV")->required();
    c_feat->add_option("--prefix-step", feat.prefix_step, "Prefix step in units")->capture_default_str();
    c_feat->add_option("--prefix-unit", feat.unit, "character|sentence")->capture_default_str();
    c_feat->add_option("--abbreviations", feat.abbreviations, "Abbreviation list for sentence splitting");
    c_feat->add_option("--min-words", feat.min_words, "Keep documents with at least this many words");
    c_feat->add_option("--max-words", feat.max_words, "Keep documents with at most this many words");
    c_feat->add_flag("--skip-invalid", feat.skip_invalid, "Skip documents that cannot be measured instead of failing");
    add_seed(c_feat, feat.common);
    add_codec(c_feat, feat.common);

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep", "Compression ratio across the fixed-entropy family");
    c_sweep->add_option("output", sweep.out, "Output CSV")->required();
    c_sweep->add_option("--n", sweep.params.n, "Vocabulary size")->check(CLI::Range(2ul, 100000000ul))->capture_default_str();
    c_sweep->add_option("--count", sweep.params.count, "Number of h values")->check(CLI::Range(2ul, 100000ul))->capture_default_str();
    c_sweep->add_option("--tokens", sweep.params.tokens, "Tokens per text")->check(CLI::Range(1ul, 100000000ul))->capture_default_str();
    c_sweep->add_option("--samples", sweep.params.samples_per_h, "Texts per h")->check(CLI::Range(1ul, 100000000ul))->capture_default_str();
    add_seed(c_sweep, sweep.common);
    add_codec(c_sweep, sweep.common);

    BaselinesArgs base;
    auto* c_base = app.add_subcommand("baselines", "Random-word reference documents");
    c_base->add_option("output", base.out, "Output JSONL")->required();
    c_base->add_option("--vocab", base.vocab, "JSONL corpus, or word[<TAB>count] list")->required()->check(CLI::ExistingFile);
    c_base->add_option("--mode", base.mode, "uniform|empirical")->capture_default_str();
    c_base->add_option("--n-docs", base.n_docs, "Documents to generate")->capture_default_str();
    c_base->add_option("--tokens", base.tokens, "Words per document")->check(CLI::Range(1ul, 100000000ul))->capture_default_str();
    add_seed(c_base, base.common);

    CurvesArgs curves;
    auto* c_curves = app.add_subcommand("curves", "Prefix compression curves aggregated per label");
    c_curves->add_option("input", curves.in, "Input JSONL")->required()->check(CLI::ExistingFile);
    c_curves->add_option("output", curves.out, "Summary CSV")->required();
    c_curves->add_option("--unit", curves.unit, "sentence|character")->capture_default_str();
    c_curves->add_option("--step", curves.step, "Prefix step in units")->check(CLI::Range(1ul, 100000000ul))->capture_default_str();
    c_curves->add_option("--grouping", curves.grouping, "binned (uniform bins) or by-k (one row per prefix length)")->capture_default_str();
    c_curves->add_option("--bins", curves.bins, "Uniform bins over the k axis")->capture_default_str();
    c_curves->add_option("--min-count", curves.min_count, "Minimum points per emitted bin")->capture_default_str();
    c_curves->add_option("--raw", curves.raw, "Also write every curve point to this CSV");
    c_curves->add_option("--abbreviations", curves.abbreviations, "Abbreviation list for sentence splitting");
    c_curves->add_option("--min-words", curves.min_words);
    c_curves->add_option("--max-words", curves.max_words);
    c_curves->add_flag("--skip-invalid", curves.skip_invalid);
    add_seed(c_curves, curves.common);
    add_codec(c_curves, curves.common);

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Fit the boosted-tree classifier on a feature CSV");
    c_train->add_option("features", train.features, "Feature CSV")->required()->check(CLI::ExistingFile);
    c_train->add_option("model", train.model, "Output model JSON")->required();
    c_train->add_option("metrics", train.metrics, "Output metrics JSON")->required();
    c_train->add_option("--labels", train.labels, "Label remapping, e.g. gpt4o=llm,llama8b=llm");
    c_train->add_option("--split", train.split, "Training fraction of the stratified split")->capture_default_str();
    c_train->add_option("--rounds", train.gbm.n_rounds)->capture_default_str();
    c_train->add_option("--learning-rate", train.gbm.learning_rate)->capture_default_str();
    c_train->add_option("--max-leaves", train.gbm.max_leaves)->capture_default_str();
    c_train->add_option("--max-bins", train.gbm.max_bins)->capture_default_str();
    c_train->add_option("--min-samples-leaf", train.gbm.min_samples_leaf)->capture_default_str();
    c_train->add_option("--l2", train.gbm.l2_reg)->capture_default_str();
    add_seed(c_train, train.common);

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "Evaluate a model on a feature CSV");
    c_eval->add_option("model", ev.model)->required()->check(CLI::ExistingFile);
    c_eval->add_option("features", ev.features)->required()->check(CLI::ExistingFile);
    c_eval->add_option("metrics", ev.metrics, "Output metrics JSON")->required();
    c_eval->add_option("--labels", ev.labels, "Label remapping, e.g. gpt4o=llm");

    ImportanceArgs imp;
    auto* c_imp = app.add_subcommand("importance", "Mean absolute Shapley value per feature");
    c_imp->add_option("model", imp.model)->required()->check(CLI::ExistingFile);
    c_imp->add_option("features", imp.features)->required()->check(CLI::ExistingFile);
    c_imp->add_option("output", imp.out, "Output CSV")->required();
    c_imp->add_option("--class", imp.cls, "Class to attribute (default: positive class, or every class)");
    c_imp->add_option("--per-sample", imp.per_sample, "Also write per-document attributions");

    std::string manifest;
    auto* c_replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    c_replay->add_option("manifest", manifest)->required()->check(CLI::ExistingFile);

    std::vector<std::string> args(argv.rbegin(), argv.rend()); // CLI11 consumes a reversed vector
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "compsig: error: usage: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::usage);
    }

    try {
        if (c_pre->parsed()) run_preprocess(pre, argv);
        else if (c_feat->parsed()) run_features(feat, argv);
        else if (c_sweep->parsed()) run_sweep(sweep, argv);
        else if (c_base->parsed()) run_baselines(base, argv);
        else if (c_curves->parsed()) run_curves(curves, argv);
        else if (c_train->parsed()) run_train(train, argv);
        else if (c_eval->parsed()) run_eval(ev, argv);
        else if (c_imp->parsed()) run_importance(imp, argv);
        else if (c_replay->parsed()) run_replay(manifest);
    } catch (const Error& e) {
        const char* kind = e.kind() == ErrorKind::usage ? "usage" : e.kind() == ErrorKind::data ? "data" : "internal";
        std::cerr << "compsig: error: " << kind << ": " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "compsig: error: internal: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::internal);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args);
}
