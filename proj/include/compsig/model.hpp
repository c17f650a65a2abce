#pragma once
// Histogram gradient-boosted classification trees.
//
// Features are quantile-binned once; every tree is grown leaf-wise on per-bin
// gradient/hessian sums. Two classes use a single logit score per round; more
// classes use one score tree per class per round under a softmax.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "compsig/error.hpp"
#include "compsig/rng.hpp"

namespace compsig {

// ---------------------------------------------------------------------------
// Dense row-major matrix

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return {};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != m.cols_) throw data_error("ragged matrix rows");
            std::copy(rows[r].begin(), rows[r].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(r * m.cols_));
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    void push_row(std::span<const double> values) {
        if (rows_ == 0 && cols_ == 0) cols_ = values.size();
        if (values.size() != cols_) throw data_error("row arity mismatch");
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    Matrix select_rows(const std::vector<std::size_t>& idx) const {
        Matrix m(idx.size(), cols_);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(idx[i] * cols_), cols_,
                        m.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
        }
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Reorders the columns of `x` (named `have`) into the order `want`.
inline Matrix select_columns(const Matrix& x, const std::vector<std::string>& have, const std::vector<std::string>& want) {
    if (have.size() != x.cols()) throw data_error("column name count does not match matrix arity");
    std::vector<std::size_t> src;
    for (const auto& name : want) {
        auto it = std::find(have.begin(), have.end(), name);
        if (it == have.end()) throw data_error("missing feature column '" + name + "'");
        src.push_back(static_cast<std::size_t>(it - have.begin()));
    }
    Matrix out(x.rows(), want.size());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < want.size(); ++c) out(r, c) = x(r, src[c]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Configuration

struct GBMConfig {
    std::size_t n_rounds = 200;
    double learning_rate = 0.1;
    std::size_t max_leaves = 31;
    std::size_t max_bins = 255;
    std::size_t min_samples_leaf = 20;
    double l2_reg = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_rounds < 1) throw usage_error("n_rounds must be >= 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw usage_error("learning_rate must be in (0, 1]");
        if (max_leaves < 2) throw usage_error("max_leaves must be >= 2");
        if (max_bins < 2) throw usage_error("max_bins must be >= 2");
        if (min_samples_leaf < 1) throw usage_error("min_samples_leaf must be >= 1");
        if (!(l2_reg >= 0.0) || !std::isfinite(l2_reg)) throw usage_error("l2_reg must be finite and >= 0");
    }
};

// ---------------------------------------------------------------------------
// Binning

// Per-feature sorted thresholds; bin(v) = number of edges <= v, so bin b holds
// [edges[b-1], edges[b]). Features with at most max_bins distinct values get one
// bin per value; otherwise edges sit at data values nearest above evenly spaced quantiles.
inline std::vector<std::vector<double>> build_bins(const Matrix& x, std::size_t max_bins) {
    if (x.rows() < 1) throw data_error("cannot bin an empty matrix");
    if (max_bins < 2) throw usage_error("max_bins must be >= 2");
    std::vector<std::vector<double>> edges(x.cols());
    std::vector<double> col(x.rows());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        for (std::size_t r = 0; r < x.rows(); ++r) col[r] = x(r, f);
        std::sort(col.begin(), col.end());
        std::vector<double> distinct = col;
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        auto& e = edges[f];
        if (distinct.size() <= max_bins) {
            e.assign(distinct.begin() + 1, distinct.end());
            continue;
        }
        for (std::size_t j = 1; j < max_bins; ++j) {
            const double pos = static_cast<double>(j) / static_cast<double>(max_bins) * static_cast<double>(col.size() - 1);
            const auto lo = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(lo);
            const double q = lo + 1 < col.size() ? col[lo] + frac * (col[lo + 1] - col[lo]) : col[lo];
            auto it = std::lower_bound(distinct.begin(), distinct.end(), q);
            if (it == distinct.begin()) ++it; // the minimum is never an edge
            if (it == distinct.end()) break;
            if (e.empty() || *it > e.back()) e.push_back(*it);
        }
    }
    return edges;
}

inline std::size_t bin_of(const std::vector<double>& edges, double v) {
    return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
}

// ---------------------------------------------------------------------------
// Trees

struct TreeNode {
    std::int32_t feature = -1; // -1 marks a leaf
    double threshold = 0.0;    // go left when x < threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;        // leaf output (already scaled by the learning rate)
    bool missing_left = true;  // direction for NaN inputs
    double cover = 0.0;        // training samples reaching the node
    double gain = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    std::size_t child(std::size_t node, double v) const {
        const TreeNode& n = nodes[node];
        const bool left = std::isnan(v) ? n.missing_left : v < n.threshold;
        return static_cast<std::size_t>(left ? n.left : n.right);
    }

    std::size_t leaf_index(std::span<const double> x) const {
        std::size_t i = 0;
        while (!nodes[i].is_leaf()) i = child(i, x[static_cast<std::size_t>(nodes[i].feature)]);
        return i;
    }

    double predict(std::span<const double> x) const { return nodes[leaf_index(x)].value; }
};

struct Ensemble {
    std::vector<std::string> classes;
    std::vector<std::string> feature_names;
    std::vector<double> base_scores;
    std::vector<std::vector<double>> bin_edges;
    std::vector<std::vector<Tree>> trees; // [round][score]
    GBMConfig config;

    std::size_t n_scores() const { return classes.size() == 2 ? 1 : classes.size(); }
};

// Record of one split made during training, for verification against a brute-force search.
struct SplitRecord {
    std::size_t tree_index = 0; // round * n_scores + score
    std::size_t node = 0;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
    std::vector<std::uint32_t> samples;
};

struct FitTrace {
    std::vector<SplitRecord> splits;
    std::vector<std::vector<double>> gradients; // per tree
    std::vector<std::vector<double>> hessians;  // per tree
    std::vector<double> train_loss;             // after each round
};

namespace detail {

inline double sigmoid(double f) {
    if (f >= 0) return 1.0 / (1.0 + std::exp(-f));
    const double e = std::exp(f);
    return e / (1.0 + e);
}

inline void softmax_inplace(std::vector<double>& s) {
    const double m = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double& v : s) {
        v = std::exp(v - m);
        z += v;
    }
    for (double& v : s) v /= z;
}

struct BestSplit {
    bool valid = false;
    std::size_t feature = 0;
    std::size_t bin = 0; // left holds bins <= bin
    double gain = 0.0;
    double left_count = 0.0;
};

struct NodeWork {
    std::size_t node = 0;
    std::vector<std::uint32_t> samples;
    double g = 0.0;
    double h = 0.0;
    BestSplit best;
};

inline double split_score(double g, double h, double lambda) { return h + lambda > 0.0 ? g * g / (h + lambda) : 0.0; }

class TreeGrower {
public:
    TreeGrower(const std::vector<std::vector<std::uint16_t>>& binned, const std::vector<std::size_t>& n_bins,
               const GBMConfig& cfg)
        : binned_(binned), n_bins_(n_bins), cfg_(cfg) {}

    Tree grow(const std::vector<double>& g, const std::vector<double>& h, std::size_t tree_index,
              const std::vector<std::vector<double>>& edges, FitTrace* trace) {
        Tree tree;
        std::vector<NodeWork> open;
        NodeWork root;
        root.samples.resize(g.size());
        std::iota(root.samples.begin(), root.samples.end(), 0u);
        tree.nodes.emplace_back();
        evaluate(root, g, h);
        open.push_back(std::move(root));
        std::size_t leaves = 1;
        std::vector<NodeWork> done;
        while (leaves < cfg_.max_leaves) {
            std::size_t pick = open.size();
            for (std::size_t i = 0; i < open.size(); ++i) {
                if (!open[i].best.valid) continue;
                if (pick == open.size() || open[i].best.gain > open[pick].best.gain ||
                    (open[i].best.gain == open[pick].best.gain && open[i].node < open[pick].node))
                    pick = i;
            }
            if (pick == open.size()) break;
            NodeWork work = std::move(open[pick]);
            open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));

            const auto& col = binned_[work.best.feature];
            NodeWork l, r;
            for (std::uint32_t s : work.samples) (col[s] <= work.best.bin ? l : r).samples.push_back(s);
            TreeNode& n = tree.nodes[work.node];
            n.feature = static_cast<std::int32_t>(work.best.feature);
            n.threshold = edges[work.best.feature][work.best.bin];
            n.gain = work.best.gain;
            n.cover = static_cast<double>(work.samples.size());
            n.missing_left = l.samples.size() >= r.samples.size();
            l.node = tree.nodes.size();
            r.node = l.node + 1;
            n.left = static_cast<std::int32_t>(l.node);
            n.right = static_cast<std::int32_t>(r.node);
            if (trace) {
                trace->splits.push_back({tree_index, work.node, work.best.feature, n.threshold, work.best.gain, work.samples});
            }
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            evaluate(l, g, h);
            evaluate(r, g, h);
            open.push_back(std::move(l));
            open.push_back(std::move(r));
            ++leaves;
        }
        for (auto& w : open) finish_leaf(tree, w);
        return tree;
    }

private:
    void finish_leaf(Tree& tree, const NodeWork& w) const {
        TreeNode& n = tree.nodes[w.node];
        n.cover = static_cast<double>(w.samples.size());
        const double denom = w.h + cfg_.l2_reg;
        n.value = denom > 0.0 ? -cfg_.learning_rate * w.g / denom : 0.0;
    }

    void evaluate(NodeWork& w, const std::vector<double>& g, const std::vector<double>& h) {
        w.g = 0.0;
        w.h = 0.0;
        for (std::uint32_t s : w.samples) {
            w.g += g[s];
            w.h += h[s];
        }
        w.best = {};
        const std::size_t n = w.samples.size();
        if (n < 2 * cfg_.min_samples_leaf) return;
        const double parent = split_score(w.g, w.h, cfg_.l2_reg);
        for (std::size_t f = 0; f < binned_.size(); ++f) {
            const std::size_t nb = n_bins_[f];
            if (nb < 2) continue;
            hg_.assign(nb, 0.0);
            hh_.assign(nb, 0.0);
            hc_.assign(nb, 0);
            const auto& col = binned_[f];
            for (std::uint32_t s : w.samples) {
                hg_[col[s]] += g[s];
                hh_[col[s]] += h[s];
                ++hc_[col[s]];
            }
            double gl = 0.0, hl = 0.0;
            std::size_t cl = 0;
            for (std::size_t b = 0; b + 1 < nb; ++b) {
                gl += hg_[b];
                hl += hh_[b];
                cl += hc_[b];
                if (hc_[b] == 0) continue; // same partition as the previous bin
                if (cl < cfg_.min_samples_leaf) continue;
                if (n - cl < cfg_.min_samples_leaf) break;
                const double gain = 0.5 * (split_score(gl, hl, cfg_.l2_reg) +
                                           split_score(w.g - gl, w.h - hl, cfg_.l2_reg) - parent);
                if (gain > min_gain && (!w.best.valid || gain > w.best.gain)) {
                    w.best = {true, f, b, gain, static_cast<double>(cl)};
                }
            }
        }
    }

    static constexpr double min_gain = 1e-12;

    const std::vector<std::vector<std::uint16_t>>& binned_;
    const std::vector<std::size_t>& n_bins_;
    const GBMConfig& cfg_;
    std::vector<double> hg_, hh_;
    std::vector<std::size_t> hc_;
};

} // namespace detail

// Index of each label in the sorted class list.
inline std::vector<std::size_t> encode_labels(const std::vector<std::string>& classes, const std::vector<std::string>& y) {
    std::vector<std::size_t> out;
    out.reserve(y.size());
    for (const auto& label : y) {
        auto it = std::lower_bound(classes.begin(), classes.end(), label);
        if (it == classes.end() || *it != label) throw data_error("unknown label '" + label + "'");
        out.push_back(static_cast<std::size_t>(it - classes.begin()));
    }
    return out;
}

inline std::vector<double> raw_scores(const Ensemble& ens, std::span<const double> x) {
    std::vector<double> s = ens.base_scores;
    for (const auto& round : ens.trees) {
        for (std::size_t k = 0; k < round.size(); ++k) s[k] += round[k].predict(x);
    }
    return s;
}

inline std::vector<double> scores_to_proba(const Ensemble& ens, std::vector<double> s) {
    if (ens.n_scores() == 1) {
        const double p = detail::sigmoid(s[0]);
        return {1.0 - p, p};
    }
    detail::softmax_inplace(s);
    return s;
}

namespace detail {

inline double mean_log_loss(const Ensemble& ens, const std::vector<std::vector<double>>& scores,
                            const std::vector<std::size_t>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto p = scores_to_proba(ens, scores[i]);
        total -= std::log(std::max(p[y[i]], 1e-300));
    }
    return total / static_cast<double>(y.size());
}

} // namespace detail

inline Ensemble fit(const Matrix& x, const std::vector<std::string>& labels, const GBMConfig& cfg,
                    const std::vector<std::string>& feature_names = {}, FitTrace* trace = nullptr) {
    cfg.validate();
    if (x.rows() != labels.size()) throw data_error("feature rows and labels differ in length");
    if (x.rows() == 0) throw data_error("cannot fit on an empty dataset");
    if (!feature_names.empty() && feature_names.size() != x.cols()) throw data_error("feature name count mismatch");
    if (cfg.max_bins > std::numeric_limits<std::uint16_t>::max()) throw usage_error("max_bins too large");
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
            if (!std::isfinite(x(r, c))) {
                const std::string name = feature_names.empty() ? "#" + std::to_string(c) : feature_names[c];
                throw data_error("non-finite value in feature '" + name + "' at row " + std::to_string(r));
            }
        }
    }

    Ensemble ens;
    ens.config = cfg;
    {
        const std::set<std::string> distinct(labels.begin(), labels.end());
        ens.classes.assign(distinct.begin(), distinct.end());
    }
    if (ens.classes.size() < 2) throw data_error("training data has a single class; need at least 2");
    if (feature_names.empty()) {
        for (std::size_t c = 0; c < x.cols(); ++c) ens.feature_names.push_back("f" + std::to_string(c));
    } else {
        ens.feature_names = feature_names;
    }
    const auto y = encode_labels(ens.classes, labels);
    const std::size_t n = x.rows();
    const std::size_t k_classes = ens.classes.size();
    const std::size_t k_scores = ens.n_scores();

    std::vector<double> prior(k_classes, 0.0);
    for (std::size_t c : y) prior[c] += 1.0;
    for (double& p : prior) p /= static_cast<double>(n);
    if (k_scores == 1) {
        ens.base_scores = {std::log(prior[1] / prior[0])};
    } else {
        for (double p : prior) ens.base_scores.push_back(std::log(p));
    }

    ens.bin_edges = build_bins(x, cfg.max_bins);
    std::vector<std::vector<std::uint16_t>> binned(x.cols(), std::vector<std::uint16_t>(n));
    std::vector<std::size_t> n_bins(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        n_bins[f] = ens.bin_edges[f].size() + 1;
        for (std::size_t r = 0; r < n; ++r) binned[f][r] = static_cast<std::uint16_t>(bin_of(ens.bin_edges[f], x(r, f)));
    }

    std::vector<std::vector<double>> scores(n, ens.base_scores);
    std::vector<double> g(n), h(n);
    detail::TreeGrower grower(binned, n_bins, cfg);
    std::vector<std::vector<double>> proba(n);
    std::vector<double> bin_row(x.cols());
    for (std::size_t round = 0; round < cfg.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) proba[i] = scores_to_proba(ens, scores[i]);
        std::vector<Tree> round_trees;
        for (std::size_t k = 0; k < k_scores; ++k) {
            const std::size_t cls = k_scores == 1 ? 1 : k;
            for (std::size_t i = 0; i < n; ++i) {
                const double p = proba[i][cls];
                g[i] = p - (y[i] == cls ? 1.0 : 0.0);
                h[i] = std::max(p * (1.0 - p), 1e-16);
            }
            const std::size_t tree_index = round * k_scores + k;
            if (trace) {
                trace->gradients.push_back(g);
                trace->hessians.push_back(h);
            }
            round_trees.push_back(grower.grow(g, h, tree_index, ens.bin_edges, trace));
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < k_scores; ++k) scores[i][k] += round_trees[k].predict(x.row(i));
        }
        ens.trees.push_back(std::move(round_trees));
        if (trace) trace->train_loss.push_back(detail::mean_log_loss(ens, scores, y));
    }
    return ens;
}

inline void check_arity(const Ensemble& ens, const Matrix& x) {
    if (ens.classes.empty()) throw data_error("ensemble is not trained");
    if (x.cols() != ens.feature_names.size()) {
        throw data_error("feature arity mismatch: model expects " + std::to_string(ens.feature_names.size()) +
                         ", got " + std::to_string(x.cols()));
    }
}

inline std::vector<std::vector<double>> predict_proba(const Ensemble& ens, const Matrix& x) {
    check_arity(ens, x);
    std::vector<std::vector<double>> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = scores_to_proba(ens, raw_scores(ens, x.row(r)));
    return out;
}

// Columns are matched to the model's features by name.
inline std::vector<std::vector<double>> predict_proba(const Ensemble& ens, const Matrix& x,
                                                      const std::vector<std::string>& columns) {
    return predict_proba(ens, select_columns(x, columns, ens.feature_names));
}

inline std::vector<std::size_t> predict(const Ensemble& ens, const Matrix& x) {
    std::vector<std::size_t> out;
    for (const auto& p : predict_proba(ens, x)) {
        out.push_back(static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct Metrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<ClassMetrics> per_class;
    std::vector<std::vector<std::size_t>> confusion; // [true][predicted]
    bool zero_division = false; // some precision/recall had an empty denominator and was set to 0
};

inline Metrics compute_metrics(const std::vector<std::string>& classes, const std::vector<std::size_t>& truth,
                               const std::vector<std::size_t>& predicted) {
    if (truth.size() != predicted.size()) throw data_error("truth and prediction lengths differ");
    if (truth.empty()) throw data_error("cannot evaluate on an empty set");
    const std::size_t k = classes.size();
    Metrics m;
    m.confusion.assign(k, std::vector<std::size_t>(k, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++m.confusion[truth[i]][predicted[i]];
        correct += truth[i] == predicted[i];
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
    double f1_sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t tp = m.confusion[c][c], pred = 0, support = 0;
        for (std::size_t j = 0; j < k; ++j) {
            pred += m.confusion[j][c];
            support += m.confusion[c][j];
        }
        ClassMetrics cm{classes[c], 0.0, 0.0, 0.0, support};
        if (pred) cm.precision = static_cast<double>(tp) / static_cast<double>(pred);
        else m.zero_division = true;
        if (support) cm.recall = static_cast<double>(tp) / static_cast<double>(support);
        else m.zero_division = true;
        if (cm.precision + cm.recall > 0.0) cm.f1 = 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
        f1_sum += cm.f1;
        m.per_class.push_back(cm);
    }
    m.macro_f1 = f1_sum / static_cast<double>(k);
    return m;
}

inline Metrics evaluate(const Ensemble& ens, const Matrix& x, const std::vector<std::string>& labels) {
    if (labels.size() != x.rows()) throw data_error("feature rows and labels differ in length");
    const auto truth = encode_labels(ens.classes, labels);
    return compute_metrics(ens.classes, truth, predict(ens, x));
}

inline nlohmann::ordered_json metrics_to_json(const Metrics& m) {
    nlohmann::ordered_json j;
    j["accuracy"] = m.accuracy;
    j["macro_f1"] = m.macro_f1;
    j["zero_division_warning"] = m.zero_division;
    j["per_class"] = nlohmann::ordered_json::array();
    for (const auto& c : m.per_class) {
        j["per_class"].push_back({{"label", c.label}, {"precision", c.precision}, {"recall", c.recall},
                                  {"f1", c.f1}, {"support", c.support}});
    }
    j["confusion"] = m.confusion;
    return j;
}

inline std::string metrics_table(const Metrics& m) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    std::size_t width = 5;
    for (const auto& c : m.per_class) width = std::max(width, c.label.size());
    os << std::string(width, ' ') << "  precision  recall     f1  support\n";
    for (const auto& c : m.per_class) {
        os << c.label << std::string(width - c.label.size(), ' ') << "     " << c.precision << "  " << c.recall << "  "
           << c.f1 << "  " << c.support << '\n';
    }
    os << "accuracy " << m.accuracy << "  macro_f1 " << m.macro_f1;
    if (m.zero_division) os << "  (warning: zero-division in some class metric, reported as 0)";
    os << '\n';
    return os.str();
}

// Stratified train/test split: each label's indices are shuffled with their own
// seed stream and the first round(fraction · n) go to training.
struct TrainTestSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

inline TrainTestSplit stratified_split(const std::vector<std::string>& labels, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw usage_error("split fraction must be in (0, 1)");
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);
    TrainTestSplit out;
    for (auto& [label, idx] : by_label) {
        Rng rng(derive_seed(seed, label));
        rng.shuffle(idx);
        auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
        if (idx.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
        else n_train = idx.size();
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

// ---------------------------------------------------------------------------
// Model file

inline constexpr const char* model_format = "compsig-gbm";
inline constexpr int model_version = 1;

inline nlohmann::ordered_json to_json(const Ensemble& ens) {
    nlohmann::ordered_json j;
    j["format"] = model_format;
    j["version"] = model_version;
    j["config"] = {{"n_rounds", ens.config.n_rounds},
                   {"learning_rate", ens.config.learning_rate},
                   {"max_leaves", ens.config.max_leaves},
                   {"max_bins", ens.config.max_bins},
                   {"min_samples_leaf", ens.config.min_samples_leaf},
                   {"l2_reg", ens.config.l2_reg},
                   {"seed", ens.config.seed}};
    j["classes"] = ens.classes;
    j["feature_names"] = ens.feature_names;
    j["base_scores"] = ens.base_scores;
    j["bin_edges"] = ens.bin_edges;
    auto rounds = nlohmann::ordered_json::array();
    for (const auto& round : ens.trees) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& t : round) {
            nlohmann::ordered_json tj;
            std::vector<std::int32_t> feature, left, right;
            std::vector<double> threshold, value, cover, gain;
            std::vector<int> missing_left;
            for (const auto& n : t.nodes) {
                feature.push_back(n.feature);
                threshold.push_back(n.threshold);
                left.push_back(n.left);
                right.push_back(n.right);
                value.push_back(n.value);
                missing_left.push_back(n.missing_left ? 1 : 0);
                cover.push_back(n.cover);
                gain.push_back(n.gain);
            }
            tj["feature"] = feature;
            tj["threshold"] = threshold;
            tj["left"] = left;
            tj["right"] = right;
            tj["value"] = value;
            tj["missing_left"] = missing_left;
            tj["cover"] = cover;
            tj["gain"] = gain;
            arr.push_back(std::move(tj));
        }
        rounds.push_back(std::move(arr));
    }
    j["trees"] = std::move(rounds);
    return j;
}

namespace detail {

inline void validate_tree(const Tree& t, std::size_t n_features) {
    if (t.nodes.empty()) throw data_error("model file has an empty tree");
    const auto n = static_cast<std::int32_t>(t.nodes.size());
    std::vector<int> parents(t.nodes.size(), 0);
    for (const auto& node : t.nodes) {
        if (node.is_leaf()) {
            if (!std::isfinite(node.value)) throw data_error("model file has a non-finite leaf value");
            continue;
        }
        if (static_cast<std::size_t>(node.feature) >= n_features) throw data_error("model file split feature out of range");
        for (std::int32_t c : {node.left, node.right}) {
            if (c <= 0 || c >= n) throw data_error("model file child index out of range");
            ++parents[static_cast<std::size_t>(c)];
        }
    }
    for (std::size_t i = 1; i < parents.size(); ++i) {
        if (parents[i] != 1) throw data_error("model file tree is not a binary tree");
    }
    // Children always follow their parent in the node array, which rules out cycles.
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const auto& node = t.nodes[i];
        if (!node.is_leaf() && (node.left <= static_cast<std::int32_t>(i) || node.right <= static_cast<std::int32_t>(i))) {
            throw data_error("model file tree children precede their parent");
        }
    }
}

} // namespace detail

inline Ensemble from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != model_format) throw data_error("not a compsig model file");
        const int version = j.at("version").get<int>();
        if (version != model_version) {
            throw data_error("unsupported model version " + std::to_string(version) + " (expected " +
                             std::to_string(model_version) + ")");
        }
        Ensemble ens;
        const auto& c = j.at("config");
        ens.config.n_rounds = c.at("n_rounds").get<std::size_t>();
        ens.config.learning_rate = c.at("learning_rate").get<double>();
        ens.config.max_leaves = c.at("max_leaves").get<std::size_t>();
        ens.config.max_bins = c.at("max_bins").get<std::size_t>();
        ens.config.min_samples_leaf = c.at("min_samples_leaf").get<std::size_t>();
        ens.config.l2_reg = c.at("l2_reg").get<double>();
        ens.config.seed = c.at("seed").get<std::uint64_t>();
        ens.classes = j.at("classes").get<std::vector<std::string>>();
        ens.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        ens.base_scores = j.at("base_scores").get<std::vector<double>>();
        ens.bin_edges = j.at("bin_edges").get<std::vector<std::vector<double>>>();
        if (ens.classes.size() < 2) throw data_error("model file has fewer than 2 classes");
        if (!std::is_sorted(ens.classes.begin(), ens.classes.end())) throw data_error("model file classes not sorted");
        if (ens.base_scores.size() != ens.n_scores()) throw data_error("model file base score count mismatch");
        if (ens.bin_edges.size() != ens.feature_names.size()) throw data_error("model file bin edge count mismatch");
        for (const auto& round : j.at("trees")) {
            std::vector<Tree> trees;
            for (const auto& tj : round) {
                const auto feature = tj.at("feature").get<std::vector<std::int32_t>>();
                const auto threshold = tj.at("threshold").get<std::vector<double>>();
                const auto left = tj.at("left").get<std::vector<std::int32_t>>();
                const auto right = tj.at("right").get<std::vector<std::int32_t>>();
                const auto value = tj.at("value").get<std::vector<double>>();
                const auto missing_left = tj.at("missing_left").get<std::vector<int>>();
                const auto cover = tj.at("cover").get<std::vector<double>>();
                const auto gain = tj.at("gain").get<std::vector<double>>();
                const std::size_t m = feature.size();
                for (std::size_t len : {threshold.size(), left.size(), right.size(), value.size(), missing_left.size(),
                                        cover.size(), gain.size()}) {
                    if (len != m) throw data_error("model file tree arrays differ in length");
                }
                Tree t;
                for (std::size_t i = 0; i < m; ++i) {
                    t.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i], missing_left[i] != 0,
                                       cover[i], gain[i]});
                }
                detail::validate_tree(t, ens.feature_names.size());
                trees.push_back(std::move(t));
            }
            if (trees.size() != ens.n_scores()) throw data_error("model file round has wrong tree count");
            ens.trees.push_back(std::move(trees));
        }
        if (ens.trees.size() != ens.config.n_rounds) throw data_error("model file round count differs from n_rounds");
        return ens;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("corrupt model file: ") + e.what());
    }
}

inline void save_model(const Ensemble& ens, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path);
    out << to_json(ens).dump(1) << '\n';
    if (!out) throw data_error("write failed: " + path);
}

inline Ensemble load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw data_error(path + ": parse error: " + e.what());
    }
    return with_context(path, [&] { return from_json(j); });
}

} // namespace compsig
