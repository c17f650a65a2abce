#pragma once
// Exact path-dependent Shapley attributions for the tree ensembles in model.hpp.
//
// For every tree, the value of a feature coalition S is the expected leaf
// output when features in S follow the sample and the others are averaged
// over both children weighted by training cover. The polynomial-time
// recursion below tracks, along each root-to-leaf path, the weight of every
// subset size for each unique feature on the path.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "compsig/error.hpp"
#include "compsig/model.hpp"

namespace compsig {

namespace detail {

struct PathElement {
    std::int32_t feature = -1;
    double zero_fraction = 0.0; // share of cover that flows here when the feature is unknown
    double one_fraction = 0.0;  // 1 if the sample itself goes this way, else 0
    double weight = 0.0;
};

using Path = std::vector<PathElement>;

inline void extend_path(Path& path, double zero_fraction, double one_fraction, std::int32_t feature) {
    const std::size_t depth = path.size();
    path.push_back({feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0});
    const double denom = static_cast<double>(depth + 1);
    for (std::size_t i = depth; i-- > 0;) {
        path[i + 1].weight += one_fraction * path[i].weight * static_cast<double>(i + 1) / denom;
        path[i].weight = zero_fraction * path[i].weight * static_cast<double>(depth - i) / denom;
    }
}

inline void unwind_path(Path& path, std::size_t index) {
    const std::size_t depth = path.size() - 1;
    const double one = path[index].one_fraction;
    const double zero = path[index].zero_fraction;
    const double denom = static_cast<double>(depth + 1);
    double next = path[depth].weight;
    for (std::size_t i = depth; i-- > 0;) {
        if (one != 0.0) {
            const double tmp = path[i].weight;
            path[i].weight = next * denom / (static_cast<double>(i + 1) * one);
            next = tmp - path[i].weight * zero * static_cast<double>(depth - i) / denom;
        } else {
            path[i].weight = path[i].weight * denom / (zero * static_cast<double>(depth - i));
        }
    }
    for (std::size_t i = index; i < depth; ++i) {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
    path.pop_back();
}

// Total weight of the path with element `index` removed, without modifying it.
inline double unwound_sum(const Path& path, std::size_t index) {
    const std::size_t depth = path.size() - 1;
    const double one = path[index].one_fraction;
    const double zero = path[index].zero_fraction;
    const double denom = static_cast<double>(depth + 1);
    double next = path[depth].weight;
    double total = 0.0;
    for (std::size_t i = depth; i-- > 0;) {
        if (one != 0.0) {
            const double tmp = next * denom / (static_cast<double>(i + 1) * one);
            total += tmp;
            next = path[i].weight - tmp * zero * static_cast<double>(depth - i) / denom;
        } else {
            total += path[i].weight / zero / (static_cast<double>(depth - i) / denom);
        }
    }
    return total;
}

inline void tree_shap_recurse(const Tree& tree, std::span<const double> x, std::span<double> phi, std::size_t node,
                              Path path, double zero_fraction, double one_fraction, std::int32_t feature) {
    extend_path(path, zero_fraction, one_fraction, feature);
    const TreeNode& n = tree.nodes[node];
    if (n.is_leaf()) {
        for (std::size_t i = 1; i < path.size(); ++i) {
            const double w = unwound_sum(path, i);
            const auto& el = path[i];
            phi[static_cast<std::size_t>(el.feature)] += w * (el.one_fraction - el.zero_fraction) * n.value;
        }
        return;
    }
    const auto split = static_cast<std::size_t>(n.feature);
    const std::size_t hot = tree.child(node, x[split]);
    const std::size_t cold = hot == static_cast<std::size_t>(n.left) ? static_cast<std::size_t>(n.right)
                                                                     : static_cast<std::size_t>(n.left);
    double incoming_zero = 1.0;
    double incoming_one = 1.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (path[i].feature == n.feature) {
            incoming_zero = path[i].zero_fraction;
            incoming_one = path[i].one_fraction;
            unwind_path(path, i);
            break;
        }
    }
    if (!(n.cover > 0.0)) throw data_error("tree node without cover; cannot attribute");
    const double hot_zero = tree.nodes[hot].cover / n.cover;
    const double cold_zero = tree.nodes[cold].cover / n.cover;
    tree_shap_recurse(tree, x, phi, hot, path, hot_zero * incoming_zero, incoming_one, n.feature);
    tree_shap_recurse(tree, x, phi, cold, path, cold_zero * incoming_zero, 0.0, n.feature);
}

inline double expected_value_at(const Tree& tree, std::size_t node) {
    const TreeNode& n = tree.nodes[node];
    if (n.is_leaf()) return n.value;
    if (!(n.cover > 0.0)) throw data_error("tree node without cover; cannot attribute");
    const auto l = static_cast<std::size_t>(n.left);
    const auto r = static_cast<std::size_t>(n.right);
    return (tree.nodes[l].cover * expected_value_at(tree, l) + tree.nodes[r].cover * expected_value_at(tree, r)) / n.cover;
}

} // namespace detail

// Cover-weighted mean leaf value.
inline double tree_expected_value(const Tree& tree) { return detail::expected_value_at(tree, 0); }

// Adds the attributions of one tree for sample x into phi (one slot per feature).
inline void tree_shap(const Tree& tree, std::span<const double> x, std::span<double> phi) {
    detail::tree_shap_recurse(tree, x, phi, 0, {}, 1.0, 1.0, -1);
}

struct ShapResult {
    std::size_t class_index = 0;
    double expected_value = 0.0;            // base score plus expected tree outputs
    std::vector<std::vector<double>> values; // [sample][feature]
    std::vector<double> mean_abs;            // per feature
};

// Attributions of the raw (pre-link) score of class `class_index`. With two
// classes the model carries one logit for classes[1]; class 0 gets its negation.
inline ShapResult shap_values(const Ensemble& ens, const Matrix& x, std::size_t class_index) {
    if (ens.trees.empty()) throw data_error("ensemble has no trees; train it before attributing");
    check_arity(ens, x);
    if (x.rows() < 1) throw data_error("attribution needs at least one sample");
    if (class_index >= ens.classes.size()) throw usage_error("class index out of range");
    const bool binary = ens.n_scores() == 1;
    const std::size_t score = binary ? 0 : class_index;
    const double sign = binary && class_index == 0 ? -1.0 : 1.0;

    ShapResult out;
    out.class_index = class_index;
    out.expected_value = ens.base_scores[score];
    for (const auto& round : ens.trees) out.expected_value += tree_expected_value(round[score]);
    out.expected_value *= sign;

    const std::size_t nf = x.cols();
    out.values.assign(x.rows(), std::vector<double>(nf, 0.0));
    out.mean_abs.assign(nf, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto& phi = out.values[r];
        for (const auto& round : ens.trees) tree_shap(round[score], x.row(r), phi);
        for (std::size_t f = 0; f < nf; ++f) {
            phi[f] *= sign;
            out.mean_abs[f] += std::abs(phi[f]);
        }
    }
    for (double& v : out.mean_abs) v /= static_cast<double>(x.rows());
    return out;
}

// Mean absolute attribution per feature over the rows of x.
inline std::vector<double> shap_global(const Ensemble& ens, const Matrix& x, std::size_t class_index) {
    return shap_values(ens, x, class_index).mean_abs;
}

} // namespace compsig
