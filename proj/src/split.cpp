#include "tsvc/split.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

namespace tsvc {

namespace {

// Relative threshold below which the orthogonalized candidate column is
// treated as lying in the span of the base design.
constexpr double kSpanTol = 1e-10;

GlmOptions glm_options(const SplitOptions& opts) {
    GlmOptions g;
    g.max_iter = opts.glm_max_iter;
    g.tol = opts.glm_tol;
    return g;
}

// The tree whose leaf is being split: the existing one, or a fresh
// single-leaf tree for a predictor that is still a plain linear term.
CoefficientTree tree_for_split(const ModelStructure& structure, int j) {
    auto it = structure.trees.find(j);
    if (it != structure.trees.end()) return it->second;
    if (std::find(structure.linear.begin(), structure.linear.end(), j) ==
        structure.linear.end())
        throw invalid_args_error("predictor " + std::to_string(j) +
                                 " is neither a tree nor a linear term");
    return CoefficientTree(j);
}

// Column index of the (j, node_id) term inside a build_design layout.
Eigen::Index locate_term(const DesignInfo& info, int j, int node_id, bool fresh_tree) {
    for (std::size_t k = 0; k < info.columns.size(); ++k) {
        const DesignColumn& col = info.columns[k];
        if (fresh_tree) {
            if (col.kind == DesignColumn::Kind::linear && col.predictor == j)
                return static_cast<Eigen::Index>(k);
        } else {
            if (col.kind == DesignColumn::Kind::leaf && col.predictor == j &&
                col.leaf_id == node_id)
                return static_cast<Eigen::Index>(k);
        }
    }
    throw invalid_args_error("node " + std::to_string(node_id) + " of predictor " +
                             std::to_string(j) + " has no design column");
}

}  // namespace

std::vector<double> candidate_split_points(const Eigen::VectorXd& values, Scale scale,
                                           const Eigen::VectorXd& node_mask,
                                           int min_node_size) {
    if (values.size() != node_mask.size())
        throw invalid_args_error("node mask length does not match column");
    std::vector<double> in_node;
    in_node.reserve(static_cast<std::size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (node_mask[i] != 0.0) in_node.push_back(values[i]);
    if (in_node.empty())
        throw invalid_args_error("candidate_split_points called on an empty node");
    std::sort(in_node.begin(), in_node.end());

    const auto node_n = static_cast<long>(in_node.size());
    std::vector<double> points;
    if (scale == Scale::binary) {
        // Both levels present -> the single threshold 0 ({0} vs {1}).
        const long zeros = std::count(in_node.begin(), in_node.end(), 0.0);
        if (zeros >= min_node_size && node_n - zeros >= min_node_size)
            points.push_back(0.0);
        return points;
    }

    long left = 0;
    for (std::size_t k = 0; k + 1 < in_node.size(); ++k) {
        ++left;
        if (in_node[k] == in_node[k + 1]) continue;  // threshold only between distinct values
        if (left < min_node_size) continue;
        if (node_n - left < min_node_size) break;
        points.push_back(0.5 * (in_node[k] + in_node[k + 1]));
    }
    return points;
}

ModelStructure split_structure(const ModelStructure& structure, int j, int node_id,
                               int m, double c) {
    ModelStructure out = structure;
    auto it = out.trees.find(j);
    if (it == out.trees.end()) {
        auto lin = std::find(out.linear.begin(), out.linear.end(), j);
        if (lin == out.linear.end())
            throw invalid_args_error("predictor " + std::to_string(j) +
                                     " is neither a tree nor a linear term");
        out.linear.erase(lin);
        it = out.trees.emplace(j, CoefficientTree(j)).first;
    }
    it->second.split_leaf(node_id, m, c);
    return out;
}

SplitCandidate score_split(const ModelStructure& structure, int j, int node_id, int m,
                           double c, const Dataset& data, const Family& family,
                           const SplitOptions& opts) {
    const ModelStructure split = split_structure(structure, j, node_id, m, c);

    const DesignInfo base = build_design(structure, data);
    const DesignInfo wide = build_design(split, data);
    const GlmOptions g = glm_options(opts);
    const GlmFit fit_base = fit_glm(base.design, data.response(), family, g);
    const GlmFit fit_wide = fit_glm(wide.design, data.response(), family, g);

    SplitCandidate cand;
    cand.predictor = j;
    cand.node_id = node_id;
    cand.modifier = m;
    cand.split_point = c;
    cand.lr_statistic = fit_base.deviance - fit_wide.deviance;
    return cand;
}

MaxSelected max_selected(const ModelStructure& structure, int j, int node_id, int m,
                         const Dataset& data, const Family& family,
                         const SplitOptions& opts,
                         const Eigen::VectorXd* modifier_values) {
    if (m == j)
        throw invalid_args_error("a predictor cannot modify its own coefficient");
    if (modifier_values && modifier_values->size() != data.n_rows())
        throw invalid_args_error("modifier_values length does not match the data");
    const CoefficientTree tree = tree_for_split(structure, j);
    const bool fresh = structure.trees.find(j) == structure.trees.end();
    const Eigen::VectorXd mask = region_indicator(tree.leaf_region(node_id), data);

    const Eigen::VectorXd& xm = modifier_values ? *modifier_values : data.values(m);
    const std::vector<double> points = candidate_split_points(
        xm, data.predictor(m).scale, mask, opts.min_node_size);
    if (points.empty())
        throw no_admissible_split_error("no admissible split point for modifier " +
                                        std::to_string(m) + " in node " +
                                        std::to_string(node_id));

    const DesignInfo base = build_design(structure, data);
    const Eigen::Index q = base.design.cols();
    const Eigen::Index n = base.design.rows();
    const Eigen::Index k0 = locate_term(base, j, node_id, fresh);
    const Eigen::VectorXd term = base.design.col(k0);  // x_j masked to the node
    const Eigen::VectorXd& y = data.response();

    const GlmOptions g = glm_options(opts);
    const GlmFit fit_base = fit_glm(base.design, y, family, g);

    MaxSelected best;
    best.predictor = j;
    best.node_id = node_id;
    best.modifier = m;
    best.t_max = -std::numeric_limits<double>::infinity();

    if (family.distribution() == Distribution::gaussian) {
        // Exact one-column update: adding column l to the base design lowers
        // the residual sum of squares by (l'r)^2 / (l'l - b'(B'B)^{-1}b) with
        // b = B'l and r the base residual.  Row contributions accumulate as
        // the threshold sweeps upward, so the whole scan costs one pass over
        // the node plus a q x q solve per candidate.
        const Eigen::MatrixXd gram = base.design.transpose() * base.design;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        const Eigen::VectorXd r = y - base.design * fit_base.coefficients;

        // Node rows sorted by modifier value.
        std::vector<Eigen::Index> order;
        for (Eigen::Index i = 0; i < n; ++i)
            if (mask[i] != 0.0) order.push_back(i);
        std::sort(order.begin(), order.end(),
                  [&](Eigen::Index a, Eigen::Index b) { return xm[a] < xm[b]; });

        Eigen::VectorXd b = Eigen::VectorXd::Zero(q);
        double ll = 0.0;  // l'l
        double lr = 0.0;  // l'r
        std::size_t next = 0;
        for (const double c : points) {
            while (next < order.size() && xm[order[next]] <= c) {
                const Eigen::Index i = order[next];
                b += term[i] * base.design.row(i).transpose();
                ll += term[i] * term[i];
                lr += term[i] * r[i];
                ++next;
            }
            const double denom = ll - b.dot(ldlt.solve(b));
            if (!(denom > kSpanTol * std::max(ll, 1.0))) {
                ++best.n_discarded;
                continue;
            }
            const double t = lr * lr / denom;
            if (t > best.t_max) {
                best.t_max = t;
                best.best_split_point = c;
            }
        }
    } else {
        Eigen::MatrixXd wide(n, q + 1);
        wide.leftCols(q) = base.design;
        Eigen::VectorXd warm(q + 1);
        warm.head(q) = fit_base.coefficients;
        warm[q] = 0.0;
        GlmOptions gw = g;
        gw.warm_start = &warm;
        for (const double c : points) {
            for (Eigen::Index i = 0; i < n; ++i)
                wide(i, q) = (mask[i] != 0.0 && xm[i] <= c) ? term[i] : 0.0;

            // Warm-start from the neighbouring candidate; that chain can run
            // into a singular weighted gram (capped etas zero out the rows
            // that identify the new column) or stall short of the optimum,
            // so fall back to the default start before giving up.
            GlmFit fit;
            bool fitted = false;
            try {
                fit = fit_glm(wide, y, family, gw);
                fitted = true;
            } catch (const rank_deficient_error&) {
            }
            if (!fitted || !fit.converged) {
                try {
                    const GlmFit cold = fit_glm(wide, y, family, g);
                    if (!fitted || cold.deviance < fit.deviance) fit = cold;
                    fitted = true;
                } catch (const rank_deficient_error&) {
                }
            }
            if (!fitted) {
                ++best.n_discarded;
                continue;
            }
            const double t = fit_base.deviance - fit.deviance;
            if (t > best.t_max) {
                best.t_max = t;
                best.best_split_point = c;
            }
            warm = fit.coefficients;  // adjacent candidates are close
        }
    }

    if (!std::isfinite(best.t_max))
        throw no_admissible_split_error("all candidates for modifier " +
                                        std::to_string(m) + " in node " +
                                        std::to_string(node_id) + " were discarded");
    return best;
}

}  // namespace tsvc
