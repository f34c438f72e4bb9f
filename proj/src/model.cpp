#include "tsvc/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tsvc {

Eigen::VectorXd region_indicator(const Region& region, const Dataset& data) {
    const Eigen::Index n = data.n_rows();
    Eigen::VectorXd ind = Eigen::VectorXd::Ones(n);
    for (const Branch& b : region.branches) {
        if (!std::isfinite(b.split_point))
            throw invalid_args_error("region branch has non-finite split point");
        const Eigen::VectorXd& x = data.values(b.modifier);  // throws InvalidIndex
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool in = (b.side == Side::le) ? (x[i] <= b.split_point)
                                                 : (x[i] > b.split_point);
            if (!in) ind[i] = 0.0;
        }
    }
    return ind;
}

// ---------------------------------------------------------------------------
// CoefficientTree
// ---------------------------------------------------------------------------

CoefficientTree::CoefficientTree(int predictor_index)
    : predictor_index_(predictor_index) {
    if (predictor_index < 0)
        throw invalid_args_error("tree predictor index must be nonnegative");
    nodes_.push_back(TreeNode{});  // root starts as the single leaf
}

const TreeNode& CoefficientTree::node(int node_id) const {
    if (node_id < 0 || node_id >= n_nodes())
        throw invalid_index_error("tree node id " + std::to_string(node_id) + " out of range");
    return nodes_[static_cast<std::size_t>(node_id)];
}

int CoefficientTree::n_leaves() const {
    int count = 0;
    for (const TreeNode& nd : nodes_)
        if (nd.modifier < 0) ++count;
    return count;
}

void CoefficientTree::collect_leaves(int node_id, std::vector<int>& out) const {
    const TreeNode& nd = nodes_[static_cast<std::size_t>(node_id)];
    if (nd.modifier < 0) {
        out.push_back(node_id);
        return;
    }
    collect_leaves(nd.left, out);
    collect_leaves(nd.right, out);
}

std::vector<int> CoefficientTree::leaf_ids() const {
    std::vector<int> out;
    out.reserve(nodes_.size());
    collect_leaves(0, out);
    return out;
}

Region CoefficientTree::leaf_region(int leaf_id) const {
    if (!is_leaf(leaf_id))
        throw invalid_args_error("node " + std::to_string(leaf_id) + " is not a leaf");
    Region region;
    int child = leaf_id;
    int parent = node(child).parent;
    while (parent >= 0) {
        const TreeNode& pn = nodes_[static_cast<std::size_t>(parent)];
        const Side side = (pn.left == child) ? Side::le : Side::gt;
        region.branches.push_back(Branch{pn.modifier, pn.split_point, side});
        child = parent;
        parent = pn.parent;
    }
    std::reverse(region.branches.begin(), region.branches.end());  // root first
    return region;
}

std::pair<int, int> CoefficientTree::split_leaf(int leaf_id, int modifier,
                                                double split_point) {
    if (!is_leaf(leaf_id))
        throw invalid_args_error("cannot split internal node " + std::to_string(leaf_id));
    if (modifier < 0)
        throw invalid_args_error("modifier index must be nonnegative");
    if (modifier == predictor_index_)
        throw invalid_args_error("a predictor cannot modify its own coefficient");
    if (!std::isfinite(split_point))
        throw invalid_args_error("split point must be finite");

    const int left_id = n_nodes();
    const int right_id = left_id + 1;
    const double inherited = nodes_[static_cast<std::size_t>(leaf_id)].coefficient;

    TreeNode left;
    left.parent = leaf_id;
    left.coefficient = inherited;
    TreeNode right = left;
    nodes_.push_back(left);
    nodes_.push_back(right);

    TreeNode& parent = nodes_[static_cast<std::size_t>(leaf_id)];
    parent.modifier = modifier;
    parent.split_point = split_point;
    parent.left = left_id;
    parent.right = right_id;
    return {left_id, right_id};
}

double CoefficientTree::coefficient(int leaf_id) const {
    if (!is_leaf(leaf_id))
        throw invalid_args_error("node " + std::to_string(leaf_id) + " is not a leaf");
    return nodes_[static_cast<std::size_t>(leaf_id)].coefficient;
}

void CoefficientTree::set_coefficient(int leaf_id, double value) {
    if (!is_leaf(leaf_id))
        throw invalid_args_error("node " + std::to_string(leaf_id) + " is not a leaf");
    nodes_[static_cast<std::size_t>(leaf_id)].coefficient = value;
}

std::vector<int> CoefficientTree::modifiers() const {
    std::set<int> mods;
    for (const TreeNode& nd : nodes_)
        if (nd.modifier >= 0) mods.insert(nd.modifier);
    return std::vector<int>(mods.begin(), mods.end());
}

double CoefficientTree::coefficient_at_row(const Dataset& data, Eigen::Index row) const {
    int id = 0;
    while (nodes_[static_cast<std::size_t>(id)].modifier >= 0) {
        const TreeNode& nd = nodes_[static_cast<std::size_t>(id)];
        const double v = data.values(nd.modifier)[row];
        id = (v <= nd.split_point) ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(id)].coefficient;
}

Eigen::VectorXd CoefficientTree::coefficient_vector(const Dataset& data) const {
    const Eigen::Index n = data.n_rows();
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = coefficient_at_row(data, i);
    return out;
}

CoefficientTree CoefficientTree::from_nodes(int predictor_index,
                                            std::vector<TreeNode> nodes) {
    CoefficientTree tree(predictor_index);
    if (nodes.empty()) throw invalid_args_error("tree node pool is empty");
    tree.nodes_ = std::move(nodes);

    const int count = tree.n_nodes();
    std::vector<int> visits(static_cast<std::size_t>(count), 0);
    // Walk from the root and check every structural link.
    std::vector<int> stack{0};
    if (tree.nodes_[0].parent != -1)
        throw invalid_args_error("tree root must have no parent");
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        if (id < 0 || id >= count)
            throw invalid_args_error("tree child id out of range");
        if (++visits[static_cast<std::size_t>(id)] > 1)
            throw invalid_args_error("tree node visited twice (not a tree)");
        const TreeNode& nd = tree.nodes_[static_cast<std::size_t>(id)];
        if (nd.modifier < 0) {
            if (nd.left != -1 || nd.right != -1)
                throw invalid_args_error("leaf node has children");
            continue;
        }
        if (nd.modifier == predictor_index)
            throw invalid_args_error("a predictor cannot modify its own coefficient");
        if (!std::isfinite(nd.split_point))
            throw invalid_args_error("split point must be finite");
        if (nd.left < 0 || nd.right < 0)
            throw invalid_args_error("internal node missing a child");
        for (int child : {nd.left, nd.right}) {
            if (child < 0 || child >= count)
                throw invalid_args_error("tree child id out of range");
            if (tree.nodes_[static_cast<std::size_t>(child)].parent != id)
                throw invalid_args_error("tree parent link mismatch");
            stack.push_back(child);
        }
    }
    for (int v : visits)
        if (v != 1) throw invalid_args_error("tree has unreachable nodes");
    return tree;
}

// ---------------------------------------------------------------------------
// ModelStructure / design assembly
// ---------------------------------------------------------------------------

std::vector<int> ModelStructure::modifiers() const {
    std::set<int> mods;
    for (const auto& [j, tree] : trees)
        for (int m : tree.modifiers()) mods.insert(m);
    return std::vector<int>(mods.begin(), mods.end());
}

void ModelStructure::validate() const {
    std::set<int> v_set;
    for (const auto& [j, tree] : trees) {
        if (j < 0 || j >= p)
            throw invalid_args_error("tree predictor index out of range");
        if (tree.predictor_index() != j)
            throw invalid_args_error("tree map key disagrees with tree predictor index");
        v_set.insert(j);
    }
    std::set<int> l_set;
    for (int l : linear) {
        if (l < 0 || l >= p)
            throw invalid_args_error("linear predictor index out of range");
        if (v_set.count(l))
            throw invalid_args_error("predictor appears both as tree and linear term");
        if (!l_set.insert(l).second)
            throw invalid_args_error("duplicate linear predictor index");
    }
    for (int m : modifiers()) {
        if (m < 0 || m >= p)
            throw invalid_args_error("modifier index out of range");
        if (!v_set.count(m) && !l_set.count(m))
            throw invalid_args_error(
                "hierarchy violation: modifier " + std::to_string(m) +
                " has no main effect in the model");
    }
}

DesignInfo build_design(const ModelStructure& structure, const Dataset& data) {
    structure.validate();
    if (structure.p != data.n_predictors())
        throw invalid_args_error("structure predictor count does not match dataset");

    const Eigen::Index n = data.n_rows();
    Eigen::Index q = 1;
    for (const auto& [j, tree] : structure.trees) q += tree.n_leaves();
    q += static_cast<Eigen::Index>(structure.linear.size());

    DesignInfo info;
    info.design.resize(n, q);
    info.columns.reserve(static_cast<std::size_t>(q));

    Eigen::Index col = 0;
    info.design.col(col).setOnes();
    info.columns.push_back(DesignColumn{DesignColumn::Kind::intercept, -1, -1});
    ++col;

    for (const auto& [j, tree] : structure.trees) {
        const Eigen::VectorXd& x = data.values(j);
        for (int leaf : tree.leaf_ids()) {
            const Eigen::VectorXd ind = region_indicator(tree.leaf_region(leaf), data);
            if (ind.sum() == 0.0)
                throw empty_leaf_error("leaf " + std::to_string(leaf) + " of predictor " +
                                       data.predictor(j).name + " matches no rows");
            info.design.col(col) = x.cwiseProduct(ind);
            info.columns.push_back(DesignColumn{DesignColumn::Kind::leaf, j, leaf});
            ++col;
        }
    }
    for (int l : structure.linear) {
        info.design.col(col) = data.values(l);
        info.columns.push_back(DesignColumn{DesignColumn::Kind::linear, l, -1});
        ++col;
    }
    return info;
}

// ---------------------------------------------------------------------------
// TsvcModel
// ---------------------------------------------------------------------------

ModelStructure TsvcModel::structure() const {
    ModelStructure s;
    s.p = static_cast<int>(predictor_names.size());
    s.trees = trees;
    for (const auto& [l, beta] : linear) s.linear.push_back(l);
    return s;
}

void TsvcModel::validate() const {
    const ModelStructure s = structure();
    s.validate();
    std::set<int> seen;
    for (const auto& [j, tree] : trees) seen.insert(j);
    for (const auto& [l, beta] : linear) seen.insert(l);
    for (int e : excluded) {
        if (e < 0 || e >= s.p)
            throw invalid_args_error("excluded predictor index out of range");
        if (!seen.insert(e).second)
            throw invalid_args_error("excluded predictor also present in the model");
    }
    if (static_cast<int>(seen.size()) != s.p)
        throw invalid_args_error("V, L, excluded do not cover all predictors");
    if (predictor_scales.size() != predictor_names.size())
        throw invalid_args_error("predictor names and scales differ in length");
}

void check_schema(const TsvcModel& model, const Dataset& data) {
    const int p = static_cast<int>(model.predictor_names.size());
    if (data.n_predictors() != p)
        throw schema_mismatch_error("data has " + std::to_string(data.n_predictors()) +
                                    " predictors, model expects " + std::to_string(p));
    for (int j = 0; j < p; ++j) {
        const Column& col = data.predictor(j);
        if (col.name != model.predictor_names[static_cast<std::size_t>(j)])
            throw schema_mismatch_error("predictor " + std::to_string(j) + " is '" + col.name +
                                        "', model expects '" +
                                        model.predictor_names[static_cast<std::size_t>(j)] + "'");
        if (col.scale != model.predictor_scales[static_cast<std::size_t>(j)])
            throw schema_mismatch_error("predictor '" + col.name +
                                        "' scale differs from the training schema");
    }
}

Eigen::VectorXd predict_eta(const TsvcModel& model, const Dataset& data) {
    check_schema(model, data);
    const Eigen::Index n = data.n_rows();
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, model.intercept);
    for (const auto& [j, tree] : model.trees)
        eta += data.values(j).cwiseProduct(tree.coefficient_vector(data));
    for (const auto& [l, beta] : model.linear) eta += beta * data.values(l);
    return eta;
}

Eigen::VectorXd predict_mu(const TsvcModel& model, const Dataset& data) {
    return model.family.inverse_link(predict_eta(model, data));
}

}  // namespace tsvc
