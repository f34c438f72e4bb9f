#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tsvc/dataset.hpp"
#include "tsvc/family.hpp"

namespace tsvc {

// ---------------------------------------------------------------------------
// Regions: products of threshold indicators.
// ---------------------------------------------------------------------------

enum class Side { le, gt };

struct Branch {
    int modifier = -1;
    double split_point = 0.0;
    Side side = Side::le;
};

// Conjunction of branch conditions; an empty branch list matches every row.
struct Region {
    std::vector<Branch> branches;
};

// 0/1 membership vector: entry i is 1 iff row i satisfies all branches.
Eigen::VectorXd region_indicator(const Region& region, const Dataset& data);

// ---------------------------------------------------------------------------
// Coefficient trees.
// ---------------------------------------------------------------------------

struct TreeNode {
    int modifier = -1;  // -1 marks a leaf
    double split_point = 0.0;
    int left = -1;
    int right = -1;
    int parent = -1;
    double coefficient = 0.0;  // meaningful only for leaves
};

// Binary tree of (modifier, split point) decisions for one predictor.  Leaves
// carry region-specific coefficients; their regions partition the sample.
// Node ids are stable indices into the node pool (root is 0), so split
// records can refer to them across iterations.
class CoefficientTree {
public:
    explicit CoefficientTree(int predictor_index);

    int predictor_index() const { return predictor_index_; }
    int n_nodes() const { return static_cast<int>(nodes_.size()); }
    int n_leaves() const;
    bool is_leaf(int node_id) const { return node(node_id).modifier < 0; }
    const TreeNode& node(int node_id) const;

    // Leaf ids in depth-first, left-before-right order (stable for a fixed
    // structure; used for design-column ordering and serialization).
    std::vector<int> leaf_ids() const;

    // Branch conditions on the path from the root to the leaf.
    Region leaf_region(int leaf_id) const;

    // Turns a leaf into an internal node with two fresh leaves (left: <= c,
    // right: > c).  Children inherit the parent's coefficient.  Returns
    // (left_id, right_id).
    std::pair<int, int> split_leaf(int leaf_id, int modifier, double split_point);

    double coefficient(int leaf_id) const;
    void set_coefficient(int leaf_id, double value);

    // Sorted unique modifier indices appearing in internal nodes.
    std::vector<int> modifiers() const;

    // Leaf coefficient applying to one row (root-to-leaf walk).
    double coefficient_at_row(const Dataset& data, Eigen::Index row) const;
    // Same thing vectorized over all rows.
    Eigen::VectorXd coefficient_vector(const Dataset& data) const;

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    // Rebuilds a tree from a serialized node pool (validates structure).
    static CoefficientTree from_nodes(int predictor_index, std::vector<TreeNode> nodes);

private:
    void collect_leaves(int node_id, std::vector<int>& out) const;

    int predictor_index_;
    std::vector<TreeNode> nodes_;
};

// ---------------------------------------------------------------------------
// Model structure and design assembly.
// ---------------------------------------------------------------------------

// Which predictors get trees (V) and which enter linearly (L); enough to
// assemble the design matrix.  Coefficients on the trees are ignored here.
struct ModelStructure {
    int p = 0;
    std::map<int, CoefficientTree> trees;
    std::vector<int> linear;  // kept sorted

    // Sorted union of modifiers over all trees (the set M).
    std::vector<int> modifiers() const;
    // Throws invalid_args_error when V/L overlap, indices are out of range,
    // a tree modifies its own predictor, or the hierarchy rule M ⊆ V ∪ L
    // fails.
    void validate() const;
};

struct DesignColumn {
    enum class Kind { intercept, leaf, linear };
    Kind kind = Kind::intercept;
    int predictor = -1;  // leaf and linear columns
    int leaf_id = -1;    // leaf columns only
};

struct DesignInfo {
    Eigen::MatrixXd design;
    std::vector<DesignColumn> columns;
};

// Columns: intercept, then tree predictors in ascending index order with
// leaves in leaf_ids() order (each column x_j ⊙ leaf indicator), then linear
// predictors ascending.  Throws empty_leaf_error when a leaf matches no rows.
DesignInfo build_design(const ModelStructure& structure, const Dataset& data);

// ---------------------------------------------------------------------------
// Fitted model.
// ---------------------------------------------------------------------------

struct SplitRecord {
    int iteration = 0;
    int predictor = -1;
    int node_id = -1;
    int modifier = -1;
    double split_point = 0.0;
    double t_obs = 0.0;
    double p_value = 1.0;
    bool accepted = false;
};

struct FitDiagnostics {
    double deviance = 0.0;
    double aic = 0.0;
    double log_likelihood = 0.0;
    Eigen::Index n_obs = 0;
    bool converged = true;
    bool ridge_used = false;
    bool max_splits_hit = false;
    std::uint64_t seed = 0;
    // Echo of the fit configuration, so a serialized model documents the run
    // that produced it (threads are an execution detail and are not part of
    // the model).
    double alpha = 0.05;
    int n_perm = 0;
    int min_node_size = 0;
    int max_splits = 0;
    int glm_max_iter = 0;
    double glm_tol = 0.0;
    std::vector<std::pair<int, int>> modifier_exclusions;
    std::vector<SplitRecord> split_history;
    // Step-3 screen trail: (predictor, p_value, dropped).
    struct ScreenRecord {
        int predictor = -1;
        double p_value = 1.0;
        bool dropped = false;
    };
    std::vector<ScreenRecord> screen_history;
};

struct TsvcModel {
    explicit TsvcModel(Family f) : family(f) {}

    Family family;
    double intercept = 0.0;
    std::map<int, CoefficientTree> trees;  // V
    std::map<int, double> linear;          // L
    std::vector<int> excluded;             // dropped by the Step-3 screen
    std::vector<std::string> predictor_names;
    std::vector<Scale> predictor_scales;
    std::string response_name;
    FitDiagnostics diagnostics;

    ModelStructure structure() const;
    // V ∪ L ∪ excluded must partition {0..p-1}; hierarchy rule must hold.
    void validate() const;
};

// Throws schema_mismatch_error when data columns disagree with the model's
// training schema (names, order, scales).
void check_schema(const TsvcModel& model, const Dataset& data);

// Linear predictor (Eq.-style sum of intercept, tree terms, linear terms).
Eigen::VectorXd predict_eta(const TsvcModel& model, const Dataset& data);
// Response-scale predictions μ̂ = g⁻¹(η̂).
Eigen::VectorXd predict_mu(const TsvcModel& model, const Dataset& data);

}  // namespace tsvc
