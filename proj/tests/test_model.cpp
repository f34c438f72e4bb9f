#include <Eigen/Dense>

#include "doctest.h"
#include "tsvc/glm.hpp"
#include "tsvc/model.hpp"
#include "tsvc/rng.hpp"

using tsvc::Branch;
using tsvc::CoefficientTree;
using tsvc::Column;
using tsvc::Dataset;
using tsvc::Family;
using tsvc::ModelStructure;
using tsvc::Region;
using tsvc::Scale;
using tsvc::Side;
using tsvc::TsvcModel;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

Dataset make_random_data(tsvc::Rng& rng, int n, int p) {
    std::vector<Column> cols;
    for (int j = 0; j < p; ++j) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = rng.normal();
        cols.push_back(Column{"x" + std::to_string(j + 1), Scale::continuous, x});
    }
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    return Dataset(std::move(cols), "y", y);
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("empty region matches every row") {
    tsvc::Rng rng(1);
    const Dataset data = make_random_data(rng, 25, 2);
    const Eigen::VectorXd ind = region_indicator(Region{}, data);
    CHECK(ind.sum() == doctest::Approx(25.0));
}

TEST_CASE("single branch evaluates the threshold") {
    Dataset data({Column{"x1", Scale::continuous, vec({1, 2})},
                  Column{"x2", Scale::continuous, vec({0.1, 0.3})}},
                 "y", vec({0, 0}));
    Region region{{Branch{1, 0.2, Side::le}}};
    const Eigen::VectorXd ind = region_indicator(region, data);
    CHECK(ind[0] == 1.0);
    CHECK(ind[1] == 0.0);
}

TEST_CASE("multi-branch region equals the product of single branches") {
    tsvc::Rng rng(2);
    const Dataset data = make_random_data(rng, 200, 3);
    Region both{{Branch{1, 0.3, Side::gt}, Branch{2, 0.5, Side::le}}};
    Region first{{both.branches[0]}};
    Region second{{both.branches[1]}};
    const Eigen::VectorXd lhs = region_indicator(both, data);
    const Eigen::VectorXd rhs =
        region_indicator(first, data).cwiseProduct(region_indicator(second, data));
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("region with an invalid modifier index throws") {
    tsvc::Rng rng(3);
    const Dataset data = make_random_data(rng, 10, 2);
    Region region{{Branch{7, 0.0, Side::le}}};
    CHECK_THROWS_AS(region_indicator(region, data), tsvc::invalid_index_error);
}

TEST_CASE("tree split mechanics and leaf order") {
    CoefficientTree tree(0);
    CHECK(tree.n_leaves() == 1);
    CHECK(tree.leaf_ids() == std::vector<int>{0});

    const auto [l, r] = tree.split_leaf(0, 1, 0.2);
    CHECK(tree.n_leaves() == 2);
    CHECK(tree.leaf_ids() == std::vector<int>{l, r});

    const auto [ll, lr] = tree.split_leaf(r, 2, -0.7);
    CHECK(tree.n_leaves() == 3);
    CHECK(tree.leaf_ids() == std::vector<int>{l, ll, lr});
    CHECK(tree.n_nodes() == 2 * tree.n_leaves() - 1);

    const Region deep = tree.leaf_region(lr);
    REQUIRE(deep.branches.size() == 2);
    CHECK(deep.branches[0].modifier == 1);
    CHECK(deep.branches[0].side == Side::gt);
    CHECK(deep.branches[1].modifier == 2);
    CHECK(deep.branches[1].side == Side::gt);
    CHECK(tree.modifiers() == std::vector<int>{1, 2});

    CHECK_THROWS_AS(tree.split_leaf(0, 1, 0.0), tsvc::invalid_args_error);  // internal now
    CHECK_THROWS_AS(tree.split_leaf(l, 0, 0.0), tsvc::invalid_args_error);  // self-modification
}

TEST_CASE("leaf regions partition the sample") {
    tsvc::Rng rng(4);
    const Dataset data = make_random_data(rng, 300, 4);
    CoefficientTree tree(0);
    auto [a, b] = tree.split_leaf(0, 1, 0.1);
    tree.split_leaf(a, 2, -0.4);
    tree.split_leaf(b, 3, 0.8);

    Eigen::VectorXd total = Eigen::VectorXd::Zero(data.n_rows());
    for (int leaf : tree.leaf_ids())
        total += region_indicator(tree.leaf_region(leaf), data);
    CHECK((total.array() == 1.0).all());
}

TEST_CASE("coefficient_at_row agrees with the leaf-indicator expansion") {
    tsvc::Rng rng(5);
    const Dataset data = make_random_data(rng, 150, 4);
    CoefficientTree tree(1);
    auto [a, b] = tree.split_leaf(0, 0, 0.0);
    tree.split_leaf(b, 3, 0.5);
    double c = 0.1;
    for (int leaf : tree.leaf_ids()) tree.set_coefficient(leaf, c += 0.3);

    Eigen::VectorXd expanded = Eigen::VectorXd::Zero(data.n_rows());
    for (int leaf : tree.leaf_ids())
        expanded += tree.coefficient(leaf) * region_indicator(tree.leaf_region(leaf), data);
    CHECK((tree.coefficient_vector(data) - expanded).lpNorm<Eigen::Infinity>() == 0.0);
    (void)a;
}

TEST_CASE("build_design with no trees is [1, x1, x2]") {
    tsvc::Rng rng(6);
    const Dataset data = make_random_data(rng, 50, 2);
    ModelStructure s;
    s.p = 2;
    s.linear = {0, 1};
    const auto info = build_design(s, data);
    REQUIRE(info.design.cols() == 3);
    CHECK((info.design.col(0).array() == 1.0).all());
    CHECK((info.design.col(1) - data.values(0)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((info.design.col(2) - data.values(1)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(info.columns[0].kind == tsvc::DesignColumn::Kind::intercept);
    CHECK(info.columns[1].kind == tsvc::DesignColumn::Kind::linear);
    CHECK(info.columns[1].predictor == 0);
}

TEST_CASE("tree leaf columns sum back to the raw predictor") {
    tsvc::Rng rng(7);
    const Dataset data = make_random_data(rng, 120, 3);
    ModelStructure s;
    s.p = 3;
    CoefficientTree tree(0);
    auto [a, b] = tree.split_leaf(0, 1, 0.2);
    tree.split_leaf(a, 2, 0.0);
    s.trees.emplace(0, tree);
    s.linear = {1, 2};

    const auto info = build_design(s, data);
    REQUIRE(info.design.cols() == 6);  // 1 + 3 leaves + 2 linear
    Eigen::VectorXd sum = info.design.col(1) + info.design.col(2) + info.design.col(3);
    CHECK((sum - data.values(0)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(info.columns[2].kind == tsvc::DesignColumn::Kind::leaf);
    CHECK(info.columns[2].predictor == 0);
    (void)b;
}

TEST_CASE("empty leaf raises") {
    Dataset data({Column{"x1", Scale::continuous, vec({1, 2, 3})},
                  Column{"x2", Scale::continuous, vec({0.1, 0.2, 0.3})}},
                 "y", vec({0, 0, 0}));
    ModelStructure s;
    s.p = 2;
    CoefficientTree tree(0);
    tree.split_leaf(0, 1, 5.0);  // right child empty: no x2 > 5
    s.trees.emplace(0, tree);
    s.linear = {1};
    CHECK_THROWS_AS(build_design(s, data), tsvc::empty_leaf_error);
}

TEST_CASE("hierarchy violations are caught by validate") {
    ModelStructure s;
    s.p = 3;
    CoefficientTree tree(0);
    tree.split_leaf(0, 2, 0.0);  // modifier 2 has no main effect
    s.trees.emplace(0, tree);
    s.linear = {1};
    CHECK_THROWS_AS(s.validate(), tsvc::invalid_args_error);
    s.linear = {1, 2};
    CHECK_NOTHROW(s.validate());
    s.linear = {0, 1, 2};  // overlap with the tree set
    CHECK_THROWS_AS(s.validate(), tsvc::invalid_args_error);
}

TEST_CASE("fitted design reproduces predict_eta row by row") {
    tsvc::Rng rng(8);
    const Dataset data = make_random_data(rng, 250, 4);

    ModelStructure s;
    s.p = 4;
    CoefficientTree tree(0);
    auto [a, b] = tree.split_leaf(0, 1, 0.0);
    tree.split_leaf(b, 2, 0.3);
    s.trees.emplace(0, tree);
    s.linear = {1, 2, 3};

    const auto info = build_design(s, data);
    const auto fit = fit_glm(info.design, data.response(), Family::gaussian());

    TsvcModel model(Family::gaussian());
    model.predictor_names = data.predictor_names();
    model.predictor_scales = {Scale::continuous, Scale::continuous, Scale::continuous,
                              Scale::continuous};
    model.response_name = "y";
    model.intercept = fit.coefficients[0];
    CoefficientTree fitted = s.trees.at(0);
    for (Eigen::Index k = 0; k < info.design.cols(); ++k) {
        const auto& col = info.columns[static_cast<size_t>(k)];
        if (col.kind == tsvc::DesignColumn::Kind::leaf)
            fitted.set_coefficient(col.leaf_id, fit.coefficients[k]);
        if (col.kind == tsvc::DesignColumn::Kind::linear)
            model.linear[col.predictor] = fit.coefficients[k];
    }
    model.trees.emplace(0, fitted);
    model.validate();

    const Eigen::VectorXd eta = predict_eta(model, data);
    const Eigen::VectorXd eta_design = info.design * fit.coefficients;
    CHECK((eta - eta_design).lpNorm<Eigen::Infinity>() < 1e-12);
    (void)a;
}

TEST_CASE("intercept-only predictions hit the inverse link") {
    Dataset data({Column{"x1", Scale::continuous, vec({1, 2, 3})}});
    {
        TsvcModel model(Family::gaussian());
        model.predictor_names = {"x1"};
        model.predictor_scales = {Scale::continuous};
        model.intercept = 0.2;
        model.excluded = {0};
        const Eigen::VectorXd mu = predict_mu(model, data);
        CHECK((mu.array() == 0.2).all());
    }
    {
        TsvcModel model(Family::binomial());
        model.predictor_names = {"x1"};
        model.predictor_scales = {Scale::continuous};
        model.intercept = 0.0;
        model.excluded = {0};
        const Eigen::VectorXd mu = predict_mu(model, data);
        CHECK((mu.array() == 0.5).all());
    }
}

TEST_CASE("schema mismatches are rejected at prediction time") {
    TsvcModel model(Family::gaussian());
    model.predictor_names = {"x1", "x2"};
    model.predictor_scales = {Scale::continuous, Scale::binary};
    model.intercept = 1.0;
    model.excluded = {0, 1};

    Dataset renamed({Column{"x1", Scale::continuous, vec({1})},
                     Column{"z2", Scale::binary, vec({1})}});
    CHECK_THROWS_AS(predict_eta(model, renamed), tsvc::schema_mismatch_error);

    Dataset rescaled({Column{"x1", Scale::continuous, vec({1})},
                      Column{"x2", Scale::continuous, vec({1})}});
    CHECK_THROWS_AS(predict_eta(model, rescaled), tsvc::schema_mismatch_error);

    Dataset fewer({Column{"x1", Scale::continuous, vec({1})}});
    CHECK_THROWS_AS(predict_eta(model, fewer), tsvc::schema_mismatch_error);
}

TEST_CASE("predictions are invariant to construction order of sibling splits") {
    tsvc::Rng rng(9);
    const Dataset data = make_random_data(rng, 100, 3);

    // Same logical tree, grandchildren created in different orders.
    CoefficientTree t1(0);
    auto [a1, b1] = t1.split_leaf(0, 1, 0.0);
    t1.split_leaf(a1, 2, 0.5);
    t1.split_leaf(b1, 2, -0.5);

    CoefficientTree t2(0);
    auto [a2, b2] = t2.split_leaf(0, 1, 0.0);
    t2.split_leaf(b2, 2, -0.5);
    t2.split_leaf(a2, 2, 0.5);

    const auto leaves1 = t1.leaf_ids();
    const auto leaves2 = t2.leaf_ids();
    REQUIRE(leaves1.size() == 4);
    for (size_t k = 0; k < leaves1.size(); ++k) {
        t1.set_coefficient(leaves1[k], 0.25 * static_cast<double>(k + 1));
        t2.set_coefficient(leaves2[k], 0.25 * static_cast<double>(k + 1));
    }
    CHECK((t1.coefficient_vector(data) - t2.coefficient_vector(data))
              .lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("from_nodes validates structure") {
    CoefficientTree tree(2);
    auto [a, b] = tree.split_leaf(0, 0, 0.1);
    tree.set_coefficient(a, 1.5);
    tree.set_coefficient(b, -0.5);

    const CoefficientTree copy = CoefficientTree::from_nodes(2, tree.nodes());
    CHECK(copy.leaf_ids() == tree.leaf_ids());
    CHECK(copy.coefficient(a) == 1.5);

    auto broken = tree.nodes();
    broken[0].left = 5;  // dangling child
    CHECK_THROWS_AS(CoefficientTree::from_nodes(2, broken), tsvc::invalid_args_error);

    auto self_mod = tree.nodes();
    self_mod[0].modifier = 2;  // tree's own predictor as modifier
    CHECK_THROWS_AS(CoefficientTree::from_nodes(2, self_mod), tsvc::invalid_args_error);
}

}  // TEST_SUITE
