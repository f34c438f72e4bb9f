#include <cmath>

#include "doctest.h"
#include "tsvc/glm.hpp"
#include "tsvc/simbench.hpp"

using tsvc::Detection;
using tsvc::EvalResult;
using tsvc::evaluate;
using tsvc::extract_indicators;
using tsvc::Family;
using tsvc::generate;
using tsvc::Scale;
using tsvc::ScenarioDraw;
using tsvc::ScenarioId;
using tsvc::ScenarioSpec;
using tsvc::ScenarioTruth;
using tsvc::truth_of;
using tsvc::TsvcModel;

namespace {

int sum(const std::vector<int>& v) {
    int s = 0;
    for (int x : v) s += x;
    return s;
}

int sum2(const std::vector<std::vector<int>>& m) {
    int s = 0;
    for (const auto& row : m) s += sum(row);
    return s;
}

}  // namespace

TEST_SUITE("simbench") {

TEST_CASE("scenario names, sizes and truth tables") {
    CHECK(tsvc::scenario_p(ScenarioId::s1) == 4);
    CHECK(tsvc::scenario_p(ScenarioId::s4) == 8);
    CHECK(tsvc::scenario_p(ScenarioId::illustrative) == 4);
    CHECK(tsvc::scenario_from_name(tsvc::scenario_name(ScenarioId::s3)) ==
          ScenarioId::s3);
    CHECK_THROWS_AS(tsvc::scenario_from_name("nope"), tsvc::invalid_args_error);

    // scenario 1: nothing varies
    const ScenarioTruth t1 = truth_of(ScenarioId::s1);
    CHECK(sum(t1.delta_j) == 0);
    CHECK(sum2(t1.delta_jm) == 0);

    // scenario 2: x1 and x2 modify each other (smoothly)
    const ScenarioTruth t2 = truth_of(ScenarioId::s2);
    CHECK(t2.delta_j == std::vector<int>{1, 1, 0, 0});
    CHECK(t2.delta_jm[0][1] == 1);
    CHECK(t2.delta_jm[1][0] == 1);
    CHECK(sum2(t2.delta_jm) == 2);

    // scenario 3: x3 and x4 modify each other through thresholds
    const ScenarioTruth t3 = truth_of(ScenarioId::s3);
    CHECK(t3.delta_j == std::vector<int>{0, 0, 1, 1});
    CHECK(t3.delta_jm[2][3] == 1);
    CHECK(t3.delta_jm[3][2] == 1);
    CHECK(sum2(t3.delta_jm) == 2);

    // scenario 4 adds four noise covariates but the same truth
    const ScenarioTruth t4 = truth_of(ScenarioId::s4);
    CHECK(t4.delta_j == std::vector<int>{0, 0, 1, 1, 0, 0, 0, 0});
    CHECK(t4.delta_jm[2][3] == 1);
    CHECK(t4.delta_jm[3][2] == 1);
    CHECK(sum2(t4.delta_jm) == 2);

    // scenario 5 lets x2 modify x3's coefficient on a second level
    const ScenarioTruth t5 = truth_of(ScenarioId::s5);
    CHECK(t5.delta_j == std::vector<int>{0, 0, 1, 1});
    CHECK(t5.delta_jm[2][3] == 1);
    CHECK(t5.delta_jm[2][1] == 1);
    CHECK(t5.delta_jm[3][2] == 1);
    CHECK(t5.delta_jm[3][1] == 1);
    CHECK(sum2(t5.delta_jm) == 4);

    // the illustrative example: two two-level trees
    const ScenarioTruth t6 = truth_of(ScenarioId::illustrative);
    CHECK(t6.delta_j == std::vector<int>{1, 1, 0, 0});
    CHECK(t6.delta_jm[0][1] == 1);
    CHECK(t6.delta_jm[0][2] == 1);
    CHECK(t6.delta_jm[1][0] == 1);
    CHECK(t6.delta_jm[1][3] == 1);
    CHECK(sum2(t6.delta_jm) == 4);
}

TEST_CASE("draws are reproducible and rep-indexed") {
    ScenarioSpec spec;
    spec.id = ScenarioId::s3;
    spec.n = 50;
    spec.seed = 7;
    const ScenarioDraw a = generate(spec, 3);
    const ScenarioDraw b = generate(spec, 3);
    const ScenarioDraw c = generate(spec, 4);

    CHECK(a.data.n_rows() == 50);
    CHECK(a.data.n_predictors() == 4);
    for (int j = 0; j < 4; ++j) {
        CHECK((a.data.values(j) - b.data.values(j)).lpNorm<Eigen::Infinity>() == 0.0);
    }
    CHECK((a.data.response() - b.data.response()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((a.data.response() - c.data.response()).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("columns carry the right scales and names") {
    ScenarioSpec spec;
    spec.id = ScenarioId::s4;
    spec.n = 60;
    const ScenarioDraw draw = generate(spec, 0);
    CHECK(draw.data.n_predictors() == 8);
    CHECK(draw.data.predictor(0).name == "x1");
    CHECK(draw.data.predictor(0).scale == Scale::continuous);
    CHECK(draw.data.predictor(2).scale == Scale::binary);
    CHECK(draw.data.predictor(3).scale == Scale::binary);
    CHECK(draw.data.predictor(4).scale == Scale::continuous);
    CHECK(draw.data.predictor(6).scale == Scale::binary);
    CHECK(draw.data.predictor(7).name == "x8");
    // binary columns take both values on any reasonable draw
    for (int j : {2, 3, 6, 7}) {
        CHECK(draw.data.values(j).maxCoeff() == 1.0);
        CHECK(draw.data.values(j).minCoeff() == 0.0);
    }
}

TEST_CASE("scenario 1 reaches its theoretical signal share") {
    // var(mu)/var(y) = 4*0.4^2*(1 + 1/4)/... with x1,x2 ~ N(0,1) and two
    // Bernoulli(1/2) columns: var(mu) = 0.16*(1+1+0.25+0.25) = 0.4, so with
    // sigma = 1 the population R^2 is 0.4/1.4 = 0.2857.
    ScenarioSpec spec;
    spec.id = ScenarioId::s1;
    spec.n = 20000;
    spec.sigma_eps = 1.0;
    spec.seed = 123;
    const ScenarioDraw draw = generate(spec, 0);

    Eigen::MatrixXd design(spec.n, 5);
    design.col(0).setOnes();
    for (int j = 0; j < 4; ++j) design.col(j + 1) = draw.data.values(j);
    const tsvc::GlmFit fit =
        tsvc::fit_glm(design, draw.data.response(), Family::gaussian());
    const Eigen::VectorXd y = draw.data.response();
    const double tss = (y.array() - y.mean()).square().sum();
    const double r2 = 1.0 - fit.deviance / tss;
    CHECK(r2 == doctest::Approx(0.4 / 1.4).epsilon(0.05));

    // and the intercept/coefficients sit near their population values
    CHECK(fit.coefficients[0] == doctest::Approx(0.2).scale(1.0).epsilon(0.05));
    for (int k = 1; k <= 4; ++k)
        CHECK(fit.coefficients[k] == doctest::Approx(0.4).scale(1.0).epsilon(0.05));
}

TEST_CASE("scenario 3 draws carry the threshold interaction") {
    // Within x4 = 0 the slope of y on x3 is tr3(0) = 0.8.  Within x4 = 1 the
    // x4 term contributes 0.4*I(x3 = 0) = 0.4 - 0.4*x3, which cancels
    // tr3(1) = 0.4 exactly, so the group slope is 0.
    ScenarioSpec spec;
    spec.id = ScenarioId::s3;
    spec.n = 20000;
    spec.seed = 9;
    const ScenarioDraw draw = generate(spec, 0);
    const Eigen::VectorXd x3 = draw.data.values(2);
    const Eigen::VectorXd x4 = draw.data.values(3);
    const Eigen::VectorXd y = draw.data.response();

    double num0 = 0, den0 = 0, num1 = 0, den1 = 0;
    for (int i = 0; i < spec.n; ++i) {
        const double xc = x3[i] - 0.5;  // center the Bernoulli regressor
        if (x4[i] == 0.0) {
            num0 += xc * y[i];
            den0 += xc * xc;
        } else {
            num1 += xc * y[i];
            den1 += xc * xc;
        }
    }
    CHECK(num0 / den0 == doctest::Approx(0.8).epsilon(0.1));
    CHECK(num1 / den1 == doctest::Approx(0.0).scale(1.0).epsilon(0.05));
}

TEST_CASE("indicators extracted from a hand-built model") {
    TsvcModel model(Family::gaussian());
    model.predictor_names = {"x1", "x2", "x3"};
    model.predictor_scales = {Scale::continuous, Scale::continuous, Scale::binary};
    tsvc::CoefficientTree tree(0);
    tree.split_leaf(0, 1, 0.5);
    model.trees.emplace(0, tree);
    model.linear[1] = 0.2;
    model.excluded = {2};

    const Detection det = extract_indicators(model);
    CHECK(det.delta_j == std::vector<int>{1, 0, 0});
    CHECK(det.delta_jm[0][1] == 1);
    CHECK(sum2(det.delta_jm) == 1);
    CHECK(det.present == std::vector<int>{1, 1, 0});
}

TEST_CASE("rates average per-replication ratios") {
    // truth: x1 varies (via x2); x2, x3 stay constant
    ScenarioTruth truth;
    truth.delta_j = {1, 0, 0};
    truth.delta_jm = {{0, 1, 0}, {0, 0, 0}, {0, 0, 0}};

    Detection perfect;
    perfect.delta_j = {1, 0, 0};
    perfect.delta_jm = {{0, 1, 0}, {0, 0, 0}, {0, 0, 0}};
    perfect.present = {1, 1, 1};

    Detection miss;  // nothing found, one spurious tree for x3 via x1
    miss.delta_j = {0, 0, 1};
    miss.delta_jm = {{0, 0, 0}, {0, 0, 0}, {1, 0, 0}};
    miss.present = {1, 1, 1};

    const EvalResult res = evaluate(std::vector<Detection>{perfect, miss}, truth);
    REQUIRE(res.tpr_c.has_value());
    REQUIRE(res.fpr_c.has_value());
    REQUIRE(res.tpr_cm.has_value());
    REQUIRE(res.fpr_cm.has_value());
    // TPR_C: 1/1 then 0/1 -> 0.5; FPR_C: 0/2 then 1/2 -> 0.25
    CHECK(*res.tpr_c == doctest::Approx(0.5));
    CHECK(*res.fpr_c == doctest::Approx(0.25));
    // pairs: 1 true of 6, 5 false; TPR_CM: 1 then 0 -> 0.5
    CHECK(*res.tpr_cm == doctest::Approx(0.5));
    CHECK(*res.fpr_cm == doctest::Approx(0.5 * (0.0 / 5.0 + 1.0 / 5.0)));
    CHECK(res.poc == doctest::Approx(1.0));
}

TEST_CASE("rates with an empty truth side are absent, not zero") {
    const ScenarioTruth truth = truth_of(ScenarioId::s1);
    Detection none;
    none.delta_j = {0, 0, 0, 0};
    none.delta_jm.assign(4, std::vector<int>(4, 0));
    none.present = {1, 1, 0, 1};

    const EvalResult res = evaluate(std::vector<Detection>{none}, truth);
    CHECK_FALSE(res.tpr_c.has_value());   // no truly varying coefficients
    CHECK_FALSE(res.tpr_cm.has_value());
    REQUIRE(res.fpr_c.has_value());
    CHECK(*res.fpr_c == doctest::Approx(0.0));
    CHECK(res.poc == doctest::Approx(0.75));
}

TEST_CASE("perfect recovery scores ones and zeros") {
    const ScenarioTruth truth = truth_of(ScenarioId::s5);
    Detection det;
    det.delta_j = truth.delta_j;
    det.delta_jm = truth.delta_jm;
    det.present = {1, 1, 1, 1};
    const EvalResult res = evaluate(std::vector<Detection>{det, det}, truth);
    CHECK(*res.tpr_c == doctest::Approx(1.0));
    CHECK(*res.fpr_c == doctest::Approx(0.0));
    CHECK(*res.tpr_cm == doctest::Approx(1.0));
    CHECK(*res.fpr_cm == doctest::Approx(0.0));
}

TEST_CASE("model-overload evaluation matches the detection overload") {
    TsvcModel model(Family::gaussian());
    model.predictor_names = {"x1", "x2", "x3", "x4"};
    model.predictor_scales.assign(4, Scale::continuous);
    tsvc::CoefficientTree tree(2);
    tree.split_leaf(0, 3, 0.0);
    model.trees.emplace(2, tree);
    model.linear[0] = 0.1;
    model.linear[1] = 0.1;
    model.linear[3] = 0.1;

    const ScenarioTruth truth = truth_of(ScenarioId::s3);
    const EvalResult via_model = evaluate(std::vector<TsvcModel>{model}, truth);
    const EvalResult via_det =
        evaluate(std::vector<Detection>{extract_indicators(model)}, truth);
    CHECK(*via_model.tpr_c == *via_det.tpr_c);
    CHECK(*via_model.fpr_c == *via_det.fpr_c);
    CHECK(*via_model.tpr_cm == *via_det.tpr_cm);
    CHECK(*via_model.fpr_cm == *via_det.fpr_cm);
    CHECK(via_model.poc == via_det.poc);
}

TEST_CASE("a small scenario run is deterministic and well-formed") {
    ScenarioSpec spec;
    spec.id = ScenarioId::s1;
    spec.n = 80;
    spec.n_reps = 2;
    spec.seed = 99;
    tsvc::FitConfig config;
    config.n_perm = 49;
    const tsvc::ScenarioRun run = tsvc::run_scenario(spec, config);
    REQUIRE(run.fits.size() == 2);
    CHECK_FALSE(run.result.tpr_c.has_value());
    CHECK(run.result.fpr_c.has_value());
    CHECK(run.result.poc >= 0.0);
    CHECK(run.result.poc <= 1.0);
    CHECK(run.fits[0].diagnostics.seed == tsvc::scenario_fit_seed(spec, 0));

    const tsvc::ScenarioRun again = tsvc::run_scenario(spec, config);
    CHECK(again.fits[0].diagnostics.deviance == run.fits[0].diagnostics.deviance);
    CHECK(again.fits[1].diagnostics.deviance == run.fits[1].diagnostics.deviance);
}

}  // TEST_SUITE
