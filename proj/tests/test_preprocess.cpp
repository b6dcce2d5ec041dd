#include <gtest/gtest.h>

#include <cmath>

#include "covidx/error.hpp"
#include "covidx/preprocess.hpp"
#include "covidx/rng.hpp"
#include "covidx/synthetic.hpp"
#include "support.hpp"

using namespace covidx;
using covidx::testing::make_clean;
using covidx::testing::make_panel;

namespace {

/// Monotone pattern (x complete, y partly missing): the Gaussian MLE factors
/// into the marginal of x and the regression of y on x over complete rows, so
/// the converged EM imputation is the complete-case OLS prediction.
double complete_case_prediction(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double x_star) {
    double sx = 0, sy = 0;
    int m = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (is_missing(y(i))) continue;
        sx += x(i);
        sy += y(i);
        ++m;
    }
    const double mx = sx / m, my = sy / m;
    double sxy = 0, sxx = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (is_missing(y(i))) continue;
        sxy += (x(i) - mx) * (y(i) - my);
        sxx += (x(i) - mx) * (x(i) - mx);
    }
    return my + sxy / sxx * (x_star - mx);
}

void expect_non_decreasing(const std::vector<double>& ll) {
    for (std::size_t i = 1; i < ll.size(); ++i) {
        EXPECT_GE(ll[i] - ll[i - 1], -1e-9) << "step " << i;
    }
}

} // namespace

TEST(ImputeEm, CompletePanelIsUnchanged) {
    const Panel p = make_panel(Eigen::MatrixXd::Random(10, 3));
    EmTrace trace;
    const Panel out = impute_em(p, {}, &trace);
    EXPECT_EQ(trace.iterations, 0);
    EXPECT_TRUE(out.values == p.values);
}

TEST(ImputeEm, PerfectlyCorrelatedColumnsImputeTwiceX) {
    Eigen::MatrixXd v(8, 2);
    for (int i = 0; i < 8; ++i) {
        v(i, 0) = 10.0 + 12.5 * i;
        v(i, 1) = 2.0 * v(i, 0);
    }
    v(5, 1) = kMissing;
    const Panel p = make_panel(v);
    const Panel out = impute_em(p, {});
    const double oracle = complete_case_prediction(v.col(0), v.col(1), v(5, 0));
    EXPECT_NEAR(oracle, 2.0 * v(5, 0), 1e-9);
    EXPECT_NEAR(out.values(5, 1), oracle, 1e-6);
}

TEST(ImputeEm, MatchesClosedFormConditionalMean) {
    Rng rng(11);
    const int n = 40;
    Eigen::MatrixXd v(n, 2);
    for (int i = 0; i < n; ++i) {
        v(i, 0) = 50.0 + 15.0 * rng.normal();
        v(i, 1) = 3.0 - 0.7 * v(i, 0) + 4.0 * rng.normal();
    }
    for (int i : {2, 9, 17, 30, 31}) v(i, 1) = kMissing;
    const Eigen::MatrixXd original = v;

    EmSettings settings;
    settings.max_iter = 5000;
    settings.tol = 1e-13;
    EmTrace trace;
    const Panel out = impute_em(make_panel(v), settings, &trace);
    EXPECT_TRUE(trace.converged);
    for (int i : {2, 9, 17, 30, 31}) {
        EXPECT_NEAR(out.values(i, 1), complete_case_prediction(original.col(0), original.col(1), original(i, 0)),
                    1e-6);
    }
    expect_non_decreasing(trace.log_likelihood);
}

TEST(ImputeEm, SingleColumnGapGetsObservedMean) {
    Eigen::MatrixXd v(5, 1);
    v << 1.0, 4.0, kMissing, 2.0, 8.0;
    const Panel out = impute_em(make_panel(v));
    EXPECT_NEAR(out.values(2, 0), 15.0 / 4.0, 1e-12);
}

TEST(ImputeEm, ObservedEntriesAreBitwiseUntouched) {
    SyntheticSpec spec;
    spec.missing_rate = 0.2;
    spec.n_obs = 120;
    const Panel p = generate(spec).panel;
    const Panel out = impute_em(p);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (is_missing(p.values(i, j))) {
                EXPECT_FALSE(is_missing(out.values(i, j)));
            } else {
                EXPECT_EQ(out.values(i, j), p.values(i, j));
            }
        }
    }
}

TEST(ImputeEm, LogLikelihoodIsMonotone) {
    for (std::uint64_t seed : {1u, 2u, 3u, 20200224u}) {
        SyntheticSpec spec;
        spec.seed = seed;
        spec.missing_rate = 0.3;
        spec.n_obs = 60;
        EmTrace trace;
        impute_em(generate(spec).panel, {}, &trace);
        ASSERT_GE(trace.log_likelihood.size(), 2u);
        expect_non_decreasing(trace.log_likelihood);
    }
}

TEST(ImputeEm, WidePanelIsRegularizedByRidge) {
    Rng rng(5);
    Eigen::MatrixXd v(4, 6);
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = rng.normal();
    v(1, 2) = kMissing;
    v(3, 4) = kMissing;
    const Panel out = impute_em(make_panel(v));
    EXPECT_TRUE(out.values.allFinite());
}

TEST(ImputeEm, ColumnWithOneObservationIsUnimputable) {
    Eigen::MatrixXd v(4, 2);
    v << 1, kMissing, 2, kMissing, 3, 5.0, 4, kMissing;
    try {
        impute_em(make_panel(v, {"a", "b"}));
        FAIL() << "expected an unimputable-column error";
    } catch (const UnimputableColumnError& e) {
        EXPECT_EQ(e.column(), "b");
    }
}

TEST(ImputeEm, LeadingMissingRunIsImputed) {
    Eigen::MatrixXd v(10, 2);
    for (int i = 0; i < 10; ++i) {
        v(i, 0) = 20.0 + 3.0 * i;
        v(i, 1) = i < 4 ? kMissing : 1.0 + 0.5 * v(i, 0) + (i % 2 ? 0.1 : -0.1);
    }
    const Panel out = impute_em(make_panel(v));
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(out.values(i, 1), 1.0 + 0.5 * v(i, 0), 0.2);
}

TEST(Standardize, ExamplesFromHand) {
    Eigen::MatrixXd v(3, 2);
    v << 1, 5, 2, 5, 3, 5;
    const CleanPanel z = standardize(make_clean(v, {"a", "k"}));
    EXPECT_NEAR(z.values(0, 0), -1.0, 1e-15);
    EXPECT_NEAR(z.values(1, 0), 0.0, 1e-15);
    EXPECT_NEAR(z.values(2, 0), 1.0, 1e-15);
    EXPECT_TRUE(z.values.col(1).isZero());
    EXPECT_EQ(z.provenance.constant_columns, std::vector<std::string>{"k"});
    EXPECT_TRUE(z.provenance.standardized);
}

TEST(Standardize, MomentsAndIdempotence) {
    const CleanPanel z = standardize(make_clean(Eigen::MatrixXd::Random(50, 4) * 30.0));
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const Eigen::VectorXd c = z.values.col(j);
        EXPECT_NEAR(c.mean(), 0.0, 1e-10);
        EXPECT_NEAR(std::sqrt((c.array() - c.mean()).square().sum() / (c.size() - 1)), 1.0, 1e-10);
    }
    const CleanPanel twice = standardize(z);
    EXPECT_LE((twice.values - z.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Standardize, PanelWithMissingIsRejected) {
    Eigen::MatrixXd v(3, 1);
    v << 1, kMissing, 3;
    EXPECT_THROW(standardize(make_panel(v)), DataError);
}

TEST(Smooth, EmaByHand) {
    const std::vector<double> x{100.0, 0.0};
    EXPECT_EQ(smooth(x, Smoothing::ema(0.5)), (std::vector<double>{100.0, 50.0}));
    const std::vector<double> y{3.0, -1.0, 7.5, 2.0};
    EXPECT_EQ(smooth(y, Smoothing::ema(1.0)), y);
}

TEST(Smooth, TrailingMovingAverageWithShrinkingWarmUp) {
    const std::vector<double> x{1.0, 3.0, 5.0};
    EXPECT_EQ(smooth(x, Smoothing::moving_average(2)), (std::vector<double>{1.0, 2.0, 4.0}));
    EXPECT_EQ(smooth(x, Smoothing::moving_average(1)), x);
    EXPECT_EQ(smooth(x, Smoothing::none()), x);
}

TEST(Smooth, OutOfRangeParametersAreRejected) {
    const std::vector<double> x{1.0, 2.0, 3.0};
    EXPECT_THROW(smooth(x, Smoothing::ema(0.0)), ConfigError);
    EXPECT_THROW(smooth(x, Smoothing::ema(1.5)), ConfigError);
    EXPECT_THROW(smooth(x, Smoothing::moving_average(0)), ConfigError);
    EXPECT_THROW(smooth(x, Smoothing::moving_average(4)), ConfigError);
}

TEST(Smooth, CommutesWithPositiveScaling) {
    Rng rng(3);
    std::vector<double> x(40), cx(40);
    const double c = 3.75;
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.normal();
        cx[i] = c * x[i];
    }
    for (const Smoothing& s : {Smoothing::ema(0.3), Smoothing::moving_average(7)}) {
        const auto a = smooth(cx, s);
        const auto b = smooth(x, s);
        for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(a[i], c * b[i], 1e-12);
    }
}

TEST(Smooth, CleanPanelRecordsProvenance) {
    const CleanPanel out = smooth(make_clean(Eigen::MatrixXd::Random(10, 2)), Smoothing::moving_average(3));
    EXPECT_EQ(out.provenance.smoothing, Smoothing::moving_average(3).describe());
    EXPECT_EQ(out.rows(), 10);
}

TEST(ApplyTransform, LevelsIsIdentity) {
    const CleanPanel in = make_clean(Eigen::MatrixXd::Random(6, 3));
    const CleanPanel out = apply_transform(in, Transform{});
    EXPECT_TRUE(out.values == in.values);
    EXPECT_EQ(out.dates, in.dates);
}

TEST(ApplyTransform, FirstDifference) {
    Eigen::MatrixXd v(3, 1);
    v << 3, 5, 4;
    const CleanPanel in = make_clean(v);
    const CleanPanel out = apply_transform(in, Transform::parse("first_difference"));
    ASSERT_EQ(out.rows(), 2);
    EXPECT_EQ(out.values(0, 0), 2.0);
    EXPECT_EQ(out.values(1, 0), -1.0);
    EXPECT_EQ(out.dates, (std::vector<Date>{in.dates[1], in.dates[2]}));
    EXPECT_EQ(out.provenance.transform, "first_difference");
}

TEST(ApplyTransform, LogFirstDifference) {
    Eigen::MatrixXd v(2, 1);
    v << 1.0, std::exp(1.0);
    const CleanPanel out = apply_transform(make_clean(v), Transform::parse("log_first_difference"));
    ASSERT_EQ(out.rows(), 1);
    EXPECT_NEAR(out.values(0, 0), 1.0, 1e-15);
}

TEST(ApplyTransform, PercentChange) {
    Eigen::MatrixXd v(3, 1);
    v << 100, 110, 99;
    const CleanPanel out = apply_transform(make_clean(v), Transform::parse("percent_change"));
    ASSERT_EQ(out.rows(), 2);
    EXPECT_NEAR(out.values(0, 0), 10.0, 1e-12);
    EXPECT_NEAR(out.values(1, 0), -10.0, 1e-12);
}

TEST(ApplyTransform, PositivityRatioAppendsDerivedColumn) {
    Eigen::MatrixXd v(1, 2);
    v << 10, 100;
    const CleanPanel out =
        apply_transform(make_clean(v, {"totale_positivi", "tamponi"}), Transform::parse("positivity_ratio"));
    ASSERT_EQ(out.cols(), 3);
    EXPECT_EQ(out.variables.back(), "positivity_ratio");
    EXPECT_DOUBLE_EQ(out.values(0, 2), 0.1);
}

TEST(ApplyTransform, PositivityRatioNeedsBothColumns) {
    EXPECT_THROW(apply_transform(make_clean(Eigen::MatrixXd::Ones(2, 1), {"tamponi"}),
                                 Transform::parse("positivity_ratio")),
                 SchemaError);
}

TEST(ApplyTransform, NonPositiveValueUnderLogNamesDateAndColumn) {
    Eigen::MatrixXd v(3, 2);
    v << 1, 2, 2, 0, 3, 4;
    const CleanPanel in = make_clean(v, {"a", "b"});
    EXPECT_FALSE(transform_defined(in, Transform::parse("log_first_difference")));
    EXPECT_TRUE(transform_defined(in, Transform::parse("first_difference")));
    try {
        apply_transform(in, Transform::parse("log_first_difference"));
        FAIL() << "expected a domain error";
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("'b'"), std::string::npos) << msg;
        EXPECT_NE(msg.find(in.dates[1].iso()), std::string::npos) << msg;
    }
    EXPECT_THROW(apply_transform(in, Transform::parse("percent_change")), DomainError);
}

TEST(Transform, ParseRoundTripsNames) {
    for (const char* name : {"levels", "first_difference", "log_first_difference", "percent_change", "positivity_ratio"}) {
        EXPECT_EQ(Transform::parse(name).name(), name);
    }
    EXPECT_THROW(Transform::parse("cube_root"), ConfigError);
}
