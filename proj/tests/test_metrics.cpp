#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fedsim/metrics.hpp"

using namespace fedsim;

TEST_CASE("precision 0.83 with recall 1.00 gives F1 0.91 at two decimals") {
    // Class 0: 83 true positives, 17 false positives, no false negatives.
    ConfusionMatrix cm(2);
    cm.add(0, 0, 83);
    cm.add(1, 0, 17);
    cm.add(1, 1, 63);

    const auto rep = classification_report(cm);
    CHECK(rep.per_class[0].precision == doctest::Approx(0.83).epsilon(1e-12));
    CHECK(rep.per_class[0].recall == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.per_class[0].f1 == doctest::Approx(0.907103825136612).epsilon(1e-12));
    CHECK(std::round(rep.per_class[0].f1 * 100.0) / 100.0 == 0.91);
}

TEST_CASE("diagonal matrix scores 1.0 everywhere") {
    ConfusionMatrix cm(3);
    cm.add(0, 0, 5);
    cm.add(1, 1, 2);
    cm.add(2, 2, 9);
    const auto rep = classification_report(cm);
    CHECK(rep.accuracy == 1.0);
    CHECK(rep.macro_f1 == 1.0);
    CHECK(rep.weighted_f1 == 1.0);
    for (const auto& c : rep.per_class) {
        CHECK(c.precision == 1.0);
        CHECK(c.recall == 1.0);
        CHECK(c.f1 == 1.0);
    }
}

TEST_CASE("three-class fixture matches the hand computation to 1e-12") {
    // rows = truth, cols = predicted:
    //   [5 1 0]
    //   [2 6 2]
    //   [0 1 8]
    ConfusionMatrix cm(3);
    const std::size_t m[3][3] = {{5, 1, 0}, {2, 6, 2}, {0, 1, 8}};
    for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t p = 0; p < 3; ++p) cm.add(t, p, m[t][p]);

    CHECK(cm.total() == 25);
    const auto rep = classification_report(cm);

    const auto near = [](double v) { return doctest::Approx(v).epsilon(1e-12); };
    CHECK(rep.per_class[0].precision == near(0.7142857142857143));
    CHECK(rep.per_class[0].recall == near(0.8333333333333334));
    CHECK(rep.per_class[0].f1 == near(0.7692307692307693));
    CHECK(rep.per_class[0].support == 6);
    CHECK(rep.per_class[1].precision == near(0.75));
    CHECK(rep.per_class[1].recall == near(0.6));
    CHECK(rep.per_class[1].f1 == near(0.6666666666666666));
    CHECK(rep.per_class[1].support == 10);
    CHECK(rep.per_class[2].precision == near(0.8));
    CHECK(rep.per_class[2].recall == near(0.8888888888888888));
    CHECK(rep.per_class[2].f1 == near(0.8421052631578947));
    CHECK(rep.per_class[2].support == 9);

    CHECK(rep.accuracy == near(0.76));
    CHECK(rep.macro_precision == near(0.7547619047619047));
    CHECK(rep.macro_recall == near(0.774074074074074));
    CHECK(rep.macro_f1 == near(0.7593342330184435));
    CHECK(rep.weighted_precision == near(0.7594285714285715));
    CHECK(rep.weighted_recall == near(0.76));
    CHECK(rep.weighted_f1 == near(0.7544399460188934));
}

TEST_CASE("0/0 rates coerce to 0 and set the degenerate flag") {
    // Class 1 never occurs and is never predicted.
    ConfusionMatrix cm(2);
    cm.add(0, 0, 4);
    const auto rep = classification_report(cm);
    CHECK(rep.per_class[1].precision == 0.0);
    CHECK(rep.per_class[1].recall == 0.0);
    CHECK(rep.per_class[1].f1 == 0.0);
    CHECK(rep.per_class[1].degenerate);
    CHECK_FALSE(rep.per_class[0].degenerate);
}

TEST_CASE("micro-averaged F1 equals accuracy for single-label classification") {
    // Micro precision pools TP and FP over classes; for single-label data
    // both pools equal (trace, total - trace), so micro-F1 must equal the
    // accuracy exactly.
    ConfusionMatrix cm(4);
    std::size_t counter = 1;
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t p = 0; p < 4; ++p) cm.add(t, p, (counter += 3) % 7);

    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t c = 0; c < 4; ++c) {
        tp += cm.at(c, c);
        for (std::size_t o = 0; o < 4; ++o) {
            if (o == c) continue;
            fp += cm.at(o, c);
            fn += cm.at(c, o);
        }
    }
    const double micro_p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double micro_r = static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double micro_f1 = 2.0 * micro_p * micro_r / (micro_p + micro_r);

    const auto rep = classification_report(cm);
    CHECK(micro_f1 == rep.accuracy);
}

TEST_CASE("weighted average equals macro average when supports are equal") {
    ConfusionMatrix cm(3);
    // Every true class has support 10.
    cm.add(0, 0, 7);
    cm.add(0, 1, 3);
    cm.add(1, 1, 9);
    cm.add(1, 2, 1);
    cm.add(2, 2, 6);
    cm.add(2, 0, 4);
    const auto rep = classification_report(cm);
    CHECK(rep.weighted_precision == doctest::Approx(rep.macro_precision).epsilon(1e-15));
    CHECK(rep.weighted_recall == doctest::Approx(rep.macro_recall).epsilon(1e-15));
    CHECK(rep.weighted_f1 == doctest::Approx(rep.macro_f1).epsilon(1e-15));
}

TEST_CASE("support fractions sum to one") {
    ConfusionMatrix cm(3);
    cm.add(0, 0, 5);
    cm.add(1, 0, 3);
    cm.add(2, 2, 2);
    const auto rep = classification_report(cm);
    double total_fraction = 0.0;
    std::size_t total_support = 0;
    for (const auto& c : rep.per_class) {
        total_fraction += c.support_fraction;
        total_support += c.support;
    }
    CHECK(total_fraction == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(total_support == cm.total());
}

TEST_CASE("perfect regression predictions") {
    const std::vector<double> t{0.5, 1.5, -2.0};
    const auto rep = regression_report(t, t);
    CHECK(rep.mse == 0.0);
    CHECK(rep.rmse == 0.0);
    CHECK(rep.mae == 0.0);
    REQUIRE(rep.r.has_value());
    CHECK(*rep.r == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rmse is the square root of mse") {
    // Constructed so mse = 0.04 exactly.
    const std::vector<double> pred{0.2, 0.2, -0.2, -0.2};
    const std::vector<double> truth{0.0, 0.4, 0.0, -0.4};
    const auto rep = regression_report(pred, truth);
    CHECK(rep.mse == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(rep.rmse == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(std::abs(rep.rmse - std::sqrt(rep.mse)) < 1e-12);
}

TEST_CASE("five-point regression fixture matches the hand computation") {
    const std::vector<double> pred{1, 2, 3, 4, 5};
    const std::vector<double> truth{1.1, 1.9, 3.2, 3.8, 5.0};
    const auto rep = regression_report(pred, truth);
    CHECK(rep.mse == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(rep.rmse == doctest::Approx(0.14142135623730964).epsilon(1e-12));
    CHECK(rep.mae == doctest::Approx(0.12).epsilon(1e-12));
    REQUIRE(rep.r.has_value());
    CHECK(*rep.r == doctest::Approx(0.9951990015225994).epsilon(1e-12));
    CHECK(std::abs(rep.rmse - std::sqrt(rep.mse)) < 1e-12);
}

TEST_CASE("constant truth leaves r empty") {
    const std::vector<double> pred{1, 2, 3};
    const std::vector<double> truth{4, 4, 4};
    const auto rep = regression_report(pred, truth);
    CHECK_FALSE(rep.r.has_value());
}

TEST_CASE("pearson r is invariant under positive affine prediction transforms") {
    const std::vector<double> pred{0.3, -1.2, 2.5, 0.0, 1.1, -0.4};
    const std::vector<double> truth{0.5, -1.0, 2.0, 0.2, 0.9, -0.1};
    const auto base = regression_report(pred, truth);
    REQUIRE(base.r.has_value());

    for (double a : {0.5, 2.0, 17.0}) {
        for (double b : {-3.0, 0.0, 4.25}) {
            std::vector<double> mapped;
            for (double p : pred) mapped.push_back(a * p + b);
            const auto rep = regression_report(mapped, truth);
            REQUIRE(rep.r.has_value());
            CHECK(*rep.r == doctest::Approx(*base.r).epsilon(1e-12));
        }
    }
}
