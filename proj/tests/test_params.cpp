#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fedsim/errors.hpp"
#include "fedsim/params.hpp"

using namespace fedsim;

namespace {

LayoutPtr two_segment_layout() {
    return std::make_shared<const ModelLayout>(std::vector<LayoutSegment>{
        {"body", 3, Partition::kShared},
        {"head", 2, Partition::kPersonal},
    });
}

}  // namespace

TEST_CASE("layout offsets and lookup") {
    const auto layout = two_segment_layout();
    CHECK(layout->dim() == 5);
    CHECK(layout->segment_count() == 2);
    CHECK(layout->offset(0) == 0);
    CHECK(layout->offset(1) == 3);
    CHECK(layout->segment_index("head") == 1);
    CHECK_THROWS_AS((void)layout->segment_index("absent"), DimensionError);
}

TEST_CASE("vector construction and zero fill") {
    const auto layout = make_dense_layout(4);
    ParamVector zero(layout);
    CHECK(zero.dim() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(zero[i] == 0.0);

    ParamVector v(layout, {1, 2, 3, 4});
    CHECK(v[3] == 4.0);
    CHECK_THROWS_AS(ParamVector(layout, {1, 2}), DimensionError);
}

TEST_CASE("axpy, scale, subtract against hand arithmetic") {
    const auto layout = make_dense_layout(3);
    ParamVector x(layout, {1, -2, 0.5});
    ParamVector y(layout, {10, 10, 10});

    const auto r = axpy(2.0, x, y);  // y + 2x
    CHECK(r[0] == 12.0);
    CHECK(r[1] == 6.0);
    CHECK(r[2] == 11.0);

    const auto s = scale(-3.0, x);
    CHECK(s[0] == -3.0);
    CHECK(s[1] == 6.0);
    CHECK(s[2] == -1.5);

    const auto d = subtract(y, x);
    CHECK(d[0] == 9.0);
    CHECK(d[1] == 12.0);
    CHECK(d[2] == 9.5);
}

TEST_CASE("norm and dot") {
    const auto layout = make_dense_layout(2);
    ParamVector v(layout, {3, 4});
    CHECK(l2_norm(v) == doctest::Approx(5.0).epsilon(1e-15));
    ParamVector w(layout, {-1, 2});
    CHECK(dot(v, w) == 5.0);
}

TEST_CASE("operations reject layout mismatches") {
    ParamVector a(make_dense_layout(3));
    ParamVector b(make_dense_layout(3));  // distinct handle, same shape
    CHECK_THROWS_AS((void)axpy(1.0, a, b), DimensionError);
    CHECK_THROWS_AS((void)dot(a, b), DimensionError);
}

TEST_CASE("restrict_to zeroes the other partition") {
    const auto layout = two_segment_layout();
    ParamVector v(layout, {1, 2, 3, 4, 5});

    const auto shared = restrict_to(v, Partition::kShared);
    CHECK(shared[0] == 1.0);
    CHECK(shared[1] == 2.0);
    CHECK(shared[2] == 3.0);
    CHECK(shared[3] == 0.0);
    CHECK(shared[4] == 0.0);

    const auto personal = restrict_to(v, Partition::kPersonal);
    CHECK(personal[0] == 0.0);
    CHECK(personal[3] == 4.0);
    CHECK(personal[4] == 5.0);
}

TEST_CASE("restrict decomposition: shared + personal == identity") {
    const auto layout = two_segment_layout();
    ParamVector v(layout, {7, -1, 2, 0.25, -9});
    const auto recomposed =
        axpy(1.0, restrict_to(v, Partition::kShared), restrict_to(v, Partition::kPersonal));
    for (std::size_t i = 0; i < v.dim(); ++i) CHECK(recomposed[i] == v[i]);
}

TEST_CASE("overlay writes only the selected partition") {
    const auto layout = two_segment_layout();
    ParamVector dst(layout, {1, 2, 3, 4, 5});
    ParamVector src(layout, {10, 20, 30, 40, 50});

    overlay(dst, src, Partition::kPersonal);
    CHECK(dst[0] == 1.0);
    CHECK(dst[2] == 3.0);
    CHECK(dst[3] == 40.0);
    CHECK(dst[4] == 50.0);

    overlay(dst, src, Partition::kShared);
    CHECK(dst[0] == 10.0);
    CHECK(dst[1] == 20.0);
    CHECK(dst[2] == 30.0);
}

TEST_CASE("require_finite rejects NaN and infinity") {
    const auto layout = make_dense_layout(2);
    ParamVector ok(layout, {0.0, 1.0});
    CHECK_NOTHROW(require_finite(ok, "test"));
    ParamVector bad(layout, {0.0, std::nan("")});
    CHECK_THROWS(require_finite(bad, "test"));
    ParamVector inf(layout, {1.0, INFINITY});
    CHECK_THROWS(require_finite(inf, "test"));
}
