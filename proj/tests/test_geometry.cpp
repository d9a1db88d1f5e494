#include <gtest/gtest.h>

#include "selest/geometry.hpp"
#include "selest/random.hpp"

#include "oracles.hpp"

using namespace selest;

namespace {

Box box1(double lo, double hi) { return Box::from_intervals({{lo, hi}}); }

Box box2(double lo1, double hi1, double lo2, double hi2) {
    return Box::from_intervals({{lo1, hi1}, {lo2, hi2}});
}

Box random_box(RandomStream& rng, std::size_t dim, double span = 1.0) {
    std::vector<Interval> dims(dim);
    for (auto& iv : dims) {
        double a = rng.uniform(0.0, span);
        double b = rng.uniform(0.0, span);
        iv = a <= b ? Interval{a, b} : Interval{b, a};
    }
    return Box::from_intervals(std::move(dims));
}

Box random_int_box(RandomStream& rng, std::size_t dim, int extent) {
    std::vector<Interval> dims(dim);
    for (auto& iv : dims) {
        auto a = static_cast<int>(rng.below(static_cast<std::size_t>(extent) + 1));
        auto b = static_cast<int>(rng.below(static_cast<std::size_t>(extent) + 1));
        if (a > b) std::swap(a, b);
        iv = Interval{static_cast<double>(a), static_cast<double>(b)};
    }
    return Box::from_intervals(std::move(dims));
}

} // namespace

TEST(Intersect, IdentityOnSelf) {
    Box b = box2(0, 1, 0, 1);
    EXPECT_EQ(intersect(b, b), b);
}

TEST(Intersect, DisjointIsEmpty) {
    Box r = intersect(box1(0, 1), box1(2, 3));
    EXPECT_TRUE(r.empty());
    EXPECT_DOUBLE_EQ(r.volume(), 0.0);
}

TEST(Intersect, OverlapByHand) {
    Box r = intersect(box2(0, 2, 0, 2), box2(1, 3, 1, 3));
    EXPECT_EQ(r, box2(1, 2, 1, 2));
    EXPECT_DOUBLE_EQ(r.volume(), 1.0);
}

TEST(Intersect, TouchingBoxesCanonicalizeToEmpty) {
    Box r = intersect(box1(0, 1), box1(1, 2));
    EXPECT_TRUE(r.empty());
    EXPECT_EQ(r, Box::empty_box(1));
}

TEST(Intersect, DimensionMismatchThrows) {
    EXPECT_THROW(intersect(box1(0, 1), box2(0, 1, 0, 1)), std::invalid_argument);
}

TEST(Volume, Basics) {
    EXPECT_DOUBLE_EQ(box2(0, 1, 0, 1).volume(), 1.0);
    EXPECT_DOUBLE_EQ(Box::empty_box(3).volume(), 0.0);
    EXPECT_DOUBLE_EQ(box2(0, 0.5, 0, 4).volume(), 2.0);
}

TEST(Volume, DegenerateIntervalCanonicalizesToEmpty) {
    Box b = Box::from_intervals({{0.5, 0.5}, {0, 1}});
    EXPECT_TRUE(b.empty());
    EXPECT_DOUBLE_EQ(b.volume(), 0.0);
}

TEST(RegionVolume, SingleAndDuplicateTerms) {
    EXPECT_DOUBLE_EQ(region_volume(Region(box1(0, 1))), 1.0);
    EXPECT_DOUBLE_EQ(region_volume(Region({box1(0, 1), box1(0, 1)})), 1.0);
}

TEST(RegionVolume, OverlappingPair) {
    EXPECT_DOUBLE_EQ(region_volume(Region({box1(0, 2), box1(1, 3)})), 3.0);
}

TEST(RegionVolume, TermCapEnforced) {
    std::vector<Box> terms(21, box1(0, 1));
    EXPECT_THROW(region_volume(Region(terms)), std::invalid_argument);
}

TEST(RegionIntersectVolume, Examples) {
    EXPECT_DOUBLE_EQ(region_intersect_volume(Region(box1(0, 2)), box1(1, 3)), 1.0);
    EXPECT_DOUBLE_EQ(region_intersect_volume(Region({box1(0, 1), box1(2, 3)}), box1(0.5, 2.5)),
                     1.0);
    EXPECT_DOUBLE_EQ(region_intersect_volume(Region(box1(0, 1)), Box::empty_box(1)), 0.0);
}

TEST(GeometryProperties, IntersectionCommutesAndBoundsVolume) {
    RandomStream rng(101);
    for (int i = 0; i < 200; ++i) {
        std::size_t dim = 1 + rng.below(3);
        Box a = random_box(rng, dim);
        Box b = random_box(rng, dim);
        Box ab = intersect(a, b);
        EXPECT_EQ(ab, intersect(b, a));
        EXPECT_LE(ab.volume(), std::min(a.volume(), b.volume()) + 1e-15);
    }
}

TEST(GeometryProperties, IntersectionAssociativeUpToEmpty) {
    RandomStream rng(102);
    for (int i = 0; i < 200; ++i) {
        std::size_t dim = 1 + rng.below(3);
        Box a = random_box(rng, dim);
        Box b = random_box(rng, dim);
        Box c = random_box(rng, dim);
        EXPECT_EQ(intersect(intersect(a, b), c), intersect(a, intersect(b, c)));
    }
}

TEST(GeometryProperties, InclusionExclusionMatchesUnitCellOracle) {
    RandomStream rng(103);
    for (std::size_t dim = 1; dim <= 3; ++dim) {
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<Box> terms;
            std::size_t k = 1 + rng.below(5);
            for (std::size_t t = 0; t < k; ++t) terms.push_back(random_int_box(rng, dim, 10));
            double expected = oracles::unit_cell_union_volume(terms, dim, 10);
            EXPECT_NEAR(region_volume(Region(terms)), expected, 1e-9);
        }
    }
}

TEST(GeometryProperties, RegionVolumeSubadditive) {
    RandomStream rng(104);
    for (int rep = 0; rep < 100; ++rep) {
        std::size_t dim = 1 + rng.below(2);
        std::vector<Box> terms;
        double sum = 0.0;
        for (std::size_t t = 0; t < 1 + rng.below(4); ++t) {
            terms.push_back(random_box(rng, dim));
            sum += terms.back().volume();
        }
        EXPECT_LE(region_volume(Region(terms)), sum + 1e-12);
    }
}

TEST(TextualForm, BoxRoundTrip) {
    Box b = box2(0.125, 1.5, -2.25, 3.75);
    EXPECT_EQ(parse_box(format_box(b)), b);
    EXPECT_EQ(format_box(b), "[0.125,1.5]x[-2.25,3.75]");
}

TEST(TextualForm, RegionRoundTrip) {
    Region r({box1(0, 1), box1(2, 3.5)});
    Region back = parse_region(format_region(r));
    ASSERT_EQ(back.terms.size(), 2u);
    EXPECT_EQ(back.terms[0], r.terms[0]);
    EXPECT_EQ(back.terms[1], r.terms[1]);
}

TEST(TextualForm, ParseRejectsGarbage) {
    EXPECT_THROW(parse_box("nonsense"), std::runtime_error);
    EXPECT_THROW(parse_box("[0,1]y[2,3]"), std::runtime_error);
    EXPECT_THROW(parse_box("[1,0]"), std::runtime_error);
    EXPECT_THROW(parse_box(""), std::runtime_error);
}

TEST(TextualForm, ParseAcceptsScientificAndSpaces) {
    Box b = parse_box(" [1e-3, 2.5e0] ");
    EXPECT_DOUBLE_EQ(b[0].lo, 1e-3);
    EXPECT_DOUBLE_EQ(b[0].hi, 2.5);
}
