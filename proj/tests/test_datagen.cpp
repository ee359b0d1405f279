#include "dibmix/datagen.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace dibmix;
using dibmix::testing::normal_overlap_area;

namespace {

double summed_min(const CategoricalMasses& m) {
    double total = 0.0;
    for (std::size_t v = 0; v < m.first.size(); ++v) {
        total += std::min(m.first[v], m.second[v]);
    }
    return total;
}

} // namespace

TEST(NormalQuantile, InvertsTheCdf) {
    for (double p : {1e-12, 1e-6, 0.01, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.97575, 0.999, 1.0 - 1e-9}) {
        EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-14 + 1e-12 * p) << p;
    }
    EXPECT_EQ(normal_quantile(0.5), 0.0);
    EXPECT_THROW(normal_quantile(0.0), Error);
    EXPECT_THROW(normal_quantile(1.0), Error);
}

TEST(ContinuousSeparation, ReferenceValues) {
    EXPECT_NEAR(continuous_separation(0.3), 2.0728667789875797, 1e-12);
    EXPECT_NEAR(continuous_separation(0.6), 1.0488010254160818, 1e-12);
    EXPECT_NEAR(continuous_separation(0.01), 5.151658607097802, 1e-11);
    EXPECT_LT(continuous_separation(1.0 - 1e-9), 1e-8);
    EXPECT_THROW(continuous_separation(0.0), Error);
    EXPECT_THROW(continuous_separation(1.0), Error);
}

TEST(ContinuousSeparation, MatchesQuadrature) {
    for (double overlap : {0.01, 0.1, 0.3, 0.5, 0.6, 0.9}) {
        EXPECT_NEAR(normal_overlap_area(continuous_separation(overlap)), overlap, 1e-9) << overlap;
    }
}

TEST(CategoricalMasses, ReferenceValues) {
    const auto two = categorical_masses(0.6, 2);
    EXPECT_NEAR(two.first[0], 0.7, 1e-15);
    EXPECT_NEAR(two.first[1], 0.3, 1e-15);
    EXPECT_NEAR(two.second[0], 0.3, 1e-15);
    EXPECT_NEAR(two.second[1], 0.7, 1e-15);
    EXPECT_NEAR(summed_min(two), 0.6, 1e-15);

    const auto four = categorical_masses(0.3, 4);
    const std::vector<double> first{0.775, 0.075, 0.075, 0.075};
    const std::vector<double> second{0.075, 0.775, 0.075, 0.075};
    for (std::size_t v = 0; v < 4; ++v) {
        EXPECT_NEAR(four.first[v], first[v], 1e-15);
        EXPECT_NEAR(four.second[v], second[v], 1e-15);
    }
    EXPECT_NEAR(summed_min(four), 0.3, 1e-15);

    const auto near_one = categorical_masses(1.0 - 1e-12, 3);
    for (std::size_t v = 0; v < 3; ++v) {
        EXPECT_NEAR(near_one.first[v], 1.0 / 3.0, 1e-11);
        EXPECT_NEAR(near_one.second[v], 1.0 / 3.0, 1e-11);
    }
}

TEST(CategoricalMasses, SummedMinEqualsOverlap) {
    for (int levels = 2; levels <= 10; ++levels) {
        for (double overlap = 0.05; overlap < 1.0; overlap += 0.05) {
            const auto m = categorical_masses(overlap, levels);
            EXPECT_NEAR(summed_min(m), overlap, 1e-9);
            EXPECT_NEAR(std::accumulate(m.first.begin(), m.first.end(), 0.0), 1.0, 1e-12);
            EXPECT_NEAR(std::accumulate(m.second.begin(), m.second.end(), 0.0), 1.0, 1e-12);
        }
    }
}

TEST(Generate, ClusterSizes) {
    GenSpec spec;
    auto    data = generate(spec);
    EXPECT_EQ(std::count(data.truth.begin(), data.truth.end(), 0), 100);
    EXPECT_EQ(std::count(data.truth.begin(), data.truth.end(), 1), 100);
    spec.balance = Balance::imbalanced;
    data = generate(spec);
    EXPECT_EQ(std::count(data.truth.begin(), data.truth.end(), 0), 50);
    EXPECT_EQ(std::count(data.truth.begin(), data.truth.end(), 1), 150);
}

TEST(Generate, ShapeAndReproducibility) {
    GenSpec spec;
    spec.n = 150;
    spec.continuous = 3;
    spec.categorical = 2;
    spec.levels = {3, 5};
    spec.seed = 77;
    const auto a = generate(spec);
    const auto b = generate(spec);
    EXPECT_EQ(a.data.size(), 150u);
    EXPECT_EQ(a.data.continuous_count(), 3u);
    EXPECT_EQ(a.data.levels(1), 5);
    EXPECT_EQ(a.data.continuous(), b.data.continuous());
    EXPECT_EQ(a.data.categorical(), b.data.categorical());
    EXPECT_EQ(a.truth, b.truth);
    spec.seed = 78;
    EXPECT_NE(generate(spec).data.continuous(), a.data.continuous());
}

TEST(Generate, RejectsInvalidSpecs) {
    GenSpec spec;
    spec.overlap_continuous = 0.0;
    EXPECT_THROW(generate(spec), Error);
    spec = {};
    spec.levels = {1};
    EXPECT_THROW(generate(spec), Error);
    spec = {};
    spec.levels = {3, 4, 5};
    EXPECT_THROW(generate(spec), Error);
    spec = {};
    spec.n = 2;
    EXPECT_THROW(generate(spec), Error);
}

TEST(Generate, EmpiricalOverlapMatchesSpec) {
    for (double overlap : {0.3, 0.6}) {
        GenSpec spec;
        spec.n = 100000;
        spec.continuous = 1;
        spec.categorical = 0;
        spec.overlap_continuous = overlap;
        spec.seed = 5;
        const auto   data = generate(spec);
        const double width = 0.1;
        const double lo = -7.0;
        const auto   bins = static_cast<std::size_t>((14.0 + data.separation) / width);
        std::vector<double> h0(bins, 0.0);
        std::vector<double> h1(bins, 0.0);
        for (std::size_t i = 0; i < spec.n; ++i) {
            const auto b = static_cast<std::size_t>(std::clamp((data.data.continuous()(i, 0) - lo) / width, 0.0,
                                                               static_cast<double>(bins - 1)));
            (data.truth[i] == 0 ? h0 : h1)[b] += 1.0;
        }
        double area = 0.0;
        for (std::size_t b = 0; b < bins; ++b) {
            area += std::min(h0[b] / 50000.0, h1[b] / 50000.0);
        }
        EXPECT_NEAR(area, overlap, 0.02);
    }
}

TEST(Generate, EmpiricalCategoricalFrequencies) {
    GenSpec spec;
    spec.n = 40000;
    spec.continuous = 0;
    spec.categorical = 1;
    spec.levels = {4};
    spec.overlap_categorical = 0.3;
    spec.seed = 6;
    const auto          data = generate(spec);
    std::vector<double> freq(4, 0.0);
    for (std::size_t i = 0; i < spec.n; ++i) {
        if (data.truth[i] == 0) {
            freq[static_cast<std::size_t>(data.data.categorical()(i, 0))] += 1.0 / 20000.0;
        }
    }
    for (std::size_t v = 0; v < 4; ++v) {
        EXPECT_NEAR(freq[v], data.masses[0].first[v], 0.015);
    }
}
