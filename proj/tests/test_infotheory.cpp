#include "dibmix/infotheory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace dibmix;

namespace {

std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t size, double zero_rate) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double>                    p(size);
    double                                 total = 0.0;
    for (auto& v : p) {
        v = unit(rng) < zero_rate ? 0.0 : unit(rng);
        total += v;
    }
    if (total == 0.0) {
        p[0] = total = 1.0;
    }
    for (auto& v : p) {
        v /= total;
    }
    return p;
}

Matrix<double> random_joint(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double zero_rate) {
    const auto     flat = random_distribution(rng, rows * cols, zero_rate);
    Matrix<double> joint(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            joint(i, j) = flat[i * cols + j];
    return joint;
}

} // namespace

TEST(Entropy, ReferenceValues) {
    const std::vector<double> quarter{0.25, 0.75};
    const std::vector<double> point{1.0, 0.0};
    const std::vector<double> uniform(8, 0.125);
    EXPECT_NEAR(info::entropy(quarter), 0.5623351446188083, 1e-15);
    EXPECT_EQ(info::entropy(point), 0.0);
    EXPECT_NEAR(info::entropy(uniform), std::log(8.0), 1e-15);
}

TEST(KlDivergence, ReferenceValues) {
    const std::vector<double> p{0.3, 0.7};
    const std::vector<double> q{0.5, 0.5};
    EXPECT_NEAR(info::kl_divergence(p, q), 0.08228287850505178, 1e-15);
    EXPECT_EQ(info::kl_divergence(p, p), 0.0);
    const std::vector<double> full{0.5, 0.5};
    const std::vector<double> missing{1.0, 0.0};
    EXPECT_EQ(info::kl_divergence(full, missing), std::numeric_limits<double>::infinity());
    EXPECT_NEAR(info::kl_divergence(missing, full), std::log(2.0), 1e-15);
}

TEST(MutualInformation, ReferenceValues) {
    Matrix<double> joint(2, 2);
    joint(0, 0) = 0.4;
    joint(0, 1) = 0.1;
    joint(1, 0) = 0.1;
    joint(1, 1) = 0.4;
    EXPECT_NEAR(info::mutual_information(joint), 0.19274475702175753, 1e-15);

    Matrix<double> independent(2, 3);
    const double   a[2] = {0.3, 0.7};
    const double   b[3] = {0.2, 0.5, 0.3};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            independent(i, j) = a[i] * b[j];
    EXPECT_NEAR(info::mutual_information(independent), 0.0, 1e-15);

    Matrix<double> diagonal(3, 3, 0.0);
    for (int i = 0; i < 3; ++i)
        diagonal(i, i) = 1.0 / 3.0;
    EXPECT_NEAR(info::mutual_information(diagonal), std::log(3.0), 1e-15);
}

TEST(InfoTheory, RejectsNonDistributions) {
    const std::vector<double> bad{0.5, 0.6};
    const std::vector<double> negative{1.5, -0.5};
    EXPECT_FALSE(info::is_distribution(bad));
    EXPECT_FALSE(info::is_distribution(negative));
    EXPECT_THROW(info::entropy(bad), Error);
    const std::vector<double> short_q{1.0};
    const std::vector<double> p{0.5, 0.5};
    EXPECT_THROW(info::kl_divergence(p, short_q), Error);
}

TEST(InfoTheory, RandomProperties) {
    std::mt19937_64                          rng(10);
    std::uniform_int_distribution<std::size_t> dim(1, 12);
    for (int trial = 0; trial < 1000; ++trial) {
        const double zero_rate = (trial % 4) * 0.2;
        const auto   p = random_distribution(rng, dim(rng), zero_rate);
        EXPECT_EQ(info::kl_divergence(p, p), 0.0);
        EXPECT_GE(info::entropy(p), 0.0);
        EXPECT_LE(info::entropy(p), std::log(static_cast<double>(p.size())) + 1e-12);

        const auto joint = random_joint(rng, dim(rng), dim(rng), zero_rate);
        std::vector<double> pt(joint.rows(), 0.0);
        std::vector<double> py(joint.cols(), 0.0);
        for (std::size_t i = 0; i < joint.rows(); ++i)
            for (std::size_t j = 0; j < joint.cols(); ++j) {
                pt[i] += joint(i, j);
                py[j] += joint(i, j);
            }
        const double mi = info::mutual_information(joint);
        EXPECT_GE(mi, 0.0) << "trial " << trial;
        EXPECT_LE(mi, std::min(info::entropy(pt), info::entropy(py)) + 1e-9) << "trial " << trial;

        const auto q = random_distribution(rng, p.size(), 0.0);
        EXPECT_GE(info::kl_divergence(p, q), -1e-15);
    }
}
