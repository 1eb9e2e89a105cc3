#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rwsgd/objective.hpp"
#include "rwsgd/rng.hpp"

using namespace rwsgd;

namespace {

Vector random_vector(std::size_t d, double scale, Rng& rng) {
    Vector v(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) v[static_cast<Eigen::Index>(k)] = scale * rng.normal();
    return v;
}

NodeData random_node(std::size_t d, std::size_t n, Rng& rng) {
    return NodeData(random_vector(d, 2.0, rng), rng.coin() ? 1 : -1, n);
}

// Central difference of a scalar function along coordinate k.
template <class F>
double central_difference(F f, Vector w, Eigen::Index k, double h) {
    w[k] += h;
    const double up = f(w);
    w[k] -= 2 * h;
    const double down = f(w);
    return (up - down) / (2 * h);
}

}  // namespace

TEST(Objective, LipschitzConstantFormula) {
    Vector x(2);
    x << 3.0, 4.0;
    const NodeData nd(x, 1, 8);
    EXPECT_DOUBLE_EQ(nd.lipschitz, 1.0 + 0.25 * 8 * 25.0);
    EXPECT_THROW(NodeData(x, 0, 8), ConfigError);
}

TEST(Objective, LossAtOriginIsNLog2) {
    Rng rng(1);
    const NodeData nd = random_node(4, 17, rng);
    EXPECT_NEAR(local_loss(Vector::Zero(4), nd, 17), 17 * std::log(2.0), 1e-12);
}

TEST(Objective, LossScalarExample) {
    Vector x(2), w(2);
    x << 1, 0;
    w << 1, 0;
    // mpmath: 10*log(1+e^-1) + 1/2
    EXPECT_NEAR(local_loss(w, NodeData(x, 1, 10), 10), 3.63261687518222834, 1e-12);
}

TEST(Objective, LossLargeMarginLimit) {
    Vector x(1), w(1);
    x << 1.0;
    w << 800.0;  // exp(800) overflows without the stable form
    const NodeData nd(x, 1, 5);
    EXPECT_NEAR(local_loss(w, nd, 5), 0.5 * 800.0 * 800.0, 1e-9);
    EXPECT_TRUE(std::isfinite(local_loss(-w, nd, 5)));
    EXPECT_NEAR((local_gradient(w, nd, 5) - w).norm(), 0.0, 1e-12);
}

TEST(Objective, GradientAtOrigin) {
    Rng rng(2);
    const NodeData nd = random_node(3, 11, rng);
    const Vector g = local_gradient(Vector::Zero(3), nd, 11);
    EXPECT_NEAR((g - (-(11 / 2.0) * nd.y * nd.x)).norm(), 0.0, 1e-12);
}

TEST(Objective, GradientMatchesFiniteDifferences) {
    Rng rng(3);
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + rng.below(6), n = 1 + rng.below(50);
        const NodeData nd = random_node(d, n, rng);
        const Vector w = random_vector(d, 0.5, rng);
        const Vector g = local_gradient(w, nd, n);
        auto f = [&](const Vector& u) { return local_loss(u, nd, n); };
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(d); ++k) {
            const double fd = central_difference(f, w, k, h);
            EXPECT_LE(std::abs(fd - g[k]), 1e-5 * std::max(1.0, std::abs(g[k])))
                << "trial " << trial << " coord " << k;
        }
    }
}

TEST(Objective, GlobalGradientMatchesFiniteDifferences) {
    const Dataset data = generate_dataset(12, 3, Vector::Constant(3, 0.7), 2.0, 5);
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector w = random_vector(3, 0.5, rng);
        const Vector g = global_gradient(w, data);
        auto f = [&](const Vector& u) { return global_loss(u, data); };
        for (Eigen::Index k = 0; k < 3; ++k)
            EXPECT_LE(std::abs(central_difference(f, w, k, 1e-5) - g[k]),
                      1e-5 * std::max(1.0, std::abs(g[k])));
    }
}

TEST(Objective, GlobalIsMeanOfLocals) {
    const Dataset one = generate_dataset(1, 2, Vector::Constant(2, 1.0), 1.0, 8);
    Vector w(2);
    w << 0.3, -0.2;
    EXPECT_DOUBLE_EQ(global_loss(w, one), local_loss(w, one.nodes[0], 1));
    EXPECT_NEAR((global_gradient(w, one) - local_gradient(w, one.nodes[0], 1)).norm(), 0.0, 1e-15);

    const Dataset many = generate_dataset(40, 2, Vector::Constant(2, 1.0), 1.0, 8);
    EXPECT_NEAR(global_loss(Vector::Zero(2), many), 40 * std::log(2.0), 1e-10);
}

TEST(Objective, ConvexityWitness) {
    Rng rng(6);
    for (int trial = 0; trial < 500; ++trial) {
        const NodeData nd = random_node(3, 20, rng);
        const Vector a = random_vector(3, 3.0, rng), b = random_vector(3, 3.0, rng);
        const double t = rng.uniform();
        const double lhs = local_loss(t * a + (1 - t) * b, nd, 20);
        const double rhs = t * local_loss(a, nd, 20) + (1 - t) * local_loss(b, nd, 20);
        EXPECT_LE(lhs, rhs + 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST(Objective, LipschitzWitness) {
    Rng rng(7);
    const FeasibleSet set(10.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const NodeData nd = random_node(4, 30, rng);
        const Vector a = project(random_vector(4, 5.0, rng), set);
        const Vector b = project(random_vector(4, 5.0, rng), set);
        const double lhs = (local_gradient(a, nd, 30) - local_gradient(b, nd, 30)).norm();
        EXPECT_LE(lhs, nd.lipschitz * (a - b).norm() * (1 + 1e-12) + 1e-12);
    }
}

TEST(Objective, ProjectionExamples) {
    const FeasibleSet unit(1.0);
    Vector w(2);
    w << 3, 4;
    const Vector p = project(w, unit);
    EXPECT_NEAR(p[0], 0.6, 1e-15);
    EXPECT_NEAR(p[1], 0.8, 1e-15);
    EXPECT_EQ(project(Vector::Zero(2), unit), Vector::Zero(2));
    Vector inner(2);
    inner << 0.3, 0.4;  // norm R/2
    EXPECT_EQ(project(inner, unit), inner);
    EXPECT_THROW(FeasibleSet{0.0}, ConfigError);
    EXPECT_THROW(FeasibleSet{INFINITY}, ConfigError);
}

TEST(Objective, ProjectionIsNonExpansive) {
    Rng rng(9);
    const FeasibleSet set(2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vector u = random_vector(3, 3.0, rng), v = random_vector(3, 3.0, rng);
        const Vector pu = project(u, set);
        EXPECT_LE(pu.norm(), 2.0 * (1 + 1e-15));
        EXPECT_LE((pu - project(v, set)).norm(), (u - v).norm() + 1e-12);
    }
}

TEST(Objective, DatasetGenerationDeterministicAndCentered) {
    const Dataset a = generate_dataset(50, 3, Vector::Constant(3, 1.0), 10.0, 42);
    const Dataset b = generate_dataset(50, 3, Vector::Constant(3, 1.0), 10.0, 42);
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_EQ(a.nodes[i].x, b.nodes[i].x);
        EXPECT_EQ(a.nodes[i].y, b.nodes[i].y);
        EXPECT_DOUBLE_EQ(a.nodes[i].lipschitz, lipschitz_constant(a.nodes[i].x, 50));
    }

    // mu = 0: features have mean zero whatever the label
    const std::size_t n = 100000;
    const Dataset c = generate_dataset(n, 3, Vector::Zero(3), 1.0, 43);
    Vector sum = Vector::Zero(3);
    for (const auto& nd : c.nodes) sum += nd.x;
    const double se = std::sqrt(1.0 / n);
    for (Eigen::Index k = 0; k < 3; ++k) EXPECT_NEAR(sum[k] / n, 0.0, 3 * se);

    EXPECT_THROW(generate_dataset(10, 3, Vector::Zero(2), 1.0, 1), ConfigError);
    EXPECT_THROW(generate_dataset(10, 3, Vector::Zero(3), 0.0, 1), ConfigError);
}

TEST(Objective, LabelMeanShift) {
    // x ~ N(y*mu, v I): the label-signed mean of x recovers mu
    const std::size_t n = 20000;
    const Dataset c = generate_dataset(n, 2, Vector::Constant(2, 1.5), 4.0, 44);
    Vector signed_sum = Vector::Zero(2);
    int positives = 0;
    for (const auto& nd : c.nodes) {
        signed_sum += nd.y * nd.x;
        positives += nd.y > 0;
    }
    const double se = std::sqrt(4.0 / n);
    EXPECT_NEAR(signed_sum[0] / n, 1.5, 3 * se);
    EXPECT_NEAR(positives / double(n), 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(Objective, DatasetCsvRoundTrip) {
    const Dataset a = generate_dataset(7, 3, Vector::Constant(3, 1.0), 2.0, 4);
    std::stringstream ss;
    write_dataset_csv(ss, a);
    EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "y,x0,x1,x2");
    const Dataset b = read_dataset_csv(ss);
    ASSERT_EQ(b.size(), 7u);
    for (std::size_t i = 0; i < 7; ++i) {
        EXPECT_EQ(a.nodes[i].y, b.nodes[i].y);
        EXPECT_EQ(a.nodes[i].x, b.nodes[i].x);
        EXPECT_EQ(a.nodes[i].lipschitz, b.nodes[i].lipschitz);
    }
    std::istringstream bad("y,x0\n1,abc\n");
    EXPECT_THROW(read_dataset_csv(bad), ConfigError);
}
