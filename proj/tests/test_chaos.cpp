#include "rbto/chaos.hpp"
#include "rbto/error.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>
#include <set>

using namespace rbto;

namespace {

Eigen::VectorXd v2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

std::vector<double> responses(const CollocationSet& set, const std::function<double(double, double)>& f) {
    std::vector<double> z;
    for (const auto& p : set.points) z.push_back(f(p[0], p[1]));
    return z;
}

} // namespace

TEST(Hermite, ProbabilistsValues) {
    EXPECT_EQ(hermite(0, 1.7), 1.0);
    EXPECT_EQ(hermite(1, 1.7), 1.7);
    EXPECT_EQ(hermite(2, 2.0), 3.0);
    EXPECT_EQ(hermite(3, 1.0), -2.0);
    EXPECT_NEAR(hermite(4, 0.5), 0.0625 - 6 * 0.25 + 3, 1e-15);
    EXPECT_NEAR(hermite_derivative(3, 0.4), 3 * (0.16 - 1), 1e-15);
}

TEST(HermiteTerms, TenTermsInListedOrder) {
    const HermiteBasis b = hermite_terms(2, 3);
    ASSERT_EQ(b.size(), 10);
    const std::vector<std::vector<int>> expected = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {0, 2},
                                                    {1, 1}, {3, 0}, {0, 3}, {1, 2}, {2, 1}};
    EXPECT_EQ(b.exponents, expected);
    const double a1 = 0.7, a2 = -1.3;
    const Eigen::VectorXd t = b.terms(v2(a1, a2));
    const double ref[10] = {1, a1, a2, a1 * a1 - 1, a2 * a2 - 1, a1 * a2, a1 * a1 * a1 - 3 * a1,
                            a2 * a2 * a2 - 3 * a2, a1 * a2 * a2 - a1, a1 * a1 * a2 - a2};
    for (int k = 0; k < 10; ++k) EXPECT_NEAR(t[k], ref[k], 1e-14) << b.label(k);
    const double norms[10] = {1, 1, 1, 2, 2, 1, 6, 6, 2, 2};
    for (int k = 0; k < 10; ++k) EXPECT_EQ(b.norm_squared(k), norms[k]);
    EXPECT_EQ(hermite_terms(3, 2).size(), 10);
    EXPECT_EQ(hermite_terms(4, 3).size(), 35);
    EXPECT_EQ(b.label(8), "He1(xi1)*He2(xi2)");
}

TEST(HermiteTerms, MonteCarloOrthogonality) {
    const HermiteBasis b = hermite_terms(2, 3);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    const int draws = 1000000;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(10, 10), s2 = Eigen::MatrixXd::Zero(10, 10);
    for (int i = 0; i < draws; ++i) {
        const Eigen::VectorXd t = b.terms(v2(n01(rng), n01(rng)));
        const Eigen::MatrixXd prod = t * t.transpose();
        s += prod;
        s2 += prod.cwiseAbs2();
    }
    for (int k = 0; k < 10; ++k) {
        for (int j = 0; j < 10; ++j) {
            const double mean = s(k, j) / draws;
            const double se = std::sqrt((s2(k, j) / draws - mean * mean) / draws);
            const double expected = k == j ? b.norm_squared(k) : 0.0;
            EXPECT_LE(std::abs(mean - expected), 3.5 * se + 1e-12) << k << "," << j;
        }
    }
}

TEST(HermiteRoots, He4) {
    const Eigen::VectorXd r = hermite_roots(4);
    const double small = std::sqrt(3 - std::sqrt(6.0));
    const double big = std::sqrt(3 + std::sqrt(6.0));
    EXPECT_NEAR(r[0], -big, 1e-14);
    EXPECT_NEAR(r[1], -small, 1e-14);
    EXPECT_NEAR(r[2], small, 1e-14);
    EXPECT_NEAR(r[3], big, 1e-14);
    EXPECT_NEAR(small, 0.7420, 5e-5);
    EXPECT_NEAR(big, 2.3344, 5e-5);
    for (int k = 1; k <= 8; ++k) {
        const Eigen::VectorXd rk = hermite_roots(k);
        for (Eigen::Index i = 0; i < rk.size(); ++i) EXPECT_NEAR(hermite(k, rk[i]), 0.0, 1e-10);
    }
}

TEST(Collocation, SeventeenPointsFromTwentyFiveCandidates) {
    const HermiteBasis b = hermite_terms(2, 3);
    const CollocationSet set = collocation_points(b, 17);
    ASSERT_EQ(set.size(), 17);
    EXPECT_EQ(set.target, 17);
    EXPECT_EQ(set.points[0], v2(0, 0));

    // enumeration oracle: density ranks by radius; sort all 25 by radius
    const double s = std::sqrt(3 - std::sqrt(6.0)), g = std::sqrt(3 + std::sqrt(6.0));
    const double axis[5] = {-g, -s, 0, s, g};
    std::vector<std::pair<double, Eigen::VectorXd>> pool;
    for (double x : axis)
        for (double y : axis) pool.emplace_back(x * x + y * y, v2(x, y));
    std::vector<double> radii;
    for (auto& p : pool) radii.push_back(p.first);
    std::sort(radii.begin(), radii.end());
    // the first 17 radii: 0, 4 x s^2, 4 x 2s^2, 4 x g^2, 8 x (s^2 + g^2) -> boundary splits the 8-point class
    for (int k = 0; k < 17; ++k) EXPECT_NEAR(set.points[static_cast<std::size_t>(k)].squaredNorm(), radii[static_cast<std::size_t>(k)], 1e-12);
    // classes fully inside the selection are swap-closed
    for (const auto& p : set.points) {
        if (p.squaredNorm() >= g * g + s * s - 1e-9) continue; // split class, lexicographic rule
        const Eigen::VectorXd q = v2(p[1], p[0]);
        EXPECT_TRUE(std::any_of(set.points.begin(), set.points.end(), [&](const Eigen::VectorXd& r) { return (r - q).norm() < 1e-14; }));
    }
    // the split class is filled in lexicographic order
    std::vector<Eigen::VectorXd> tied;
    for (const auto& p : pool)
        if (std::abs(p.first - (g * g + s * s)) < 1e-9) tied.push_back(p.second);
    std::sort(tied.begin(), tied.end(), [](const auto& l, const auto& r) {
        return std::lexicographical_compare(l.data(), l.data() + 2, r.data(), r.data() + 2);
    });
    for (int k = 0; k < 4; ++k) EXPECT_LT((set.points[static_cast<std::size_t>(13 + k)] - tied[static_cast<std::size_t>(k)]).norm(), 1e-14);

    EXPECT_THROW(collocation_points(b, 26), Error);
    EXPECT_THROW(collocation_points(b, 9), Error);
    EXPECT_EQ(collocation_points(b, 25).size(), 25);
}

TEST(Fit, RecoversInSpanPolynomial) {
    const HermiteBasis b = hermite_terms(2, 3);
    const CollocationSet set = collocation_points(b, 17);
    const ChaosSurrogate s = fit(set, responses(set, [](double x, double y) { return 2 + 3 * x - y + 0.5 * x * y; }), b);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(10);
    expected[0] = 2;
    expected[1] = 3;
    expected[2] = -1;
    expected[5] = 0.5;
    EXPECT_LT((s.coefficients - expected).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(s.residual_norm, 1e-8);

    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd c(10);
        for (int k = 0; k < 10; ++k) c[k] = n01(rng);
        ChaosSurrogate ref;
        ref.basis = b;
        ref.coefficients = c;
        const ChaosSurrogate got = fit(set, responses(set, [&](double x, double y) { return ref.eval(v2(x, y)); }), b);
        EXPECT_LT((got.coefficients - c).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Fit, ConstantAndOutOfSpan) {
    const HermiteBasis b = hermite_terms(2, 3);
    const CollocationSet set = collocation_points(b, 17);
    const ChaosSurrogate c = fit(set, responses(set, [](double, double) { return 4.25; }), b);
    EXPECT_NEAR(c.coefficients[0], 4.25, 1e-12);
    EXPECT_LT(c.coefficients.tail(9).cwiseAbs().maxCoeff(), 1e-12);

    auto quartic = [](double x, double) { return x * x * x * x; };
    const ChaosSurrogate q = fit(set, responses(set, quartic), b);
    EXPECT_GT(q.residual_norm, 1e-3);
    // oracle: normal equations
    Eigen::MatrixXd v(17, 10);
    Eigen::VectorXd z(17);
    for (int j = 0; j < 17; ++j) {
        v.row(j) = b.terms(set.points[static_cast<std::size_t>(j)]).transpose();
        z[j] = quartic(set.points[static_cast<std::size_t>(j)][0], 0);
    }
    const Eigen::VectorXd ne = (v.transpose() * v).ldlt().solve(v.transpose() * z);
    EXPECT_LT((ne - q.coefficients).cwiseAbs().maxCoeff(), 1e-8);
    // refit with the full 25-point pool
    const CollocationSet big = collocation_points(b, 25);
    const ChaosSurrogate q2 = fit(big, responses(big, quartic), b);
    EXPECT_LT((q2.coefficients - q.coefficients).norm(), std::max(q.residual_norm, q2.residual_norm) * 5);
}

TEST(Fit, RankDeficiencyNamesColumns) {
    const HermiteBasis b = hermite_terms(2, 3);
    CollocationSet set;
    for (int k = 0; k < 12; ++k) set.points.push_back(v2(0.1 * k, 0.0)); // all on one axis
    set.target = 12;
    std::vector<double> z(12, 1.0);
    try {
        fit(set, z, b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IllPosedFit);
        EXPECT_NE(std::string(e.what()).find("xi2"), std::string::npos);
    }
    CollocationSet few;
    few.points.assign(5, v2(0, 0));
    EXPECT_THROW(fit(few, std::vector<double>(5, 1.0), b), Error);
    EXPECT_THROW(fit(set, std::vector<double>(3, 1.0), b), Error);
}

TEST(Surrogate, EvalGradMeanVariance) {
    const HermiteBasis b = hermite_terms(2, 3);
    ChaosSurrogate lin;
    lin.basis = b;
    lin.coefficients = Eigen::VectorXd::Zero(10);
    lin.coefficients[1] = 1.0;
    EXPECT_EQ(lin.eval(v2(0.3, -2)), 0.3);
    EXPECT_EQ(lin.grad(v2(0.3, -2)), v2(1, 0));

    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        ChaosSurrogate s;
        s.basis = b;
        s.coefficients.resize(10);
        for (int k = 0; k < 10; ++k) s.coefficients[k] = n01(rng);
        EXPECT_NEAR(s.eval(v2(0, 0)), s.coefficients[0] - s.coefficients[3] - s.coefficients[4], 1e-14);
        const Eigen::VectorXd x = v2(n01(rng), n01(rng));
        const Eigen::VectorXd g = s.grad(x);
        for (int i = 0; i < 2; ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            const double fd = (s.eval(xp) - s.eval(xm)) / 2e-6;
            EXPECT_LT(std::abs(fd - g[i]), 1e-7 * std::max(1.0, std::abs(g[i])));
        }
    }

    ChaosSurrogate s;
    s.basis = b;
    s.coefficients.resize(10);
    for (int k = 0; k < 10; ++k) s.coefficients[k] = 0.5 * n01(rng);
    double sum = 0, sq = 0, fourth = 0;
    const int draws = 1000000;
    std::vector<double> vals(static_cast<std::size_t>(draws));
    for (int i = 0; i < draws; ++i) {
        const double z = s.eval(v2(n01(rng), n01(rng)));
        vals[static_cast<std::size_t>(i)] = z;
        sum += z;
    }
    const double mean = sum / draws;
    for (double z : vals) {
        sq += (z - mean) * (z - mean);
        fourth += std::pow(z - mean, 4);
    }
    const double var = sq / (draws - 1);
    const double se_mean = std::sqrt(var / draws);
    const double se_var = std::sqrt((fourth / draws - var * var) / draws);
    EXPECT_LT(std::abs(mean - s.mean()), 3.5 * se_mean);
    EXPECT_LT(std::abs(var - s.variance()), 3.5 * se_var);
}
