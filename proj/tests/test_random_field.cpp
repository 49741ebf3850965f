#include "oracles.hpp"

#include "rbto/error.hpp"
#include "rbto/random_field.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace rbto;

TEST(Kl1d, TraceIdentity) {
    for (auto [l, L, n] : {std::tuple{0.6, 3.0, 3}, std::tuple{0.6, 60.0, 60}, std::tuple{5.0, 20.0, 20},
                           std::tuple{0.1, 1.0, 7}}) {
        const auto pairs = kl_1d({l, L, n});
        EXPECT_NEAR(pairs.eigenvalues.sum(), L, 1e-8 * L);
    }
}

TEST(Kl1d, MatchesJacobiOracle) {
    const Covariance1D cov{0.6, 3.0, 3};
    const auto pairs = kl_1d(cov);
    Eigen::MatrixXd a(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = 1.0 * std::exp(-std::abs((i + 0.5) - (j + 0.5)) / 0.6);
    const Eigen::VectorXd ref = oracle::jacobi_eigenvalues(a);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(pairs.eigenvalues[k], ref[k], 1e-10);
    for (int k = 0; k + 1 < 3; ++k) EXPECT_GE(pairs.eigenvalues[k], pairs.eigenvalues[k + 1]);
}

TEST(Kl1d, NormalizationSignAndSymmetry) {
    const Covariance1D cov{0.6, 20.0, 20};
    const auto p = kl_1d(cov);
    for (int k = 0; k < 20; ++k) {
        EXPECT_NEAR(p.functions.col(k).squaredNorm() * p.weight, 1.0, 1e-10);
        // first component of largest magnitude (mirror modes tie) is positive
        const double peak = p.functions.col(k).cwiseAbs().maxCoeff();
        int first = 0;
        while (std::abs(p.functions(first, k)) < peak * (1 - 1e-9)) ++first;
        EXPECT_GT(p.functions(first, k), 0.0);
    }
    const Eigen::VectorXd e1 = p.functions.col(0);
    EXPECT_TRUE((e1.array() > 0.0).all());
    for (int i = 0; i < 20; ++i) EXPECT_NEAR(e1[i], e1[19 - i], 1e-6);
    // discrete orthonormality
    const Eigen::MatrixXd gram = p.functions.transpose() * p.functions * p.weight;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Kl1d, RejectsBadCovariance) {
    EXPECT_THROW(kl_1d({0.0, 1.0, 4}), Error);
    EXPECT_THROW(kl_1d({1.0, -1.0, 4}), Error);
    EXPECT_THROW(kl_1d({1.0, 1.0, 1}), Error);
}

TEST(KlProduct, TopEigenvalueAndFullSpectrumOracle) {
    const auto kx = kl_1d({0.6, 60.0, 60});
    const auto ky = kl_1d({0.6, 20.0, 20});
    const KLBasis b = kl_product(kx, ky, 2);
    EXPECT_EQ(b.eigenvalues[0], kx.eigenvalues[0] * ky.eigenvalues[0]);
    // brute-force enumeration of every product
    std::vector<std::tuple<double, int, int>> all;
    for (int i = 0; i < 60; ++i)
        for (int j = 0; j < 20; ++j) all.emplace_back(kx.eigenvalues[i] * ky.eigenvalues[j], i, j);
    std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) {
        if (std::get<0>(l) != std::get<0>(r)) return std::get<0>(l) > std::get<0>(r);
        return std::pair(std::get<1>(l), std::get<2>(l)) < std::pair(std::get<1>(r), std::get<2>(r));
    });
    for (int k = 0; k < 2; ++k) {
        EXPECT_EQ(b.eigenvalues[k], std::get<0>(all[static_cast<std::size_t>(k)]));
        EXPECT_EQ(b.modes[static_cast<std::size_t>(k)].first, std::get<1>(all[static_cast<std::size_t>(k)]));
        EXPECT_EQ(b.modes[static_cast<std::size_t>(k)].second, std::get<2>(all[static_cast<std::size_t>(k)]));
    }
    EXPECT_NEAR(b.full_trace, 1200.0, 1e-8 * 1200.0);
    const Eigen::MatrixXd gram = b.functions.transpose() * b.functions * b.weight;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(KlProduct, FullSpectrumReconstructsKernel) {
    const int nx = 6, ny = 4;
    const auto kx = kl_1d({1.5, 6.0, nx});
    const auto ky = kl_1d({0.8, 4.0, ny});
    const KLBasis b = kl_product(kx, ky, nx * ny);
    Eigen::MatrixXd c = b.functions * b.eigenvalues.asDiagonal() * b.functions.transpose();
    for (int ex = 0; ex < nx; ++ex)
        for (int ey = 0; ey < ny; ++ey)
            for (int fx = 0; fx < nx; ++fx)
                for (int fy = 0; fy < ny; ++fy) {
                    const double k = std::exp(-std::abs(ex - fx) / 1.5) * std::exp(-std::abs(ey - fy) / 0.8);
                    EXPECT_NEAR(c(ex * ny + ey, fx * ny + fy), k, 1e-6);
                }
    double prev = 0.0;
    for (int m = 1; m <= nx * ny; ++m) {
        const double s = b.eigenvalues.head(m).sum();
        EXPECT_GE(s, prev);
        EXPECT_LE(s, b.full_trace * (1 + 1e-12));
        prev = s;
    }
    EXPECT_THROW(kl_product(kx, ky, 0), Error);
    EXPECT_THROW(kl_product(kx, ky, nx * ny + 1), Error);
}

TEST(MakeKlBasis, RelativeModeScalesCorrelationLength) {
    const KLBasis abs = make_kl_basis(20, 10, 0.6, 0.6, 2, CorrLengthMode::Absolute);
    const KLBasis rel = make_kl_basis(20, 10, 0.03, 0.06, 2, CorrLengthMode::Relative);
    EXPECT_LT((abs.eigenvalues - rel.eigenvalues).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(corr_length_mode_from_string("relative"), CorrLengthMode::Relative);
    EXPECT_THROW(corr_length_mode_from_string("metric"), Error);
}

TEST(SampleField, ZeroLinearityAndVariance) {
    KLBasis b = make_kl_basis(12, 6, 3.0, 2.0, 4);
    EXPECT_TRUE((sample_field(b, Eigen::VectorXd::Zero(4)).array() == 0.0).all());
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    Eigen::VectorXd x1(4), x2(4);
    for (int i = 0; i < 4; ++i) {
        x1[i] = n01(rng);
        x2[i] = n01(rng);
    }
    EXPECT_LT((sample_field(b, x1 + x2) - sample_field(b, x1) - sample_field(b, x2)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_THROW(sample_field(b, Eigen::VectorXd::Zero(3)), Error);

    const int draws = 100000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(72), sq = Eigen::VectorXd::Zero(72), quad = Eigen::VectorXd::Zero(72);
    Eigen::VectorXd xi(4);
    for (int s = 0; s < draws; ++s) {
        for (int i = 0; i < 4; ++i) xi[i] = n01(rng);
        const Eigen::VectorXd y = sample_field(b, xi);
        sum += y;
        sq += y.cwiseAbs2();
        quad += y.array().pow(4).matrix();
    }
    const Eigen::VectorXd target = b.pointwise_variance();
    for (int e = 0; e < 72; ++e) {
        const double var = sq[e] / draws;
        const double se = std::sqrt((quad[e] / draws - var * var) / draws);
        EXPECT_LT(std::abs(var - target[e]), 3.5 * se + 1e-12) << "element " << e;
    }

    b.rescale_pointwise_variance = true;
    const Eigen::VectorXd y = sample_field(b, x1);
    const Eigen::VectorXd y0 = sample_field(make_kl_basis(12, 6, 3.0, 2.0, 4), x1);
    EXPECT_LT((y.cwiseProduct(target.cwiseSqrt()) - y0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FieldToModulus, MarginalTransform) {
    const ModulusMarginal m{1.0, 1.5};
    Eigen::VectorXd y(5);
    y << 0.0, 1.0, -1.0, 8.0, -40.0;
    const Eigen::VectorXd e = field_to_modulus(y, m);
    EXPECT_EQ(e[0], m.mean());
    EXPECT_EQ(e[0], 1.25);
    EXPECT_NEAR(e[1], 1.4207, 5e-5);
    EXPECT_NEAR(e[1], 1.0 + 0.5 * oracle::normal_cdf(1.0), 1e-12);
    EXPECT_NEAR(e[2], 1.0 + 0.5 * oracle::normal_cdf(-1.0), 1e-12);
    EXPECT_GT(e[3], e[1]);
    EXPECT_LE(e[3], m.b);
    EXPECT_GE(e[4], m.a);
    EXPECT_THROW(field_to_modulus(y, ModulusMarginal{1.0, 1.0}), Error);
    EXPECT_THROW(field_to_modulus(y, ModulusMarginal{0.0, 1.0}), Error);
}

TEST(FieldToModulus, StrictlyMonotone) {
    const ModulusMarginal m{1.0, 1.7};
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(401, -6.0, 6.0);
    const Eigen::VectorXd e = field_to_modulus(y, m);
    for (int i = 1; i < 401; ++i) EXPECT_GT(e[i], e[i - 1]);
    EXPECT_GT(e.minCoeff(), m.a);
    EXPECT_LT(e.maxCoeff(), m.b);
}

TEST(NormalCdf, AgreesWithOracleAndQuantileInverts) {
    for (double x = -8.0; x <= 8.0; x += 0.125) EXPECT_NEAR(normal_cdf(x), oracle::normal_cdf(x), 1e-15);
    for (double p : {1e-10, 1e-4, 0.02275, 0.3, 0.5, 0.9, 1 - 1e-9}) EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-12 * std::max(p, 1e-3));
    EXPECT_NEAR(normal_cdf(-2.0), 0.02275, 5e-6);
    EXPECT_NEAR(normal_cdf(-2.5), 0.00620, 1e-5);
    EXPECT_NEAR(normal_cdf(-3.0), 0.001349, 1e-6);
    EXPECT_THROW(normal_quantile(0.0), Error);
}
