#include "oracles.hpp"

#include "rbto/error.hpp"
#include "rbto/fea.hpp"
#include "rbto/presets.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace rbto;

namespace {

Vector ones(int n) { return Vector::Ones(n); }

StructuredGrid patch_grid(int nx, int ny, double traction) {
    StructuredGrid g(nx, ny);
    for (int j = 0; j <= ny; ++j) g.fix_dof(g.dof_x(0, j));
    g.fix_dof(g.dof_y(0, 0));
    for (int j = 0; j <= ny; ++j) {
        const double w = (j == 0 || j == ny) ? 0.5 : 1.0;
        g.add_load(g.dof_x(nx, j), traction * w);
    }
    return g;
}

} // namespace

TEST(ElementStiffness, MatchesQuadratureOracle) {
    for (double nu : {0.1, 0.25, 0.3, 0.45}) {
        const ElementMatrix ke = element_stiffness(nu);
        const auto ref = oracle::q4_stiffness(1.0, nu);
        EXPECT_LT((ke - ref).cwiseAbs().maxCoeff(), 1e-14) << "nu = " << nu;
    }
    EXPECT_NEAR(element_stiffness(0.3)(0, 0), (0.5 - 0.3 / 6) / (1 - 0.09), 1e-15);
    EXPECT_NEAR(element_stiffness(0.3)(0, 0), 0.494505494505, 1e-11);
}

TEST(ElementStiffness, RigidBodyModes) {
    const ElementMatrix ke = element_stiffness(0.3);
    EXPECT_LT((ke - ke.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::Matrix<double, 8, 1> tx, ty, rot;
    const double xs[4] = {0, 1, 1, 0};
    const double ys[4] = {0, 0, 1, 1};
    for (int a = 0; a < 4; ++a) {
        tx[2 * a] = 1;
        tx[2 * a + 1] = 0;
        ty[2 * a] = 0;
        ty[2 * a + 1] = 1;
        rot[2 * a] = -ys[a];
        rot[2 * a + 1] = xs[a];
    }
    EXPECT_LT((ke * tx).norm(), 1e-14);
    EXPECT_LT((ke * ty).norm(), 1e-14);
    EXPECT_LT((ke * rot).norm(), 1e-14);
    Eigen::SelfAdjointEigenSolver<ElementMatrix> es(ke);
    int zeros = 0;
    for (int i = 0; i < 8; ++i) {
        EXPECT_GT(es.eigenvalues()[i], -1e-14);
        if (std::abs(es.eigenvalues()[i]) < 1e-12) ++zeros;
    }
    EXPECT_EQ(zeros, 3);
}

TEST(ElementStiffness, RejectsInvalidPoisson) {
    EXPECT_THROW(element_stiffness(0.5), Error);
    EXPECT_THROW(element_stiffness(0.0), Error);
    try {
        element_stiffness(-0.1);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidParameter);
    }
}

TEST(StructuredGrid, Numbering) {
    StructuredGrid g(3, 2);
    EXPECT_EQ(g.element_count(), 6);
    EXPECT_EQ(g.dof_count(), 24);
    EXPECT_EQ(g.node(1, 0), 3);
    EXPECT_EQ(g.element(1, 1), 3);
    const auto d = g.element_dofs(g.element(1, 1));
    // bottom-left node (1,1), bottom-right (2,1), top-right (2,2), top-left (1,2)
    EXPECT_EQ(d[0], g.dof_x(1, 1));
    EXPECT_EQ(d[2], g.dof_x(2, 1));
    EXPECT_EQ(d[4], g.dof_x(2, 2));
    EXPECT_EQ(d[7], g.dof_y(1, 2));
    const auto c = g.centroid(g.element(2, 0));
    EXPECT_DOUBLE_EQ(c[0], 2.5);
    EXPECT_DOUBLE_EQ(c[1], 0.5);
    EXPECT_THROW(g.fix_dof(24), Error);
}

TEST(AssembleSolve, SingleElementMatchesDenseOracle) {
    StructuredGrid g(1, 1);
    g.fix_dof(g.dof_x(0, 0));
    g.fix_dof(g.dof_y(0, 0));
    g.fix_dof(g.dof_x(1, 0));
    g.fix_dof(g.dof_y(1, 0));
    g.add_load(g.dof_y(1, 1), -1.0);
    const FeaSolver fea(g, 0.3);
    const auto sol = fea.solve(ones(1), ones(1), 3.0);

    const auto k = oracle::q4_stiffness(1.0, 0.3);
    const int free_local[4] = {4, 5, 6, 7};
    Eigen::MatrixXd kr(4, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) kr(r, c) = k(free_local[r], free_local[c]);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(4);
    f[1] = -1.0;
    const Eigen::VectorXd ref = oracle::gauss_solve(kr, f);
    const auto dofs = g.element_dofs(0);
    for (int r = 0; r < 4; ++r) EXPECT_NEAR(sol.u[dofs[static_cast<std::size_t>(free_local[r])]], ref[r], 1e-10);
    for (int r = 0; r < 4; ++r) EXPECT_EQ(sol.u[dofs[static_cast<std::size_t>(r)]], 0.0);
}

TEST(AssembleSolve, PatchTestExact) {
    const double nu = 0.3;
    for (auto [nx, ny] : {std::pair{1, 1}, std::pair{3, 2}, std::pair{7, 5}, std::pair{12, 4}}) {
        const StructuredGrid g = patch_grid(nx, ny, 1.0);
        const FeaSolver fea(g, nu);
        const auto sol = fea.solve(ones(g.element_count()), ones(g.element_count()), 3.0);
        for (int i = 0; i <= nx; ++i) {
            for (int j = 0; j <= ny; ++j) {
                EXPECT_NEAR(sol.u[g.dof_x(i, j)], static_cast<double>(i), 1e-10);
                EXPECT_NEAR(sol.u[g.dof_y(i, j)], -nu * j, 1e-10);
            }
        }
    }
}

TEST(AssembleSolve, ModulusScalingAndLoadLinearity) {
    auto bc = make_cantilever(8, 4, 1.0, 1.0);
    const FeaSolver fea(bc.grid, 0.3);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    Vector rho(32), e(32);
    for (int i = 0; i < 32; ++i) {
        rho[i] = u(rng);
        e[i] = 0.5 + u(rng);
    }
    const auto s1 = fea.solve(rho, e, 3.0);
    const auto s2 = fea.solve(rho, 2.0 * e, 3.0);
    EXPECT_LT((s1.u - 2.0 * s2.u).cwiseAbs().maxCoeff(), 1e-12 * s1.u.cwiseAbs().maxCoeff());

    auto scaled = make_cantilever(8, 4, -3.5, 1.0);
    const FeaSolver fea2(scaled.grid, 0.3);
    const auto s3 = fea2.solve(rho, e, 3.0);
    EXPECT_LT((s3.u + 3.5 * s1.u).cwiseAbs().maxCoeff(), 1e-12 * s3.u.cwiseAbs().maxCoeff());
}

TEST(AssembleSolve, FixedDofsZeroAndResidual) {
    auto bc = make_mbb_half(12, 4);
    const FeaSolver fea(bc.grid, 0.3);
    Vector rho = Vector::Constant(48, 0.4);
    const auto sol = fea.solve(rho, ones(48), 3.0);
    for (int d : bc.grid.fixed_dofs()) EXPECT_EQ(displacement_at(sol, d), 0.0);
    // residual through an independent dense assembly
    const int n = bc.grid.dof_count();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    const auto ke = oracle::q4_stiffness(1.0, 0.3);
    for (int e = 0; e < 48; ++e) {
        const auto d = bc.grid.element_dofs(e);
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 8; ++c) k(d[r], d[c]) += std::pow(rho[e], 3.0) * ke(r, c);
    }
    Eigen::VectorXd res = k * sol.u - bc.grid.loads();
    for (int d : bc.grid.fixed_dofs()) res[d] = 0.0;
    EXPECT_LT(res.norm(), 1e-8 * bc.grid.loads().norm());
}

TEST(AssembleSolve, UnitLoadWorkEqualsDisplacement) {
    auto bc = make_cantilever(6, 4, 1.0, 1.0);
    const FeaSolver fea(bc.grid, 0.3);
    const auto sol = fea.solve(ones(24), ones(24), 3.0);
    EXPECT_NEAR(bc.grid.loads().dot(sol.u), -sol.u[bc.output_dof], 1e-12);
}

TEST(AssembleSolve, ElasticitySpecEntryPoint) {
    auto bc = make_cantilever(4, 2, 1.0, 1.0);
    const FeaSolver fea(bc.grid, 0.3);
    ElasticitySpec spec;
    spec.modulus = Vector::Constant(8, 2.0);
    const auto a = assemble_solve(fea, ones(8), spec, 3.0);
    const auto b = fea.solve(ones(8), spec.modulus, 3.0);
    EXPECT_EQ(a.u, b.u);
    spec.modulus[3] = -1.0;
    EXPECT_THROW(assemble_solve(fea, ones(8), spec, 3.0), Error);
    spec.modulus = Vector::Constant(8, 2.0);
    spec.poisson_ratio = 0.25;
    EXPECT_THROW(assemble_solve(fea, ones(8), spec, 3.0), Error);
}

TEST(AssembleSolve, SingularAndNonFiniteInputs) {
    StructuredGrid g(3, 3);
    g.fix_dof(g.dof_y(0, 0));
    g.fix_dof(g.dof_y(3, 0));
    g.add_load(g.dof_y(1, 3), -1.0);
    try {
        FeaSolver fea(g, 0.3);
        FAIL() << "expected a singularity error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::StructuralSingularity);
    }
    auto bc = make_cantilever(4, 2, 1.0, 1.0);
    const FeaSolver fea(bc.grid, 0.3);
    Vector rho = ones(8);
    rho[2] = std::numeric_limits<double>::quiet_NaN();
    try {
        fea.solve(rho, ones(8), 3.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Numeric);
    }
}

TEST(AdjointGradient, MatchesCentralDifferences) {
    auto bc = make_cantilever(8, 4, 1.0, 1.0);
    const FeaSolver fea(bc.grid, 0.3);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::uniform_int_distribution<int> pick(0, bc.grid.dof_count() - 1);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Vector rho(32), e(32);
        for (int i = 0; i < 32; ++i) {
            rho[i] = std::min(0.95, u(rng));
            e[i] = 0.5 + u(rng);
        }
        int dof = pick(rng);
        while (bc.grid.is_fixed(dof)) dof = pick(rng);
        const double penal = trial % 2 ? 3.0 : 1.0;
        const auto sol = fea.solve(rho, e, penal);
        const Vector grad = fea.adjoint_gradient(sol, rho, e, penal, dof);
        ASSERT_EQ(grad.size(), 32);
        const double scale = grad.cwiseAbs().maxCoeff();
        for (int i = 0; i < 32; ++i) {
            const double fd = oracle::fd_displacement(bc.grid, rho, e, penal, 0.3, dof, i);
            worst = std::max(worst, std::abs(fd - grad[i]) / std::max(std::abs(fd), 1e-3 * scale));
        }
    }
    EXPECT_LT(worst, 1e-5);
}

TEST(AdjointGradient, RejectsStaleSolution) {
    auto bc = make_cantilever(4, 2, 1.0, 1.0);
    const FeaSolver fea(bc.grid, 0.3);
    const auto sol = fea.solve(ones(8), ones(8), 3.0);
    Vector other = ones(8);
    other[0] = 0.5;
    try {
        fea.adjoint_gradient(sol, other, ones(8), 3.0, bc.output_dof);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Inconsistent);
    }
}

TEST(AdjointGradient, MirrorSymmetricMeshGivesMirroredGradient) {
    // symmetric cantilever about mid-height: gradient of the tip x-displacement
    // is symmetric under the ey -> ny-1-ey element permutation
    StructuredGrid g(6, 4);
    for (int j = 0; j <= 4; ++j) {
        g.fix_dof(g.dof_x(0, j));
        g.fix_dof(g.dof_y(0, j));
    }
    g.add_load(g.dof_x(6, 2), 1.0);
    const FeaSolver fea(g, 0.3);
    const auto sol = fea.solve(ones(24), ones(24), 3.0);
    const Vector grad = fea.adjoint_gradient(sol, ones(24), ones(24), 3.0, g.dof_x(6, 2));
    for (int ex = 0; ex < 6; ++ex)
        for (int ey = 0; ey < 4; ++ey)
            EXPECT_NEAR(grad[g.element(ex, ey)], grad[g.element(ex, 3 - ey)], 1e-12 * grad.cwiseAbs().maxCoeff());
}

TEST(FeaSolver, CopyIsIndependentAndEqual) {
    auto bc = make_lbeam(8);
    const FeaSolver a(bc.grid, 0.3);
    const FeaSolver b = a;
    const Vector rho = Vector::Constant(64, 0.7);
    EXPECT_EQ(a.solve(rho, ones(64), 3.0).u, b.solve(rho, ones(64), 3.0).u);
    EXPECT_EQ(hash_state(rho, ones(64), 3.0), hash_state(rho, ones(64), 3.0));
    EXPECT_NE(hash_state(rho, ones(64), 3.0), hash_state(rho, ones(64), 2.0));
}
