#include "rbto/chaos.hpp"
#include "rbto/fea.hpp"
#include "rbto/filter.hpp"
#include "rbto/mma.hpp"
#include "rbto/presets.hpp"
#include "rbto/random_field.hpp"
#include "rbto/reliability.hpp"
#include "rbto/topopt.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace rbto;

namespace {

Vector random_vector(int n, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

} // namespace

static void BM_FeaSolveMbb(benchmark::State& state) {
    const auto bc = make_mbb_half(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)) / 3);
    const FeaSolver fea(bc.grid, 0.3);
    const int n = bc.grid.element_count();
    const Vector rho = random_vector(n, 0.1, 1.0, 1);
    const Vector e = random_vector(n, 1.0, 1.1, 2);
    for (auto _ : state) benchmark::DoNotOptimize(fea.solve(rho, e, 3.0).u[bc.output_dof]);
}
BENCHMARK(BM_FeaSolveMbb)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);

static void BM_AdjointSensitivity(benchmark::State& state) {
    const auto bc = make_mbb_half();
    const FeaSolver fea(bc.grid, 0.3);
    const FilterKernel filter(bc.grid, 1.5);
    const DensityField d = make_density_field(bc.grid, filter, random_vector(bc.grid.active_count(), 0.1, 1.0, 3), 1e-3);
    const Vector e = Vector::Constant(bc.grid.element_count(), 1.05);
    for (auto _ : state) benchmark::DoNotOptimize(displacement_sensitivity(fea, filter, d, e, 3.0, bc.output_dof).gradient);
}
BENCHMARK(BM_AdjointSensitivity)->Unit(benchmark::kMillisecond);

static void BM_KlBasis(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(make_kl_basis(n, n, 0.6, 0.6, 2).eigenvalues);
}
BENCHMARK(BM_KlBasis)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);

static void BM_MmaStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Vector x = random_vector(n, 0.2, 0.8, 4);
    const Vector df0 = Vector::Constant(n, 1.0 / n);
    Eigen::MatrixXd dg = random_vector(n, -1.0, 0.0, 5).transpose();
    Vector g(1);
    g << 0.3;
    for (auto _ : state) {
        MmaState mma(n, 1);
        benchmark::DoNotOptimize(mma.step(x, x.sum() / n, df0, g, dg, Vector::Constant(n, 1e-3), Vector::Ones(n)));
    }
}
BENCHMARK(BM_MmaStep)->Arg(1200)->Arg(2700)->Unit(benchmark::kMicrosecond);

static void BM_ChaosFit(benchmark::State& state) {
    const HermiteBasis basis = hermite_terms(2, 3);
    const CollocationSet points = collocation_points(basis, 17);
    std::vector<double> z;
    for (const auto& p : points.points) z.push_back(170.0 + p[0] - 0.3 * p[1] + 0.05 * p[0] * p[1]);
    for (auto _ : state) benchmark::DoNotOptimize(fit(points, z, basis).coefficients);
}
BENCHMARK(BM_ChaosFit)->Unit(benchmark::kMicrosecond);

static void BM_HmvSearch(benchmark::State& state) {
    ChaosSurrogate s;
    s.basis = hermite_terms(2, 3);
    s.coefficients = random_vector(10, -0.5, 0.5, 6);
    s.coefficients[0] = 10.0;
    const LimitState ls{s, 12.0};
    HmvSettings set;
    set.sweep_points = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(hmv_search(ls, 3.0, Eigen::VectorXd::Zero(2), set).g);
}
BENCHMARK(BM_HmvSearch)->Arg(0)->Arg(3600)->Unit(benchmark::kMicrosecond);

static void BM_DtoMbb(benchmark::State& state) {
    const auto bc = make_mbb_half();
    DtoProblem p;
    p.fea = std::make_shared<const FeaSolver>(bc.grid, 0.3);
    p.filter = std::make_shared<const FilterKernel>(bc.grid, 1.5);
    p.constraints.push_back({bc.output_dof, bc.allowable, Vector::Constant(bc.grid.element_count(), 1.05)});
    for (auto _ : state)
        benchmark::DoNotOptimize(run_dto(p, Vector::Constant(bc.grid.active_count(), 0.5)).iterations);
}
BENCHMARK(BM_DtoMbb)->Iterations(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
