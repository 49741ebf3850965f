#include "rbto/fea.hpp"

#include "rbto/error.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace rbto {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
// The reduced DOFs are renumbered once with AMD, so every numeric factorization
// runs on an already fill-reducing order.
using Ldlt = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>>;

namespace detail {
struct Factorization {
    Ldlt ldlt;
};
} // namespace detail

// ---------------------------------------------------------------------------
// StructuredGrid

StructuredGrid::StructuredGrid(int nx, int ny) : nx_(nx), ny_(ny) {
    RBTO_REQUIRE(nx >= 1 && ny >= 1, ErrorCode::InvalidParameter,
                 "grid needs at least one element per direction");
    loads_ = Vector::Zero(dof_count());
    active_.assign(static_cast<std::size_t>(element_count()), true);
    active_ids_.resize(static_cast<std::size_t>(element_count()));
    for (int e = 0; e < element_count(); ++e) active_ids_[static_cast<std::size_t>(e)] = e;
}

int StructuredGrid::node(int i, int j) const {
    RBTO_REQUIRE(i >= 0 && i <= nx_ && j >= 0 && j <= ny_, ErrorCode::InvalidParameter,
                 "node index out of range");
    return i * (ny_ + 1) + j;
}

int StructuredGrid::element(int ex, int ey) const {
    RBTO_REQUIRE(ex >= 0 && ex < nx_ && ey >= 0 && ey < ny_, ErrorCode::InvalidParameter,
                 "element index out of range");
    return ex * ny_ + ey;
}

std::array<int, 8> StructuredGrid::element_dofs(int e) const {
    const int ex = e / ny_;
    const int ey = e % ny_;
    const int bl = ex * (ny_ + 1) + ey;
    const int br = bl + ny_ + 1;
    const int tr = br + 1;
    const int tl = bl + 1;
    return {2 * bl, 2 * bl + 1, 2 * br, 2 * br + 1, 2 * tr, 2 * tr + 1, 2 * tl, 2 * tl + 1};
}

std::array<double, 2> StructuredGrid::centroid(int e) const {
    return {static_cast<double>(e / ny_) + 0.5, static_cast<double>(e % ny_) + 0.5};
}

void StructuredGrid::fix_dof(int dof) {
    RBTO_REQUIRE(dof >= 0 && dof < dof_count(), ErrorCode::InvalidParameter,
                 "fixed DOF " + std::to_string(dof) + " out of range");
    auto it = std::lower_bound(fixed_.begin(), fixed_.end(), dof);
    if (it == fixed_.end() || *it != dof) fixed_.insert(it, dof);
}

void StructuredGrid::add_load(int dof, double value) {
    RBTO_REQUIRE(dof >= 0 && dof < dof_count(), ErrorCode::InvalidParameter,
                 "load DOF " + std::to_string(dof) + " out of range");
    RBTO_REQUIRE(std::isfinite(value), ErrorCode::Numeric, "non-finite load");
    loads_[dof] += value;
}

void StructuredGrid::set_passive(int e) {
    RBTO_REQUIRE(e >= 0 && e < element_count(), ErrorCode::InvalidParameter,
                 "element index out of range");
    if (!active_[static_cast<std::size_t>(e)]) return;
    active_[static_cast<std::size_t>(e)] = false;
    active_ids_.erase(std::find(active_ids_.begin(), active_ids_.end(), e));
}

bool StructuredGrid::is_fixed(int dof) const {
    return std::binary_search(fixed_.begin(), fixed_.end(), dof);
}

void ElasticitySpec::validate(int element_count) const {
    RBTO_REQUIRE(poisson_ratio > 0.0 && poisson_ratio < 0.5, ErrorCode::InvalidParameter,
                 "Poisson ratio must lie in (0, 0.5)");
    RBTO_REQUIRE(modulus.size() == element_count, ErrorCode::SizeMismatch,
                 "modulus vector length differs from element count");
    RBTO_REQUIRE((modulus.array() > 0.0).all() && modulus.allFinite(), ErrorCode::InvalidParameter,
                 "every element modulus must be finite and positive");
}

// ---------------------------------------------------------------------------
// Element

ElementMatrix element_stiffness(double nu) {
    RBTO_REQUIRE(nu > 0.0 && nu < 0.5, ErrorCode::InvalidParameter,
                 "Poisson ratio must lie in (0, 0.5)");
    const std::array<double, 8> k = {
        0.5 - nu / 6.0,         0.125 + nu / 8.0,  -0.25 - nu / 12.0, -0.125 + 3.0 * nu / 8.0,
        -0.25 + nu / 12.0,      -0.125 - nu / 8.0, nu / 6.0,          0.125 - 3.0 * nu / 8.0,
    };
    // clang-format off
    const int idx[8][8] = {
        {0, 1, 2, 3, 4, 5, 6, 7},
        {1, 0, 7, 6, 5, 4, 3, 2},
        {2, 7, 0, 5, 6, 3, 4, 1},
        {3, 6, 5, 0, 7, 2, 1, 4},
        {4, 5, 6, 7, 0, 1, 2, 3},
        {5, 4, 3, 2, 1, 0, 7, 6},
        {6, 3, 4, 1, 2, 7, 0, 5},
        {7, 2, 1, 4, 3, 6, 5, 0},
    };
    // clang-format on
    ElementMatrix ke;
    const double scale = 1.0 / (1.0 - nu * nu);
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) ke(r, c) = scale * k[static_cast<std::size_t>(idx[r][c])];
    return ke;
}

// ---------------------------------------------------------------------------
// FeaSolver

struct FeaSolver::Impl {
    std::vector<int> reduced;    // full DOF -> reduced index, -1 when fixed
    std::vector<int> free_dofs;  // reduced index -> full DOF
    std::vector<int> scatter;    // element*64 + r*8 + c -> value slot in K, -1 if skipped
    SparseMatrix pattern;        // lower triangle
    Vector reduced_loads;
};

FeaSolver::FeaSolver(StructuredGrid grid, double poisson_ratio)
    : grid_(std::move(grid)), poisson_(poisson_ratio), ke_(element_stiffness(poisson_ratio)),
      impl_(std::make_unique<Impl>()) {
    const auto& fixed = grid_.fixed_dofs();
    bool has_x = false;
    bool has_y = false;
    for (int d : fixed) (d % 2 == 0 ? has_x : has_y) = true;
    RBTO_REQUIRE(fixed.size() >= 3 && has_x && has_y, ErrorCode::StructuralSingularity,
                 "boundary conditions do not remove all rigid-body modes");

    const int ndof = grid_.dof_count();
    const int nel = grid_.element_count();

    std::vector<int> natural(static_cast<std::size_t>(ndof), -1);
    std::vector<int> natural_free;
    for (int d = 0; d < ndof; ++d) {
        if (!grid_.is_fixed(d)) {
            natural[static_cast<std::size_t>(d)] = static_cast<int>(natural_free.size());
            natural_free.push_back(d);
        }
    }
    const int nfree = static_cast<int>(natural_free.size());

    auto lower_pattern = [&](const std::vector<int>& map) {
        std::vector<Eigen::Triplet<double, int>> trips;
        trips.reserve(static_cast<std::size_t>(nel) * 36);
        for (int e = 0; e < nel; ++e) {
            const auto dofs = grid_.element_dofs(e);
            for (int r = 0; r < 8; ++r) {
                const int rr = map[static_cast<std::size_t>(dofs[static_cast<std::size_t>(r)])];
                for (int c = 0; c < 8; ++c) {
                    const int rc = map[static_cast<std::size_t>(dofs[static_cast<std::size_t>(c)])];
                    if (rr >= 0 && rc >= 0 && rr >= rc) trips.emplace_back(rr, rc, 1.0);
                }
            }
        }
        SparseMatrix pat(nfree, nfree);
        pat.setFromTriplets(trips.begin(), trips.end());
        pat.makeCompressed();
        return pat;
    };

    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> order;
    {
        const SparseMatrix lower = lower_pattern(natural);
        const SparseMatrix full = lower.selfadjointView<Eigen::Lower>();
        Eigen::AMDOrdering<int>()(full, order);
    }
    impl_->reduced.assign(static_cast<std::size_t>(ndof), -1);
    impl_->free_dofs.resize(static_cast<std::size_t>(nfree));
    for (int k = 0; k < nfree; ++k) {
        const int d = natural_free[static_cast<std::size_t>(order.indices()[k])];
        impl_->free_dofs[static_cast<std::size_t>(k)] = d;
        impl_->reduced[static_cast<std::size_t>(d)] = k;
    }
    impl_->reduced_loads.resize(nfree);
    for (int r = 0; r < nfree; ++r)
        impl_->reduced_loads[r] = grid_.loads()[impl_->free_dofs[static_cast<std::size_t>(r)]];

    impl_->pattern = lower_pattern(impl_->reduced);
    impl_->scatter.assign(static_cast<std::size_t>(nel) * 64, -1);
    const int* outer = impl_->pattern.outerIndexPtr();
    const int* inner = impl_->pattern.innerIndexPtr();
    for (int e = 0; e < nel; ++e) {
        const auto dofs = grid_.element_dofs(e);
        for (int r = 0; r < 8; ++r) {
            const int rr = impl_->reduced[static_cast<std::size_t>(dofs[static_cast<std::size_t>(r)])];
            for (int c = 0; c < 8; ++c) {
                const int rc = impl_->reduced[static_cast<std::size_t>(dofs[static_cast<std::size_t>(c)])];
                if (rr < 0 || rc < 0 || rr < rc) continue;
                const int* begin = inner + outer[rc];
                const int* end = inner + outer[rc + 1];
                const int* pos = std::lower_bound(begin, end, rr);
                impl_->scatter[static_cast<std::size_t>(e * 64 + r * 8 + c)] =
                    static_cast<int>(pos - inner);
            }
        }
    }
}

FeaSolver::~FeaSolver() = default;
FeaSolver::FeaSolver(FeaSolver&&) noexcept = default;
FeaSolver::FeaSolver(const FeaSolver& other)
    : grid_(other.grid_), poisson_(other.poisson_), ke_(other.ke_),
      impl_(std::make_unique<Impl>(*other.impl_)) {}

std::uint64_t hash_state(const Vector& density, const Vector& modulus, double penal) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    mix(density.data(), static_cast<std::size_t>(density.size()) * sizeof(double));
    mix(modulus.data(), static_cast<std::size_t>(modulus.size()) * sizeof(double));
    mix(&penal, sizeof(double));
    return h;
}

namespace {

void check_inputs(const StructuredGrid& grid, const Vector& density, const Vector& modulus,
                  double penal) {
    const int nel = grid.element_count();
    RBTO_REQUIRE(density.size() == nel && modulus.size() == nel, ErrorCode::SizeMismatch,
                 "density/modulus length differs from element count");
    RBTO_REQUIRE(density.allFinite() && modulus.allFinite() && std::isfinite(penal),
                 ErrorCode::Numeric, "non-finite density, modulus, or penalty");
    RBTO_REQUIRE((density.array() > 0.0).all() && (density.array() <= 1.0).all(),
                 ErrorCode::InvalidParameter, "densities must lie in (0, 1]");
    RBTO_REQUIRE((modulus.array() > 0.0).all(), ErrorCode::InvalidParameter,
                 "element modulus must be positive");
    RBTO_REQUIRE(penal >= 1.0, ErrorCode::InvalidParameter, "penalty exponent must be >= 1");
}

} // namespace

DisplacementSolution FeaSolver::solve(const Vector& density, const Vector& modulus,
                                      double penal) const {
    check_inputs(grid_, density, modulus, penal);

    SparseMatrix k = impl_->pattern;
    double* values = k.valuePtr();
    std::fill(values, values + k.nonZeros(), 0.0);
    const int nel = grid_.element_count();
    const double* ke = ke_.data(); // column-major, symmetric
    for (int e = 0; e < nel; ++e) {
        const double s = std::pow(density[e], penal) * modulus[e];
        const int* slot = impl_->scatter.data() + static_cast<std::ptrdiff_t>(e) * 64;
        for (int rc = 0; rc < 64; ++rc)
            if (slot[rc] >= 0) values[slot[rc]] += s * ke[rc];
    }

    auto fact = std::make_shared<detail::Factorization>();
    fact->ldlt.compute(k);
    RBTO_REQUIRE(fact->ldlt.info() == Eigen::Success, ErrorCode::StructuralSingularity,
                 "stiffness factorization failed");
    const Vector& d = fact->ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    RBTO_REQUIRE(d.minCoeff() > 1e-15 * dmax, ErrorCode::StructuralSingularity,
                 "stiffness matrix is singular or indefinite");

    const Vector ur = fact->ldlt.solve(impl_->reduced_loads);
    RBTO_REQUIRE(ur.allFinite(), ErrorCode::Numeric, "non-finite displacement");
    const Vector residual = k.selfadjointView<Eigen::Lower>() * ur - impl_->reduced_loads;
    RBTO_REQUIRE(residual.norm() <= 1e-8 * impl_->reduced_loads.norm() + 1e-300,
                 ErrorCode::Numeric, "linear solve residual above tolerance");

    DisplacementSolution sol;
    sol.u = Vector::Zero(grid_.dof_count());
    for (std::size_t r = 0; r < impl_->free_dofs.size(); ++r)
        sol.u[impl_->free_dofs[r]] = ur[static_cast<Eigen::Index>(r)];
    sol.factorization = std::move(fact);
    sol.state_tag = hash_state(density, modulus, penal);
    return sol;
}

Vector FeaSolver::adjoint_gradient(const DisplacementSolution& sol, const Vector& density,
                                   const Vector& modulus, double penal, int dof) const {
    RBTO_REQUIRE(dof >= 0 && dof < grid_.dof_count(), ErrorCode::InvalidParameter,
                 "DOF index out of range");
    RBTO_REQUIRE(sol.factorization && sol.u.size() == grid_.dof_count(), ErrorCode::Inconsistent,
                 "solution does not belong to this model");
    RBTO_REQUIRE(sol.state_tag == hash_state(density, modulus, penal), ErrorCode::Inconsistent,
                 "solution was computed for a different density/modulus state");

    const auto& active = grid_.active_elements();
    Vector grad = Vector::Zero(static_cast<Eigen::Index>(active.size()));
    const int rdof = impl_->reduced[static_cast<std::size_t>(dof)];
    if (rdof < 0) return grad;

    Vector unit = Vector::Zero(static_cast<Eigen::Index>(impl_->free_dofs.size()));
    unit[rdof] = 1.0;
    const Vector lr = sol.factorization->ldlt.solve(unit);
    Vector lambda = Vector::Zero(grid_.dof_count());
    for (std::size_t r = 0; r < impl_->free_dofs.size(); ++r)
        lambda[impl_->free_dofs[r]] = lr[static_cast<Eigen::Index>(r)];

    Eigen::Matrix<double, 8, 1> ue;
    Eigen::Matrix<double, 8, 1> le;
    for (std::size_t a = 0; a < active.size(); ++a) {
        const int e = active[a];
        const auto dofs = grid_.element_dofs(e);
        for (int i = 0; i < 8; ++i) {
            ue[i] = sol.u[dofs[static_cast<std::size_t>(i)]];
            le[i] = lambda[dofs[static_cast<std::size_t>(i)]];
        }
        const double ds = penal * std::pow(density[e], penal - 1.0) * modulus[e];
        grad[static_cast<Eigen::Index>(a)] = -ds * le.dot(ke_ * ue);
    }
    return grad;
}

DisplacementSolution assemble_solve(const FeaSolver& solver, const Vector& density,
                                    const ElasticitySpec& spec, double penal) {
    spec.validate(solver.grid().element_count());
    RBTO_REQUIRE(spec.poisson_ratio == solver.poisson_ratio(), ErrorCode::Inconsistent,
                 "Poisson ratio differs from the one the solver was built with");
    return solver.solve(density, spec.modulus, penal);
}

double displacement_at(const DisplacementSolution& sol, int dof) {
    RBTO_REQUIRE(dof >= 0 && dof < sol.u.size(), ErrorCode::InvalidParameter,
                 "DOF index out of range");
    return sol.u[dof];
}

} // namespace rbto
