#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace rbto {

using Vector = Eigen::VectorXd;
using ElementMatrix = Eigen::Matrix<double, 8, 8>;

/// Rectangular mesh of unit-square Q4 elements, unit thickness.
///
/// Node (i, j) sits at x = i, y = j with y pointing up. Nodes and elements
/// are numbered column-major: node = i * (ny + 1) + j, element = ex * ny + ey.
/// Each node carries two DOFs, 2 * node (x) and 2 * node + 1 (y).
class StructuredGrid {
public:
    StructuredGrid(int nx, int ny);

    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    int element_count() const noexcept { return nx_ * ny_; }
    int node_count() const noexcept { return (nx_ + 1) * (ny_ + 1); }
    int dof_count() const noexcept { return 2 * node_count(); }

    int node(int i, int j) const;
    int dof_x(int i, int j) const { return 2 * node(i, j); }
    int dof_y(int i, int j) const { return 2 * node(i, j) + 1; }
    int element(int ex, int ey) const;

    /// DOFs of element e, nodes ordered counter-clockwise from bottom-left.
    std::array<int, 8> element_dofs(int e) const;
    std::array<double, 2> centroid(int e) const;

    void fix_dof(int dof);
    void add_load(int dof, double value);
    void set_passive(int e);

    const std::vector<int>& fixed_dofs() const noexcept { return fixed_; }
    const Vector& loads() const noexcept { return loads_; }
    bool is_active(int e) const { return active_.at(static_cast<std::size_t>(e)); }
    const std::vector<int>& active_elements() const noexcept { return active_ids_; }
    int active_count() const noexcept { return static_cast<int>(active_ids_.size()); }
    bool is_fixed(int dof) const;

private:
    int nx_;
    int ny_;
    std::vector<int> fixed_;
    Vector loads_;
    std::vector<bool> active_;
    std::vector<int> active_ids_;
};

struct ElasticitySpec {
    double poisson_ratio = 0.3;
    Vector modulus; // per element, dimensionless

    void validate(int element_count) const;
};

namespace detail {
struct Factorization;
}

struct DisplacementSolution {
    Vector u; // full DOF vector, fixed DOFs exactly zero
    std::shared_ptr<const detail::Factorization> factorization;
    std::uint64_t state_tag = 0;
};

/// Exact stiffness of the unit-square bilinear plane-stress element for E = 1.
ElementMatrix element_stiffness(double poisson_ratio);

/// Reusable FE model: reduced sparsity pattern and symbolic factorization are
/// computed once per grid, numeric factorization once per solve.
///
/// Const member functions are safe to call concurrently.
class FeaSolver {
public:
    FeaSolver(StructuredGrid grid, double poisson_ratio);
    ~FeaSolver();
    FeaSolver(const FeaSolver&);
    FeaSolver(FeaSolver&&) noexcept;

    const StructuredGrid& grid() const noexcept { return grid_; }
    double poisson_ratio() const noexcept { return poisson_; }
    const ElementMatrix& element_matrix() const noexcept { return ke_; }

    /// Solves K(rho, E) u = f with element modulus rho_e^penal * E_e.
    DisplacementSolution solve(const Vector& density, const Vector& modulus, double penal) const;

    /// d(u_dof)/d(rho_e) for every active element, in active-element order.
    Vector adjoint_gradient(const DisplacementSolution& sol, const Vector& density,
                            const Vector& modulus, double penal, int dof) const;

private:
    struct Impl;
    StructuredGrid grid_;
    double poisson_;
    ElementMatrix ke_;
    std::unique_ptr<Impl> impl_;
};

DisplacementSolution assemble_solve(const FeaSolver& solver, const Vector& density,
                                    const ElasticitySpec& spec, double penal);

double displacement_at(const DisplacementSolution& sol, int dof);

std::uint64_t hash_state(const Vector& density, const Vector& modulus, double penal);

} // namespace rbto
