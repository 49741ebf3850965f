#pragma once

#include "rbto/fea.hpp"

#include <Eigen/SparseCore>

namespace rbto {

/// Density filter over the active elements of a grid with linearly decaying
/// weights w = max(0, rmin - dist), normalized per row.
///
/// With PassiveNeighbors::Include, passive elements inside the radius enter the
/// weighted average with their fixed density, which becomes a constant offset.
class FilterKernel {
public:
    enum class PassiveNeighbors { Exclude, Include };

    FilterKernel(const StructuredGrid& grid, double rmin,
                 PassiveNeighbors passive = PassiveNeighbors::Include, double passive_density = 1e-3);

    double rmin() const noexcept { return rmin_; }
    int size() const noexcept { return static_cast<int>(weights_.rows()); }
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& weights() const noexcept { return weights_; }

    /// Physical densities rho = W * design + offset (both in active-element order).
    Vector apply(const Vector& design) const;
    /// W^T * d, mapping a gradient w.r.t. physical densities to design variables.
    Vector chain_gradient(const Vector& dphysical) const;

private:
    double rmin_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> weights_;
    Vector offset_; // passive contribution per active row
};

/// Design variables (active elements) plus the filtered density of every
/// element; passive elements hold rho_min.
struct DensityField {
    Vector design;
    Vector physical;
    double rho_min = 1e-3;

    /// Sum of physical densities over active elements divided by their count.
    double volume_fraction(const StructuredGrid& grid) const;
};

DensityField make_density_field(const StructuredGrid& grid, const FilterKernel& kernel,
                                const Vector& design, double rho_min);

} // namespace rbto
