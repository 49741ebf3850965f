#include "rbto/filter.hpp"

#include "rbto/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rbto {

FilterKernel::FilterKernel(const StructuredGrid& grid, double rmin, PassiveNeighbors passive,
                           double passive_density)
    : rmin_(rmin) {
    RBTO_REQUIRE(rmin > 0.0 && std::isfinite(rmin), ErrorCode::InvalidParameter,
                 "filter radius must be positive");
    const auto& active = grid.active_elements();
    const int na = static_cast<int>(active.size());
    std::vector<int> slot(static_cast<std::size_t>(grid.element_count()), -1);
    for (int a = 0; a < na; ++a) slot[static_cast<std::size_t>(active[static_cast<std::size_t>(a)])] = a;

    const int reach = static_cast<int>(std::ceil(rmin)) - 1;
    std::vector<Eigen::Triplet<double>> trips;
    offset_ = Vector::Zero(na);
    for (int a = 0; a < na; ++a) {
        const int e = active[static_cast<std::size_t>(a)];
        const int ex = e / grid.ny();
        const int ey = e % grid.ny();
        double row_sum = 0.0;
        double passive_sum = 0.0;
        const std::size_t first = trips.size();
        for (int i = std::max(ex - reach, 0); i <= std::min(ex + reach, grid.nx() - 1); ++i) {
            for (int j = std::max(ey - reach, 0); j <= std::min(ey + reach, grid.ny() - 1); ++j) {
                const int b = slot[static_cast<std::size_t>(grid.element(i, j))];
                const double w = rmin - std::hypot(i - ex, j - ey);
                if (w <= 0.0) continue;
                if (b < 0) {
                    if (passive == PassiveNeighbors::Include) {
                        passive_sum += w;
                        row_sum += w;
                    }
                    continue;
                }
                trips.emplace_back(a, b, w);
                row_sum += w;
            }
        }
        for (std::size_t t = first; t < trips.size(); ++t)
            trips[t] = Eigen::Triplet<double>(trips[t].row(), trips[t].col(), trips[t].value() / row_sum);
        offset_[a] = passive_density * passive_sum / row_sum;
    }
    weights_.resize(na, na);
    weights_.setFromTriplets(trips.begin(), trips.end());
    weights_.makeCompressed();
}

Vector FilterKernel::apply(const Vector& design) const {
    RBTO_REQUIRE(design.size() == weights_.cols(), ErrorCode::SizeMismatch,
                 "design vector length differs from filter size");
    return weights_ * design + offset_;
}

Vector FilterKernel::chain_gradient(const Vector& dphysical) const {
    RBTO_REQUIRE(dphysical.size() == weights_.rows(), ErrorCode::SizeMismatch,
                 "gradient length differs from filter size");
    return weights_.transpose() * dphysical;
}

double DensityField::volume_fraction(const StructuredGrid& grid) const {
    double sum = 0.0;
    for (int e : grid.active_elements()) sum += physical[e];
    return sum / static_cast<double>(grid.active_count());
}

DensityField make_density_field(const StructuredGrid& grid, const FilterKernel& kernel,
                                const Vector& design, double rho_min) {
    RBTO_REQUIRE(rho_min > 0.0 && rho_min < 1.0, ErrorCode::InvalidParameter,
                 "rho_min must lie in (0, 1)");
    RBTO_REQUIRE((design.array() >= rho_min).all() && (design.array() <= 1.0).all(),
                 ErrorCode::InvalidParameter, "design densities outside [rho_min, 1]");
    DensityField field;
    field.design = design;
    field.rho_min = rho_min;
    field.physical = Vector::Constant(grid.element_count(), rho_min);
    const Vector filtered = kernel.apply(design);
    const auto& active = grid.active_elements();
    for (std::size_t a = 0; a < active.size(); ++a)
        field.physical[active[a]] = std::clamp(filtered[static_cast<Eigen::Index>(a)], rho_min, 1.0);
    return field;
}

} // namespace rbto
