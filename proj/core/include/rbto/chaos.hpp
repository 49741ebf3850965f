#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace rbto {

/// Probabilists' Hermite polynomial He_k(x) and its derivative.
double hermite(int k, double x);
double hermite_derivative(int k, double x);

/// Multidimensional Hermite basis of total degree <= p in n variables.
///
/// Terms are grouped by degree. Within a degree, single-variable powers come
/// first (by variable), then mixed terms in ascending lexicographic order of
/// their exponent tuples. For n = 2, p = 3 this gives
/// 1, a1, a2, a1^2-1, a2^2-1, a1 a2, a1^3-3a1, a2^3-3a2, a1 a2^2-a1, a1^2 a2-a2.
struct HermiteBasis {
    int variables = 0;
    int degree = 0;
    std::vector<std::vector<int>> exponents;

    int size() const { return static_cast<int>(exponents.size()); }
    double term(int k, const Eigen::VectorXd& xi) const;
    Eigen::VectorXd terms(const Eigen::VectorXd& xi) const;
    Eigen::VectorXd term_gradient(int k, const Eigen::VectorXd& xi) const;
    /// E[term_k^2] under independent standard normals, i.e. prod of exponent factorials.
    double norm_squared(int k) const;
    std::string label(int k) const;
};

HermiteBasis hermite_terms(int variables, int degree);

struct CollocationSet {
    std::vector<Eigen::VectorXd> points;
    int target = 0;

    int size() const { return static_cast<int>(points.size()); }
};

/// Roots of He_{p+1} plus the origin, tensorized, ranked by standard-normal
/// density (ties: lexicographic coordinates), top `count` kept.
CollocationSet collocation_points(const HermiteBasis& basis, int count);

/// Sorted roots of He_k.
Eigen::VectorXd hermite_roots(int k);

struct ChaosSurrogate {
    HermiteBasis basis;
    Eigen::VectorXd coefficients;
    double residual_norm = 0.0;
    int dof = -1;
    std::uint64_t design_hash = 0;

    double eval(const Eigen::VectorXd& xi) const;
    Eigen::VectorXd grad(const Eigen::VectorXd& xi) const;
    double mean() const;
    double variance() const;
};

/// Least-squares fit of V a = z with V_jk = term_k(point_j).
ChaosSurrogate fit(const CollocationSet& points, const std::vector<double>& responses,
                   const HermiteBasis& basis);

} // namespace rbto
