#pragma once

#include <Eigen/Core>

#include <utility>
#include <string>
#include <vector>

namespace rbto {

/// Exponential kernel exp(-|s - t| / l) on [0, L], discretized at n midpoints.
struct Covariance1D {
    double correlation_length = 1.0;
    double domain_length = 1.0;
    int points = 2;

    void validate() const;
    double weight() const { return domain_length / points; }
    double abscissa(int k) const { return (k + 0.5) * weight(); }
    double operator()(double s, double t) const;
};

/// All discrete eigenpairs of a 1-D kernel. Columns of `functions` hold the
/// eigenfunction values at the midpoints, normalized so sum_k e(x_k)^2 h = 1.
struct KlPairs1D {
    Eigen::VectorXd eigenvalues; // descending
    Eigen::MatrixXd functions;   // points x points
    double weight = 1.0;
};

/// Nystrom discretization of the 1-D eigenproblem.
KlPairs1D kl_1d(const Covariance1D& cov);

/// Truncated product basis of the separable 2-D kernel, evaluated at element
/// centroids in grid order (element = ex * ny + ey).
struct KLBasis {
    int nx = 0;
    int ny = 0;
    Eigen::VectorXd eigenvalues;            // M, descending
    Eigen::MatrixXd functions;              // (nx * ny) x M
    std::vector<std::pair<int, int>> modes; // 1-D indices (ix, iy) of each retained mode
    double weight = 1.0;                    // product quadrature weight hx * hy
    bool rescale_pointwise_variance = false;

    int terms() const { return static_cast<int>(eigenvalues.size()); }
    /// Sum of every product eigenvalue, i.e. the quadrature trace of the kernel.
    double full_trace = 0.0;

    /// sum_i lambda_i e_i(x_c)^2 per element.
    Eigen::VectorXd pointwise_variance() const;
};

KLBasis kl_product(const KlPairs1D& kx, const KlPairs1D& ky, int terms);

/// Absolute: correlation lengths in element units. Relative: fraction of the
/// domain side in that direction.
enum class CorrLengthMode { Absolute, Relative };

std::string to_string(CorrLengthMode mode);
CorrLengthMode corr_length_mode_from_string(const std::string& name);

/// Product KL basis over an nx x ny grid of unit elements, one abscissa per
/// element column/row.
KLBasis make_kl_basis(int nx, int ny, double l1, double l2, int terms,
                      CorrLengthMode mode = CorrLengthMode::Absolute, bool rescale_pointwise_variance = false);

/// y(x_c) = sum_i sqrt(lambda_i) xi_i e_i(x_c); zero mean.
Eigen::VectorXd sample_field(const KLBasis& basis, const Eigen::VectorXd& xi);

/// Bounds of the uniform marginal of Young's modulus.
struct ModulusMarginal {
    double a = 1.0;
    double b = 1.5;

    void validate() const;
    double mean() const { return a + 0.5 * (b - a); }
};

double normal_cdf(double y);
double normal_quantile(double p);

/// E_e = a + (b - a) Phi(y_e).
Eigen::VectorXd field_to_modulus(const Eigen::VectorXd& field, const ModulusMarginal& marginal);

} // namespace rbto
