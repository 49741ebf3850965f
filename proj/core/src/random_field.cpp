#include "rbto/random_field.hpp"

#include "rbto/error.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rbto {

void Covariance1D::validate() const {
    RBTO_REQUIRE(correlation_length > 0.0 && std::isfinite(correlation_length),
                 ErrorCode::InvalidParameter, "correlation length must be positive");
    RBTO_REQUIRE(domain_length > 0.0 && std::isfinite(domain_length), ErrorCode::InvalidParameter,
                 "domain length must be positive");
    RBTO_REQUIRE(points >= 2, ErrorCode::InvalidParameter, "KL needs at least two abscissae");
}

double Covariance1D::operator()(double s, double t) const {
    return std::exp(-std::abs(s - t) / correlation_length);
}

namespace {

// Largest-magnitude component positive; ties resolved toward the lowest index.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    const double peak = v.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v[k]) >= peak * (1.0 - 1e-9)) {
            if (v[k] < 0.0) v = -v;
            return;
        }
    }
}

} // namespace

KlPairs1D kl_1d(const Covariance1D& cov) {
    cov.validate();
    const int n = cov.points;
    const double h = cov.weight();
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = h * cov(cov.abscissa(i), cov.abscissa(j));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    RBTO_REQUIRE(solver.info() == Eigen::Success, ErrorCode::Numeric,
                 "KL eigen-solver did not converge");

    KlPairs1D out;
    out.weight = h;
    out.eigenvalues.resize(n);
    out.functions.resize(n, n);
    // Eigen returns ascending order.
    for (int k = 0; k < n; ++k) {
        const int src = n - 1 - k;
        out.eigenvalues[k] = solver.eigenvalues()[src];
        out.functions.col(k) = solver.eigenvectors().col(src) / std::sqrt(h);
        fix_sign(out.functions.col(k));
    }
    return out;
}

KLBasis kl_product(const KlPairs1D& kx, const KlPairs1D& ky, int terms) {
    const int nx = static_cast<int>(kx.eigenvalues.size());
    const int ny = static_cast<int>(ky.eigenvalues.size());
    RBTO_REQUIRE(terms >= 1 && terms <= nx * ny, ErrorCode::InvalidParameter,
                 "KL truncation must lie in [1, nx * ny]");

    struct Candidate {
        double lambda;
        int ix;
        int iy;
    };
    std::vector<Candidate> all;
    all.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    double trace = 0.0;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            all.push_back({kx.eigenvalues[i] * ky.eigenvalues[j], i, j});
            trace += kx.eigenvalues[i] * ky.eigenvalues[j];
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const Candidate& l, const Candidate& r) {
        if (l.lambda != r.lambda) return l.lambda > r.lambda;
        return std::pair(l.ix, l.iy) < std::pair(r.ix, r.iy);
    });

    KLBasis basis;
    basis.nx = nx;
    basis.ny = ny;
    basis.weight = kx.weight * ky.weight;
    basis.full_trace = trace;
    basis.eigenvalues.resize(terms);
    basis.functions.resize(nx * ny, terms);
    for (int k = 0; k < terms; ++k) {
        const auto& c = all[static_cast<std::size_t>(k)];
        RBTO_REQUIRE(c.lambda > 0.0, ErrorCode::Numeric, "retained KL eigenvalue is not positive");
        basis.eigenvalues[k] = c.lambda;
        basis.modes.emplace_back(c.ix, c.iy);
        for (int ex = 0; ex < nx; ++ex)
            for (int ey = 0; ey < ny; ++ey)
                basis.functions(ex * ny + ey, k) = kx.functions(ex, c.ix) * ky.functions(ey, c.iy);
    }
    return basis;
}

std::string to_string(CorrLengthMode mode) {
    return mode == CorrLengthMode::Absolute ? "absolute" : "relative";
}

CorrLengthMode corr_length_mode_from_string(const std::string& name) {
    if (name == "absolute") return CorrLengthMode::Absolute;
    if (name == "relative") return CorrLengthMode::Relative;
    throw Error(ErrorCode::Config, "unknown corr_length_mode '" + name + "' (expected absolute or relative)");
}

KLBasis make_kl_basis(int nx, int ny, double l1, double l2, int terms, CorrLengthMode mode,
                      bool rescale_pointwise_variance) {
    RBTO_REQUIRE(nx >= 2 && ny >= 2, ErrorCode::InvalidParameter, "KL grid needs at least 2x2 elements");
    const double sx = mode == CorrLengthMode::Relative ? nx : 1.0;
    const double sy = mode == CorrLengthMode::Relative ? ny : 1.0;
    const KlPairs1D kx = kl_1d({l1 * sx, static_cast<double>(nx), nx});
    const KlPairs1D ky = kl_1d({l2 * sy, static_cast<double>(ny), ny});
    KLBasis basis = kl_product(kx, ky, terms);
    basis.rescale_pointwise_variance = rescale_pointwise_variance;
    return basis;
}

Eigen::VectorXd KLBasis::pointwise_variance() const {
    return functions.cwiseAbs2() * eigenvalues;
}

Eigen::VectorXd sample_field(const KLBasis& basis, const Eigen::VectorXd& xi) {
    RBTO_REQUIRE(xi.size() == basis.terms(), ErrorCode::SizeMismatch,
                 "xi length differs from KL truncation order");
    Eigen::VectorXd y = basis.functions * (basis.eigenvalues.cwiseSqrt().cwiseProduct(xi));
    if (basis.rescale_pointwise_variance) y = y.cwiseQuotient(basis.pointwise_variance().cwiseSqrt());
    return y;
}

void ModulusMarginal::validate() const {
    RBTO_REQUIRE(a > 0.0 && b > a && std::isfinite(b), ErrorCode::InvalidParameter,
                 "modulus bounds must satisfy 0 < a < b");
}

double normal_cdf(double y) {
    return 0.5 * std::erfc(-y / std::sqrt(2.0));
}

double normal_quantile(double p) {
    RBTO_REQUIRE(p > 0.0 && p < 1.0, ErrorCode::InvalidParameter, "probability must lie in (0, 1)");
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

Eigen::VectorXd field_to_modulus(const Eigen::VectorXd& field, const ModulusMarginal& marginal) {
    marginal.validate();
    Eigen::VectorXd e(field.size());
    for (Eigen::Index k = 0; k < field.size(); ++k)
        e[k] = marginal.a + (marginal.b - marginal.a) * normal_cdf(field[k]);
    return e;
}

} // namespace rbto
