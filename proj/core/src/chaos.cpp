#include "rbto/chaos.hpp"

#include "rbto/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rbto {

double hermite(int k, double x) {
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = x;
    for (int j = 1; j < k; ++j) {
        const double next = x * cur - j * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double hermite_derivative(int k, double x) {
    return k == 0 ? 0.0 : k * hermite(k - 1, x);
}

namespace {

void enumerate(int n, int remaining, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == n - 1) {
        cur.push_back(remaining);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int e = 0; e <= remaining; ++e) {
        cur.push_back(e);
        enumerate(n, remaining - e, cur, out);
        cur.pop_back();
    }
}

int nonzero(const std::vector<int>& e) {
    return static_cast<int>(std::count_if(e.begin(), e.end(), [](int v) { return v != 0; }));
}

} // namespace

HermiteBasis hermite_terms(int variables, int degree) {
    RBTO_REQUIRE(variables >= 1 && degree >= 1, ErrorCode::InvalidParameter,
                 "Hermite basis needs n >= 1 and p >= 1");
    HermiteBasis basis;
    basis.variables = variables;
    basis.degree = degree;
    for (int d = 0; d <= degree; ++d) {
        std::vector<std::vector<int>> level;
        std::vector<int> cur;
        enumerate(variables, d, cur, level);
        std::stable_sort(level.begin(), level.end(), [](const auto& l, const auto& r) {
            const int nl = nonzero(l);
            const int nr = nonzero(r);
            if ((nl <= 1) != (nr <= 1)) return nl <= 1;
            if (nl <= 1) {
                // pure powers: by variable index
                const auto il = std::find_if(l.begin(), l.end(), [](int v) { return v != 0; }) - l.begin();
                const auto ir = std::find_if(r.begin(), r.end(), [](int v) { return v != 0; }) - r.begin();
                return il < ir;
            }
            return l < r;
        });
        for (auto& e : level) basis.exponents.push_back(std::move(e));
    }
    return basis;
}

double HermiteBasis::term(int k, const Eigen::VectorXd& xi) const {
    const auto& e = exponents[static_cast<std::size_t>(k)];
    double v = 1.0;
    for (int i = 0; i < variables; ++i) v *= hermite(e[static_cast<std::size_t>(i)], xi[i]);
    return v;
}

Eigen::VectorXd HermiteBasis::terms(const Eigen::VectorXd& xi) const {
    RBTO_REQUIRE(xi.size() == variables, ErrorCode::SizeMismatch, "point dimension differs from basis");
    Eigen::VectorXd out(size());
    for (int k = 0; k < size(); ++k) out[k] = term(k, xi);
    return out;
}

Eigen::VectorXd HermiteBasis::term_gradient(int k, const Eigen::VectorXd& xi) const {
    const auto& e = exponents[static_cast<std::size_t>(k)];
    Eigen::VectorXd g(variables);
    for (int i = 0; i < variables; ++i) {
        double v = hermite_derivative(e[static_cast<std::size_t>(i)], xi[i]);
        for (int j = 0; j < variables; ++j)
            if (j != i) v *= hermite(e[static_cast<std::size_t>(j)], xi[j]);
        g[i] = v;
    }
    return g;
}

double HermiteBasis::norm_squared(int k) const {
    double v = 1.0;
    for (int e : exponents[static_cast<std::size_t>(k)])
        for (int j = 2; j <= e; ++j) v *= j;
    return v;
}

std::string HermiteBasis::label(int k) const {
    const auto& e = exponents[static_cast<std::size_t>(k)];
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i < variables; ++i) {
        const int p = e[static_cast<std::size_t>(i)];
        if (p == 0) continue;
        if (!first) os << '*';
        os << "He" << p << "(xi" << (i + 1) << ')';
        first = false;
    }
    return first ? "1" : os.str();
}

Eigen::VectorXd hermite_roots(int k) {
    RBTO_REQUIRE(k >= 1, ErrorCode::InvalidParameter, "Hermite root order must be >= 1");
    // Golub-Welsch: He_k roots are the eigenvalues of the Jacobi matrix with
    // off-diagonal sqrt(j).
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(k, k);
    for (int j = 1; j < k; ++j) jac(j, j - 1) = jac(j - 1, j) = std::sqrt(static_cast<double>(j));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jac, Eigen::EigenvaluesOnly);
    Eigen::VectorXd roots = solver.eigenvalues();
    // Newton polish against the recurrence.
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        for (int it = 0; it < 3; ++it) {
            const double d = hermite_derivative(k, roots[i]);
            if (d != 0.0) roots[i] -= hermite(k, roots[i]) / d;
        }
    }
    std::sort(roots.data(), roots.data() + roots.size());
    return roots;
}

CollocationSet collocation_points(const HermiteBasis& basis, int count) {
    RBTO_REQUIRE(count >= basis.size(), ErrorCode::InvalidParameter,
                 "collocation count below the number of basis terms");
    std::vector<double> axis;
    axis.push_back(0.0);
    const Eigen::VectorXd roots = hermite_roots(basis.degree + 1);
    for (Eigen::Index i = 0; i < roots.size(); ++i)
        if (std::abs(roots[i]) > 1e-12) axis.push_back(roots[i]);
    std::sort(axis.begin(), axis.end());

    const int n = basis.variables;
    const std::size_t per_axis = axis.size();
    std::size_t pool = 1;
    for (int i = 0; i < n; ++i) pool *= per_axis;
    RBTO_REQUIRE(static_cast<std::size_t>(count) <= pool, ErrorCode::InvalidParameter,
                 "collocation count exceeds the candidate pool of " + std::to_string(pool));

    std::vector<Eigen::VectorXd> candidates;
    candidates.reserve(pool);
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    for (std::size_t c = 0; c < pool; ++c) {
        Eigen::VectorXd p(n);
        for (int i = 0; i < n; ++i) p[i] = axis[idx[static_cast<std::size_t>(i)]];
        candidates.push_back(p);
        for (int i = n - 1; i >= 0; --i) {
            if (++idx[static_cast<std::size_t>(i)] < per_axis) break;
            idx[static_cast<std::size_t>(i)] = 0;
        }
    }
    // Density is monotone in the squared radius; compare radii with a relative
    // tolerance so mirrored points tie exactly.
    std::stable_sort(candidates.begin(), candidates.end(), [](const Eigen::VectorXd& l, const Eigen::VectorXd& r) {
        const double rl = l.squaredNorm();
        const double rr = r.squaredNorm();
        if (std::abs(rl - rr) > 1e-9 * std::max(1.0, std::max(rl, rr))) return rl < rr;
        return std::lexicographical_compare(l.data(), l.data() + l.size(), r.data(), r.data() + r.size());
    });

    CollocationSet set;
    set.target = count;
    set.points.assign(candidates.begin(), candidates.begin() + count);
    return set;
}

double ChaosSurrogate::eval(const Eigen::VectorXd& xi) const {
    return basis.terms(xi).dot(coefficients);
}

Eigen::VectorXd ChaosSurrogate::grad(const Eigen::VectorXd& xi) const {
    RBTO_REQUIRE(xi.size() == basis.variables, ErrorCode::SizeMismatch, "point dimension differs from basis");
    Eigen::VectorXd g = Eigen::VectorXd::Zero(basis.variables);
    for (int k = 1; k < basis.size(); ++k) g += coefficients[k] * basis.term_gradient(k, xi);
    return g;
}

double ChaosSurrogate::mean() const { return coefficients[0]; }

double ChaosSurrogate::variance() const {
    double v = 0.0;
    for (int k = 1; k < basis.size(); ++k) v += coefficients[k] * coefficients[k] * basis.norm_squared(k);
    return v;
}

ChaosSurrogate fit(const CollocationSet& points, const std::vector<double>& responses,
                   const HermiteBasis& basis) {
    const int rows = points.size();
    RBTO_REQUIRE(static_cast<int>(responses.size()) == rows, ErrorCode::SizeMismatch,
                 "response count differs from collocation count");
    RBTO_REQUIRE(rows >= basis.size(), ErrorCode::IllPosedFit,
                 "fewer collocation points than basis terms");
    Eigen::MatrixXd v(rows, basis.size());
    Eigen::VectorXd z(rows);
    for (int j = 0; j < rows; ++j) {
        v.row(j) = basis.terms(points.points[static_cast<std::size_t>(j)]).transpose();
        z[j] = responses[static_cast<std::size_t>(j)];
    }
    RBTO_REQUIRE(z.allFinite(), ErrorCode::Numeric, "non-finite response");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
    qr.setThreshold(1e-10);
    if (qr.rank() < basis.size()) {
        std::string cols;
        for (int k = static_cast<int>(qr.rank()); k < basis.size(); ++k) {
            const int c = qr.colsPermutation().indices()[k];
            cols += (cols.empty() ? "" : ", ") + std::to_string(c) + " [" + basis.label(c) + "]";
        }
        throw Error(ErrorCode::IllPosedFit, "collocation design matrix is rank deficient; columns " + cols);
    }
    ChaosSurrogate s;
    s.basis = basis;
    s.coefficients = qr.solve(z);
    s.residual_norm = (v * s.coefficients - z).norm();
    return s;
}

} // namespace rbto
