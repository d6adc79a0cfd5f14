#pragma once

#include "cocycle/forms.hpp"
#include "cocycle/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <numbers>
#include <random>

namespace cocycle {

inline constexpr double kDiagonalCutoff = 1e-12;
inline constexpr int kMinQuadratureOrder = 4;

/// b_n = -(-1)^{n(n-1)} (n-1)! / (2 pi i).
inline std::complex<double> bm_constant(int n) {
    if (n < 2) throw ValidationError("the kernel needs n >= 2");
    double fact = std::tgamma(static_cast<double>(n));
    double sign = (static_cast<long>(n) * (n - 1)) % 2 ? -1.0 : 1.0;
    return -sign * fact / std::complex<double>(0, 2 * std::numbers::pi);
}

/// (-1)^{n(n-1)/2} (n-1)! / (2 pi i)^n: unit mass with the antiholomorphic factor written first.
inline std::complex<double> unit_mass_constant(int n) {
    if (n < 2) throw ValidationError("the kernel needs n >= 2");
    double sign = (static_cast<long>(n) * (n - 1) / 2) % 2 ? -1.0 : 1.0;
    return sign * std::tgamma(static_cast<double>(n)) / std::pow(std::complex<double>(0, 2 * std::numbers::pi), n);
}

namespace detail {

inline void require_off_diagonal(const Point& z, const Point& xi) {
    if (z.size() != xi.size()) throw ValidationError("kernel points differ in dimension");
    if (!((xi - z).norm() >= kDiagonalCutoff))
        throw DomainError("kernel evaluated within " + std::to_string(kDiagonalCutoff) + " of the diagonal");
}

/// Coefficient on dv^S of the wedge of the rows, S over k_subsets(cols, rows).
inline Vector wedge_rows(const Matrix& rows) {
    const auto subsets = k_subsets(static_cast<int>(rows.cols()), static_cast<int>(rows.rows()));
    Vector out(static_cast<Eigen::Index>(subsets.size()));
    Matrix minor(rows.rows(), rows.rows());
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        for (Eigen::Index c = 0; c < rows.rows(); ++c) minor.col(c) = rows.col(subsets[s][c]);
        out(static_cast<Eigen::Index>(s)) = rows.rows() == 0 ? std::complex<double>(1) : minor.determinant();
    }
    return out;
}

}  // namespace detail

/// Coefficient i multiplies the wedge over j != i of (dxi-bar^j - dz-bar^j), then dxi^1..dxi^n.
struct BMEvaluation {
    int n = 0;
    Point z;
    Point xi;
    Vector coefficients;

    nlohmann::json to_json() const {
        nlohmann::json c = nlohmann::json::array();
        for (Eigen::Index i = 0; i < coefficients.size(); ++i) c.push_back(complex_json(coefficients(i)));
        return {{"n", n}, {"z", point_json(z)}, {"xi", point_json(xi)}, {"coefficients", c}};
    }
};

inline BMEvaluation bm_eval(int n, const Point& z, const Point& xi) {
    const auto b = bm_constant(n);
    if (z.size() != n) throw ValidationError("kernel point has wrong dimension");
    detail::require_off_diagonal(z, xi);
    const Point d = xi - z;
    const double denom = std::pow(d.squaredNorm(), n);
    BMEvaluation e{n, z, xi, Vector(n)};
    for (int i = 0; i < n; ++i) e.coefficients(i) = b * (i % 2 ? -1.0 : 1.0) * std::conj(d(i)) / denom;
    return e;
}

/// Form on pairs (z, xi): antiholomorphic (n-1)-part over (dz-bar^1..n, dxi-bar^1..n), then dxi^1..dxi^n.
struct PairForm {
    int n = 0;
    std::function<Vector(const Point&, const Point&)> eval;
    std::string provenance;

    Vector operator()(const Point& z, const Point& xi) const { return eval(z, xi); }
    std::size_t size() const { return k_subsets(2 * n, n - 1).size(); }
};

namespace detail {

/// Kernel pulled back along rho x rho at (z, xi).
inline Vector bm_pulled(const HoloMap& rho, const Point& z, const Point& xi) {
    const int n = rho.dim();
    const Point rz = rho(z), rx = rho(xi);
    detail::require_off_diagonal(rz, rx);
    const auto e = bm_eval(n, rz, rx);
    const Matrix jz = rho.jacobian(z).conjugate(), jx = rho.jacobian(xi);
    const Matrix jxb = jx.conjugate();
    Vector out = Vector::Zero(static_cast<Eigen::Index>(k_subsets(2 * n, n - 1).size()));
    for (int i = 0; i < n; ++i) {
        Matrix rows(n - 1, 2 * n);
        for (int j = 0, r = 0; j < n; ++j) {
            if (j == i) continue;
            rows.row(r).head(n) = -jz.row(j);
            rows.row(r++).tail(n) = jxb.row(j);
        }
        out += e.coefficients(i) * detail::wedge_rows(rows);
    }
    return out * jx.determinant();
}

}  // namespace detail

/// rho^* of the kernel along rho x rho.
inline PairForm bm_vertex(const HoloMap& rho) {
    if (rho.dim() < 2) throw ValidationError("the kernel needs n >= 2");
    return {rho.dim(), [rho](const Point& z, const Point& xi) { return detail::bm_pulled(rho, z, xi); },
            "bm^" + rho.name()};
}

/// (psi x psi)^* of a pair form.
inline PairForm pullback_pair(const HoloMap& psi, const PairForm& f) {
    if (psi.dim() != f.n) throw ValidationError("pair pullback: dimension mismatch");
    const int n = f.n;
    const auto subsets = k_subsets(2 * n, n - 1);
    return {n,
            [psi, f, n, subsets](const Point& z, const Point& xi) {
                Vector src = f(psi(z), psi(xi));
                const Matrix jx = psi.jacobian(xi);
                Matrix m = Matrix::Zero(2 * n, 2 * n);
                m.topLeftCorner(n, n) = psi.jacobian(z).conjugate();
                m.bottomRightCorner(n, n) = jx.conjugate();
                Vector out = Vector::Zero(static_cast<Eigen::Index>(subsets.size()));
                Matrix minor(n - 1, n - 1);
                for (std::size_t t = 0; t < subsets.size(); ++t) {
                    if (src(t) == std::complex<double>(0)) continue;
                    for (std::size_t s = 0; s < subsets.size(); ++s) {
                        for (int r = 0; r < n - 1; ++r)
                            for (int c = 0; c < n - 1; ++c) minor(r, c) = m(subsets[t][r], subsets[s][c]);
                        out(s) += src(t) * (n == 1 ? std::complex<double>(1) : minor.determinant());
                    }
                }
                return Vector(out * jx.determinant());
            },
            psi.name() + "^*" + f.provenance};
}

struct PairSample {
    std::size_t first = 0;
    std::size_t second = 0;
    Vector coefficients;
};

/// All ordered pairs a != b of the cloud.
inline std::vector<PairSample> sample_pairs(const PairForm& f, const std::vector<Point>& cloud) {
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (std::size_t a = 0; a < cloud.size(); ++a)
        for (std::size_t b = 0; b < cloud.size(); ++b)
            if (a != b) idx.push_back({a, b});
    return parallel_map<PairSample>(idx.size(), [&](std::size_t i) {
        auto [a, b] = idx[i];
        if (!((cloud[a] - cloud[b]).norm() >= kDiagonalCutoff))
            throw DomainError("sample pair " + std::to_string(a) + "," + std::to_string(b) + " lies on the diagonal");
        return PairSample{a, b, f(cloud[a], cloud[b])};
    });
}

// ---------------------------------------------------------------- dbar

/// g_i(xi) with the form sum_i (-1)^i g_i dxi-bar[i] ^ dxi; closed iff sum_i dg_i/dxi-bar^i = 0.
using AntiCoefficients = std::function<Vector(const Point&)>;

struct DbarReport {
    bool pass = false;
    double step = 0;
    double residual = 0;       // at step
    double residual_half = 0;  // at step / 2
    double ratio = 0;
    double fitted_constant = 0;
    std::vector<double> probe_residuals;

    nlohmann::json to_json() const {
        return {{"pass", pass},   {"step", step},   {"residual", residual}, {"residual_half_step", residual_half},
                {"ratio", ratio}, {"fitted_constant", fitted_constant}, {"probe_residuals", probe_residuals}};
    }
};

namespace detail {

inline double dbar_residual(int n, const AntiCoefficients& g, const Point& xi, double h) {
    std::complex<double> div = 0;
    for (int i = 0; i < n; ++i) {
        Point e = Point::Zero(n);
        e(i) = h;
        Point ei = Point::Zero(n);
        ei(i) = std::complex<double>(0, h);
        auto dx = (g(xi + e)(i) - g(xi - e)(i)) / (2 * h);
        auto dy = (g(xi + ei)(i) - g(xi - ei)(i)) / (2 * h);
        div += 0.5 * (dx + std::complex<double>(0, 1) * dy);
    }
    return std::abs(div);
}

}  // namespace detail

/// Central differences at h and h/2; order two means the residual ratio is 4 within 20%.
inline DbarReport dbar_closed_check(int n, const Point& z, const AntiCoefficients& g, const std::vector<Point>& probes,
                                    double h) {
    if (!(h > 0)) throw ValidationError("step must be positive");
    for (const auto& p : probes)
        if (!((p - z).norm() >= 10 * h)) throw DomainError("probe closer than 10 steps to the singular point");
    DbarReport r;
    r.step = h;
    for (const auto& p : probes) {
        double a = detail::dbar_residual(n, g, p, h);
        double b = detail::dbar_residual(n, g, p, h / 2);
        r.probe_residuals.push_back(a);
        r.residual = std::max(r.residual, a);
        r.residual_half = std::max(r.residual_half, b);
    }
    r.fitted_constant = r.residual / (h * h);
    if (r.residual == 0 && r.residual_half == 0) {
        r.pass = true;
        return r;
    }
    r.ratio = r.residual_half > 0 ? r.residual / r.residual_half : std::numeric_limits<double>::infinity();
    r.pass = r.ratio >= 3.2 && r.ratio <= 4.8;
    return r;
}

inline AntiCoefficients bm_anti_coefficients(int n, const Point& z) {
    return [n, z](const Point& xi) {
        Vector c = bm_eval(n, z, xi).coefficients;
        for (int i = 1; i < n; i += 2) c(i) = -c(i);
        return c;
    };
}

inline DbarReport bm_dbar_check(int n, const Point& z, const std::vector<Point>& probes, double h) {
    return dbar_closed_check(n, z, bm_anti_coefficients(n, z), probes, h);
}

/// count points on the sphere of the given radius around z.
inline std::vector<Point> sphere_probes(const Point& z, int count, double radius, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<Point> out;
    for (int k = 0; k < count; ++k) {
        Point d(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) d(i) = {g(rng), g(rng)};
        out.push_back(z + radius * d / d.norm());
    }
    return out;
}

// ---------------------------------------------------------------- reproducing integral

struct GaussRule {
    std::vector<double> nodes;  // on [-1, 1]
    std::vector<double> weights;
};

/// Golub-Welsch.
inline GaussRule gauss_legendre(int order) {
    if (order < 1) throw ValidationError("quadrature order must be positive");
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) jac(k, k - 1) = jac(k - 1, k) = k / std::sqrt(4.0 * k * k - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    GaussRule r;
    for (int k = 0; k < order; ++k) {
        r.nodes.push_back(es.eigenvalues()(k));
        r.weights.push_back(2 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k));
    }
    return r;
}

/// Integral of constant * sum_i (-1)^i conj(xi_i - z_i)/|xi - z|^4 dxi-bar[i] ^ dxi over |xi - z| = r in C^2.
inline std::complex<double> reproducing_integral(const Point& z, double r, int order,
                                                 std::complex<double> constant = unit_mass_constant(2)) {
    if (z.size() != 2) throw ValidationError("the sphere quadrature is two-dimensional");
    if (!(r > 0)) throw ValidationError("radius must be positive");
    if (order < kMinQuadratureOrder)
        throw ValidationError("quadrature order must be at least " + std::to_string(kMinQuadratureOrder));
    const auto rule = gauss_legendre(order);
    const double pi = std::numbers::pi;
    const std::complex<double> I(0, 1);
    auto rows = parallel_map<std::complex<double>>(rule.nodes.size(), [&](std::size_t a) {
        const double eta = pi / 4 * (rule.nodes[a] + 1), weta = pi / 4 * rule.weights[a];
        std::complex<double> acc = 0;
        for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
            const double al = pi * (rule.nodes[b] + 1), wal = pi * rule.weights[b];
            for (std::size_t c = 0; c < rule.nodes.size(); ++c) {
                const double be = pi * (rule.nodes[c] + 1), wbe = pi * rule.weights[c];
                const std::complex<double> u1 = r * std::cos(eta) * std::exp(I * al);
                const std::complex<double> u2 = r * std::sin(eta) * std::exp(I * be);
                // rows: d/deta, d/dalpha, d/dbeta of (xi1, xi2, conj xi1, conj xi2)
                const std::complex<double> d1[3] = {-r * std::sin(eta) * std::exp(I * al), I * u1, 0.0};
                const std::complex<double> d2[3] = {r * std::cos(eta) * std::exp(I * be), 0.0, I * u2};
                auto det3 = [&](const std::complex<double>* p, const std::complex<double>* q,
                                const std::complex<double>* s) {
                    return p[0] * (q[1] * s[2] - q[2] * s[1]) - p[1] * (q[0] * s[2] - q[2] * s[0]) +
                           p[2] * (q[0] * s[1] - q[1] * s[0]);
                };
                std::complex<double> c1[3], c2[3];
                for (int t = 0; t < 3; ++t) {
                    c1[t] = std::conj(d1[t]);
                    c2[t] = std::conj(d2[t]);
                }
                const double r4 = std::pow(r, 4);
                const std::complex<double> form =
                    std::conj(u1) / r4 * det3(c2, d1, d2) - std::conj(u2) / r4 * det3(c1, d1, d2);
                // outward normal first fixes the boundary orientation
                Eigen::Matrix4d frame;
                auto real4 = [](std::complex<double> a, std::complex<double> b) {
                    return Eigen::Vector4d(a.real(), a.imag(), b.real(), b.imag());
                };
                frame.col(0) = real4(u1, u2);
                for (int t = 0; t < 3; ++t) frame.col(t + 1) = real4(d1[t], d2[t]);
                const double orient = frame.determinant() >= 0 ? 1.0 : -1.0;
                acc += weta * wal * wbe * orient * form;
            }
        }
        return acc;
    });
    std::complex<double> total = 0;
    for (const auto& v : rows) total += v;
    return constant * total;
}

// ---------------------------------------------------------------- diagonal restriction

using PairFunction = std::function<Vector(const Point&, const Point&)>;

struct ExtrapolationSpec {
    std::vector<Point> directions;  // empty: coordinate axes and their diagonal
    double initial_step = 0.1;
    int levels = 8;
    double agreement_factor = 10;
    double divergence_tol = 1e-6;
};

struct DiagonalValue {
    Point z;
    Vector value;
    double error_estimate = 0;
    double direction_spread = 0;
};

namespace detail {

/// Romberg-style table on eps_k = eps_0 / 2^k; returns (limit, |last - previous diagonal|).
inline std::pair<Vector, double> richardson(const std::vector<Vector>& samples) {
    const std::size_t m = samples.size();
    std::vector<std::vector<Vector>> t(m);
    for (std::size_t k = 0; k < m; ++k) {
        t[k].push_back(samples[k]);
        for (std::size_t j = 1; j <= k; ++j) {
            const double f = std::pow(2.0, static_cast<double>(j));
            t[k].push_back((f * t[k][j - 1] - t[k - 1][j - 1]) / (f - 1));
        }
    }
    const Vector& best = t[m - 1][m - 1];
    double est = m > 1 ? max_abs(Vector(best - t[m - 2][m - 2])) : std::numeric_limits<double>::infinity();
    return {best, est};
}

}  // namespace detail

/// Limit of F(z, z + eps v) as eps -> 0, along each direction; throws when limits diverge or disagree.
inline std::vector<DiagonalValue> hartogs_diagonal(int n, const PairFunction& f, const std::vector<Point>& diagonal,
                                                   ExtrapolationSpec spec = {}) {
    if (n < 2) throw ValidationError("the diagonal restriction needs n >= 2");
    if (spec.levels < 2) throw ValidationError("extrapolation needs at least two levels");
    if (spec.directions.empty()) {
        for (int i = 0; i < n; ++i) spec.directions.push_back(Point::Unit(n, i));
        spec.directions.push_back(Point::Constant(n, std::complex<double>(0.6, 0.8)) / std::sqrt(double(n)));
    }
    std::vector<DiagonalValue> out;
    for (const auto& z : diagonal) {
        if (z.size() != n) throw ValidationError("diagonal point has wrong dimension");
        std::vector<std::pair<Vector, double>> limits;
        for (const auto& v : spec.directions) {
            std::vector<Vector> samples;
            for (int k = 0; k < spec.levels; ++k) samples.push_back(f(z, z + spec.initial_step / std::pow(2.0, k) * v));
            auto lim = detail::richardson(samples);
            double scale = std::max(1.0, max_abs(lim.first));
            if (!std::isfinite(scale) || !(lim.second <= spec.divergence_tol * scale))
                throw DomainError("divergent diagonal limit: extrapolation residual " + std::to_string(lim.second) +
                                  "; no holomorphic extension");
            limits.push_back(lim);
        }
        DiagonalValue d{z, limits[0].first, 0, 0};
        for (const auto& [v, e] : limits) d.error_estimate = std::max(d.error_estimate, e);
        const double floor = 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, max_abs(d.value));
        for (const auto& [v, e] : limits) d.direction_spread = std::max(d.direction_spread, max_abs(Vector(v - d.value)));
        if (d.direction_spread > spec.agreement_factor * std::max(d.error_estimate, floor))
            throw DomainError("direction-dependent diagonal limit: spread " + std::to_string(d.direction_spread));
        out.push_back(std::move(d));
    }
    return out;
}

// ---------------------------------------------------------------- parametrix steps

/// User-supplied cochain data: cell and point to coefficients.
using CochainData = std::function<Vector(const std::vector<int>&, const Point&)>;

struct ParametrixReport {
    bool pass = true;
    double max_residual = 0;
    std::string worst_cell;

    nlohmann::json to_json() const { return {{"pass", pass}, {"max_residual", max_residual}, {"worst_cell", worst_cell}}; }
};

/// dbar(omega^q) = delta(omega^{q-1}) on each supplied cell of size q + 1.
inline ParametrixReport verify_parametrix_step(const CochainData& dbar_current, const CochainData& previous,
                                               const std::vector<std::vector<int>>& cells,
                                               const std::vector<Point>& points, double tol) {
    ParametrixReport r;
    for (const auto& cell : cells) {
        if (cell.size() < 2) throw ValidationError("parametrix cells need at least two indices");
        for (const auto& p : points) {
            Vector d = dbar_current(cell, p);
            for (std::size_t j = 0; j < cell.size(); ++j) {
                auto face = cell;
                face.erase(face.begin() + static_cast<long>(j));
                d -= (j % 2 ? -1.0 : 1.0) * previous(face, p);
            }
            double m = max_abs(d);
            if (m > r.max_residual || r.worst_cell.empty()) {
                r.max_residual = std::max(r.max_residual, m);
                std::string s;
                for (std::size_t i = 0; i < cell.size(); ++i) s += (i ? "," : "") + std::to_string(cell[i]);
                if (m >= r.max_residual) r.worst_cell = s;
            }
        }
    }
    r.pass = r.max_residual <= tol;
    return r;
}

}  // namespace cocycle
