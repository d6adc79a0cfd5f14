#pragma once

#include "cocycle/invariant_poly.hpp"
#include "cocycle/map_dsl.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cocycle {

/// Strictly increasing k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> k_subsets(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> cur(k);
    std::iota(cur.begin(), cur.end(), 0);
    for (;;) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == n - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs(const std::vector<Matrix>& ms) {
    double r = 0;
    for (const auto& m : ms) r = std::max(r, max_abs(m));
    return r;
}

/// Point -> n coefficient matrices; entry a is the coefficient of dz^a.
struct MatrixOneForm {
    int n = 0;
    std::function<std::vector<Matrix>(const Point&)> eval;
    std::string provenance;

    std::vector<Matrix> operator()(const Point& z) const { return eval(z); }

    static MatrixOneForm zero(int n) {
        return {n, [n](const Point&) { return std::vector<Matrix>(n, Matrix::Zero(n, n)); }, "0"};
    }

    friend MatrixOneForm operator+(const MatrixOneForm& a, const MatrixOneForm& b) {
        if (a.n != b.n) throw ValidationError("form dimension mismatch");
        return {a.n,
                [a, b](const Point& z) {
                    auto x = a(z);
                    auto y = b(z);
                    for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
                    return x;
                },
                "(" + a.provenance + " + " + b.provenance + ")"};
    }
    friend MatrixOneForm operator*(std::complex<double> s, const MatrixOneForm& a) {
        return {a.n,
                [s, a](const Point& z) {
                    auto x = a(z);
                    for (auto& m : x) m *= s;
                    return x;
                },
                "c*" + a.provenance};
    }
};

/// Holomorphic k-form; coefficients follow k_subsets(n, k).
struct ScalarKForm {
    int n = 0;
    int k = 0;
    std::function<Vector(const Point&)> eval;
    std::string provenance;

    Vector operator()(const Point& z) const { return eval(z); }
    std::size_t size() const { return k_subsets(n, k).size(); }

    static ScalarKForm zero(int n, int k) {
        const auto m = static_cast<Eigen::Index>(k_subsets(n, k).size());
        return {n, k, [m](const Point&) { return Vector(Vector::Zero(m)); }, "0"};
    }

    friend ScalarKForm operator+(const ScalarKForm& a, const ScalarKForm& b) {
        if (a.n != b.n || a.k != b.k) throw ValidationError("form degree mismatch");
        return {a.n, a.k, [a, b](const Point& z) { return Vector(a(z) + b(z)); }, a.provenance + " + " + b.provenance};
    }
    friend ScalarKForm operator*(std::complex<double> s, const ScalarKForm& a) {
        return {a.n, a.k, [s, a](const Point& z) { return Vector(s * a(z)); }, "c*" + a.provenance};
    }
};

namespace detail {

inline Matrix checked_inverse(const Matrix& j, const Point& z, const std::string& what) {
    const auto det = j.determinant();
    if (!std::isfinite(std::abs(det)) || std::abs(det) < kMinJacobianDet) {
        std::string pt;
        for (Eigen::Index i = 0; i < z.size(); ++i)
            pt += (i ? ", " : "") + std::to_string(z(i).real()) + (z(i).imag() < 0 ? "" : "+") +
                  std::to_string(z(i).imag()) + "i";
        throw DomainError("singular Jacobian of " + what + " at (" + pt + ")");
    }
    return j.inverse();
}

inline bool all_zero(const Matrix& m) { return (m.array() == std::complex<double>(0)).all(); }

}  // namespace detail

/// J^{-1} dJ for the Jacobian J of f.
inline MatrixOneForm theta(const HoloMap& f) {
    const int n = f.dim();
    if (f.has_constant_jacobian()) return {n, MatrixOneForm::zero(n).eval, "theta(" + f.name() + ")"};
    return {n,
            [f, n](const Point& z) {
                Matrix jinv = detail::checked_inverse(f.jacobian(z), z, "'" + f.name() + "'");
                std::vector<Matrix> out;
                out.reserve(n);
                for (int a = 0; a < n; ++a) {
                    Matrix dj = f.jacobian_derivative(z, a);
                    out.push_back(detail::all_zero(dj) ? Matrix(Matrix::Zero(n, n)) : Matrix(jinv * dj));
                }
                return out;
            },
            "theta(" + f.name() + ")"};
}

/// Pullback of a matrix 1-form: coefficient b is sum_a dphi^a/dz^b J^{-1} M_a(phi(x)) J.
inline MatrixOneForm sharp_pullback(const HoloMap& phi, const MatrixOneForm& omega) {
    if (phi.dim() != omega.n) throw ValidationError("sharp pullback: dimension mismatch");
    const int n = phi.dim();
    return {n,
            [phi, omega, n](const Point& x) {
                Matrix j = phi.jacobian(x);
                auto ms = omega(phi(x));
                std::vector<Matrix> out(n, Matrix::Zero(n, n));
                bool any = false;
                for (const auto& m : ms) any = any || !detail::all_zero(m);
                if (!any) return out;
                Matrix jinv = detail::checked_inverse(j, x, "'" + phi.name() + "'");
                for (int a = 0; a < n; ++a) {
                    if (detail::all_zero(ms[a])) continue;
                    Matrix conj = jinv * ms[a] * j;
                    for (int b = 0; b < n; ++b) out[b] += j(a, b) * conj;
                }
                return out;
            },
            phi.name() + "^#" + omega.provenance};
}

/// Wedge expansion of T on k matrix 1-forms.
inline ScalarKForm apply_invariant(const InvariantMap& t, const std::vector<MatrixOneForm>& omegas) {
    const int k = t.arity;
    if (static_cast<int>(omegas.size()) != k) throw ValidationError("apply_invariant: arity mismatch");
    if (omegas.empty()) throw ValidationError("apply_invariant: no forms");
    const int n = omegas[0].n;
    for (const auto& w : omegas)
        if (w.n != n) throw ValidationError("apply_invariant: dimension mismatch");
    if (k > n) return ScalarKForm::zero(n, k);
    const auto subsets = k_subsets(n, k);
    std::string prov = "T[";
    for (int i = 0; i < k; ++i) prov += (i ? "," : "") + omegas[i].provenance;
    prov += "]";
    return {n, k,
            [t, omegas, subsets, k](const Point& z) {
                std::vector<std::vector<Matrix>> coeffs;
                coeffs.reserve(k);
                for (const auto& w : omegas) coeffs.push_back(w(z));
                Vector out = Vector::Zero(static_cast<Eigen::Index>(subsets.size()));
                std::vector<Matrix> args(k);
                for (std::size_t s = 0; s < subsets.size(); ++s) {
                    std::vector<int> perm(k);
                    std::iota(perm.begin(), perm.end(), 0);
                    do {
                        int inversions = 0;
                        for (int i = 0; i < k; ++i)
                            for (int j = i + 1; j < k; ++j) inversions += perm[i] > perm[j];
                        bool zero = false;
                        for (int i = 0; i < k; ++i) {
                            args[i] = coeffs[i][subsets[s][perm[i]]];
                            zero = zero || detail::all_zero(args[i]);
                        }
                        if (zero) continue;
                        auto v = eval_invariant(t, args);
                        out(s) += (inversions % 2 ? -1.0 : 1.0) * v;
                    } while (std::next_permutation(perm.begin(), perm.end()));
                }
                return out;
            },
            prov};
}

/// Holomorphic pullback of a k-form by Jacobian minors.
inline ScalarKForm pullback_kform(const HoloMap& phi, const ScalarKForm& w) {
    if (phi.dim() != w.n) throw ValidationError("pullback: dimension mismatch");
    const int n = w.n, k = w.k;
    const auto subsets = k_subsets(n, k);
    return {n, k,
            [phi, w, subsets, k](const Point& x) {
                Vector src = w(phi(x));
                Vector out = Vector::Zero(static_cast<Eigen::Index>(subsets.size()));
                if ((src.array() == std::complex<double>(0)).all()) return out;
                Matrix j = phi.jacobian(x);
                Matrix minor(k, k);
                for (std::size_t b = 0; b < subsets.size(); ++b)
                    for (std::size_t a = 0; a < subsets.size(); ++a) {
                        if (src(a) == std::complex<double>(0)) continue;
                        for (int r = 0; r < k; ++r)
                            for (int c = 0; c < k; ++c) minor(r, c) = j(subsets[a][r], subsets[b][c]);
                        out(b) += src(a) * (k == 0 ? std::complex<double>(1) : minor.determinant());
                    }
                return out;
            },
            phi.name() + "^*" + w.provenance};
}

// ---------------------------------------------------------------- dumps

inline nlohmann::json complex_json(std::complex<double> c) { return nlohmann::json::array({c.real(), c.imag()}); }

inline nlohmann::json point_json(const Point& z) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < z.size(); ++i) a.push_back(complex_json(z(i)));
    return a;
}

inline nlohmann::json matrix_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

inline nlohmann::json sampled_dump(const MatrixOneForm& w, const std::vector<Point>& points) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : points) {
        nlohmann::json cs = nlohmann::json::array();
        for (const auto& m : w(p)) cs.push_back(matrix_json(m));
        out.push_back({{"point", point_json(p)}, {"coefficients", cs}});
    }
    return out;
}

inline nlohmann::json sampled_dump(const ScalarKForm& w, const std::vector<Point>& points) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : points) {
        Vector v = w(p);
        nlohmann::json cs = nlohmann::json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) cs.push_back(complex_json(v(i)));
        out.push_back({{"point", point_json(p)}, {"coefficients", cs}});
    }
    return out;
}

}  // namespace cocycle
