#pragma once

#include "cocycle/rational.hpp"

#include <json.hpp>

#include <algorithm>
#include <complex>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace cocycle {

inline double magnitude(const Rational& q) { return std::abs(to_double(q)); }
inline double magnitude(const std::complex<double>& c) { return std::abs(c); }

template <class S>
inline constexpr bool is_exact_v = std::is_same_v<S, Rational>;

/// Elements are coordinate vectors over S.
template <class S>
using Element = std::vector<S>;

template <class S>
double max_magnitude(const Element<S>& x) {
    double r = 0;
    for (const auto& v : x) r = std::max(r, magnitude(v));
    return r;
}

template <class S>
bool is_zero_element(const Element<S>& x, double tol) {
    if constexpr (is_exact_v<S>)
        return std::all_of(x.begin(), x.end(), [](const S& v) { return v == 0; });
    else
        return max_magnitude(x) <= tol;
}

template <class S>
Element<S>& axpy(Element<S>& y, const S& a, const Element<S>& x) {
    if (y.size() != x.size()) throw ValidationError("element size mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
    return y;
}

template <class S>
using DenseMatrix = std::vector<std::vector<S>>;

/// Rank by Gaussian elimination; exact for rationals, pivot threshold tol otherwise.
template <class S>
int rank_of(DenseMatrix<S> m, double tol = 1e-10) {
    if (m.empty()) return 0;
    const std::size_t rows = m.size(), cols = m[0].size();
    int rank = 0;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = rows;
        double best = 0;
        for (std::size_t i = r; i < rows; ++i) {
            double mag = magnitude(m[i][c]);
            if constexpr (is_exact_v<S>) {
                if (m[i][c] != 0) { piv = i; break; }
            } else if (mag > tol && mag > best) {
                best = mag;
                piv = i;
            }
        }
        if (piv == rows) continue;
        std::swap(m[r], m[piv]);
        for (std::size_t i = r + 1; i < rows; ++i) {
            if (magnitude(m[i][c]) == 0) continue;
            S f = m[i][c] / m[r][c];
            for (std::size_t k = c; k < cols; ++k) m[i][k] -= f * m[r][k];
        }
        ++r;
        ++rank;
    }
    return rank;
}

/// Finitely supported cochain complex with d raising degree by one.
template <class S>
class GradedComplex {
public:
    using Differential = std::function<Element<S>(int, const Element<S>&)>;
    using Admission = std::function<bool(int, const Element<S>&)>;

    GradedComplex() = default;
    GradedComplex(std::map<int, int> dims, Differential d, double tol = 1e-10)
        : dims_(std::move(dims)), d_(std::move(d)), tol_(tol) {
        for (auto it = dims_.begin(); it != dims_.end();) {
            if (it->second < 0) throw ValidationError("negative dimension");
            it = it->second == 0 ? dims_.erase(it) : std::next(it);
        }
    }

    /// d given by one matrix per degree; matrices[p] maps degree p to p+1 (rows = dim(p+1)).
    static GradedComplex from_matrices(std::map<int, int> dims, std::map<int, DenseMatrix<S>> matrices,
                                       double tol = 1e-10) {
        GradedComplex c(dims, {}, tol);
        c.d_ = [matrices, dims = c.dims_](int p, const Element<S>& x) {
            auto tgt = dims.find(p + 1);
            Element<S> y(tgt == dims.end() ? 0 : tgt->second, S(0));
            auto m = matrices.find(p);
            if (m == matrices.end()) return y;
            for (std::size_t r = 0; r < y.size(); ++r)
                for (std::size_t c = 0; c < x.size(); ++c) y[r] += m->second[r][c] * x[c];
            return y;
        };
        return c;
    }

    int dim(int p) const {
        auto it = dims_.find(p);
        return it == dims_.end() ? 0 : it->second;
    }
    const std::map<int, int>& dims() const { return dims_; }
    double tolerance() const { return tol_; }
    int min_degree() const { return dims_.empty() ? 0 : dims_.begin()->first; }
    int max_degree() const { return dims_.empty() ? 0 : dims_.rbegin()->first; }

    Element<S> zero(int p) const { return Element<S>(dim(p), S(0)); }
    Element<S> basis(int p, int i) const {
        auto e = zero(p);
        e.at(i) = S(1);
        return e;
    }

    Element<S> d(int p, const Element<S>& x) const {
        if (static_cast<int>(x.size()) != dim(p)) throw ValidationError("element has wrong size for degree");
        if (dim(p) == 0 || dim(p + 1) == 0 || !d_) return zero(p + 1);
        return d_(p, x);
    }

    bool is_zero(const Element<S>& x) const { return is_zero_element(x, tol_); }

    bool admits(int p, const Element<S>& x) const {
        return static_cast<int>(x.size()) == dim(p) && (!admit_ || admit_(p, x));
    }

    Element<S> insert(int p, Element<S> x) const {
        if (!admits(p, x)) throw ValidationError("element rejected in degree " + std::to_string(p));
        return x;
    }

    DenseMatrix<S> matrix_of(int p) const {
        DenseMatrix<S> m(dim(p + 1), std::vector<S>(dim(p), S(0)));
        for (int c = 0; c < dim(p); ++c) {
            auto col = d(p, basis(p, c));
            for (int r = 0; r < dim(p + 1); ++r) m[r][c] = col[r];
        }
        return m;
    }

    int rank_d(int p) const { return rank_of(matrix_of(p), tol_); }

    /// dim ker d_p - rank d_{p-1}
    int cohomology_dim(int p) const { return dim(p) - rank_d(p) - rank_d(p - 1); }

    /// max |d d e| over basis vectors
    double d_squared_residual() const {
        double r = 0;
        for (const auto& [p, n] : dims_)
            for (int i = 0; i < n; ++i) r = std::max(r, max_magnitude(d(p + 1, d(p, basis(p, i)))));
        return r;
    }

    GradedComplex with_admission(Admission a) const {
        GradedComplex c = *this;
        c.admit_ = std::move(a);
        return c;
    }

private:
    std::map<int, int> dims_;
    Differential d_;
    Admission admit_;
    double tol_ = 1e-10;
};

/// Keep degrees < 0, keep only d-closed elements in degree 0, drop positive degrees.
template <class S>
GradedComplex<S> smart_truncate(const GradedComplex<S>& c) {
    std::map<int, int> dims;
    for (const auto& [p, n] : c.dims())
        if (p <= 0) dims[p] = n;
    auto out = GradedComplex<S>(
        dims, [c](int p, const Element<S>& x) { return c.d(p, x); }, c.tolerance());
    return out.with_admission([c](int p, const Element<S>& x) {
        if (p > 0) return false;
        if (p < 0) return c.admits(p, x);
        return c.admits(p, x) && c.is_zero(c.d(0, x));
    });
}

// ---------------------------------------------------------------- Dold-Kan simplices

using Cell = std::vector<int>;

inline std::string cell_key(const Cell& c) {
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
    return s;
}

inline Cell parse_cell_key(const std::string& s) {
    Cell c;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        c.push_back(static_cast<int>(parse_integer(s.substr(pos, next - pos))));
        pos = next + 1;
    }
    for (std::size_t i = 1; i < c.size(); ++i)
        if (c[i] <= c[i - 1]) throw ValidationError("cell indices must increase: " + s);
    return c;
}

/// Nonempty strictly increasing subsets of {0..n}, ordered by size then lexicographically.
inline std::vector<Cell> cells_of(int n) {
    std::vector<Cell> out;
    for (int size = 1; size <= n + 1; ++size) {
        Cell cur(size);
        std::iota(cur.begin(), cur.end(), 0);
        for (;;) {
            out.push_back(cur);
            int i = size - 1;
            while (i >= 0 && cur[i] == n + 1 - size + i) --i;
            if (i < 0) break;
            ++cur[i];
            for (int j = i + 1; j < size; ++j) cur[j] = cur[j - 1] + 1;
        }
    }
    return out;
}

/// An n-simplex of the Dold-Kan functor: the cell (i_0 < ... < i_l) carries an element of degree -l.
template <class S>
struct DKSimplex {
    int n = 0;
    std::map<Cell, Element<S>> labels;

    const Element<S>& at(const Cell& c) const {
        auto it = labels.find(c);
        if (it == labels.end()) throw ValidationError("missing label for cell (" + cell_key(c) + ")");
        return it->second;
    }

    static DKSimplex zero(int n, const GradedComplex<S>& c) {
        DKSimplex s{n, {}};
        for (const auto& cell : cells_of(n)) s.labels[cell] = c.zero(1 - static_cast<int>(cell.size()));
        return s;
    }

    friend bool operator==(const DKSimplex& a, const DKSimplex& b) = default;
};

struct CellResidual {
    Cell cell;
    double residual = 0;
};

struct DKReport {
    bool pass = true;
    double max_residual = 0;
    std::vector<CellResidual> cells;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"pass", pass}, {"max_residual", max_residual}, {"cells", nlohmann::json::array()}};
        for (const auto& c : cells) j["cells"].push_back({{"cell", cell_key(c.cell)}, {"residual", c.residual}});
        return j;
    }
};

/// Residual of sum_j (-1)^j c_{face_j} - d(c_cell) on one cell of positive dimension.
template <class S>
Element<S> dk_cell_defect(const DKSimplex<S>& s, const GradedComplex<S>& c, const Cell& cell) {
    const int l = static_cast<int>(cell.size()) - 1;
    Element<S> acc = c.d(-l, s.at(cell));
    for (auto& v : acc) v = -v;
    for (int j = 0; j <= l; ++j) {
        Cell face = cell;
        face.erase(face.begin() + j);
        axpy(acc, S(j % 2 ? -1 : 1), s.at(face));
    }
    return acc;
}

template <class S>
DKReport dk_validate(const DKSimplex<S>& s, const GradedComplex<S>& c, double tol) {
    DKReport r;
    for (const auto& cell : cells_of(s.n)) {
        const Element<S>& lab = s.at(cell);
        if (static_cast<int>(lab.size()) != c.dim(1 - static_cast<int>(cell.size())))
            throw ValidationError("label of cell (" + cell_key(cell) + ") has wrong size");
    }
    for (const auto& cell : cells_of(s.n)) {
        if (cell.size() < 2) continue;
        double res = max_magnitude(dk_cell_defect(s, c, cell));
        r.cells.push_back({cell, res});
        r.max_residual = std::max(r.max_residual, res);
        if (!(res <= tol)) r.pass = false;
    }
    return r;
}

template <class S>
DKSimplex<S> dk_face(int j, const DKSimplex<S>& s) {
    if (s.n < 1 || j < 0 || j > s.n) throw ValidationError("face index out of range");
    DKSimplex<S> out{s.n - 1, {}};
    for (const auto& cell : cells_of(s.n - 1)) {
        Cell src = cell;
        for (auto& i : src) i = i < j ? i : i + 1;
        out.labels[cell] = s.at(src);
    }
    return out;
}

/// Needs the complex for the zero labels on cells that repeat j.
template <class S>
DKSimplex<S> dk_degeneracy(int j, const DKSimplex<S>& s, const GradedComplex<S>& c) {
    if (j < 0 || j > s.n) throw ValidationError("degeneracy index out of range");
    DKSimplex<S> out{s.n + 1, {}};
    for (const auto& cell : cells_of(s.n + 1)) {
        const bool both = std::find(cell.begin(), cell.end(), j) != cell.end() &&
                          std::find(cell.begin(), cell.end(), j + 1) != cell.end();
        if (both) {
            out.labels[cell] = c.zero(1 - static_cast<int>(cell.size()));
            continue;
        }
        Cell src = cell;
        for (auto& i : src) i = i <= j ? i : i - 1;
        out.labels[cell] = s.at(src);
    }
    return out;
}

/// Fill labels on cells missing vertex 0 from the free labels on cells containing it.
template <class S>
DKSimplex<S> dk_cone_extension(int n, const GradedComplex<S>& c, const std::map<Cell, Element<S>>& cone) {
    DKSimplex<S> s{n, {}};
    for (const auto& cell : cells_of(n)) {
        if (cell[0] != 0) continue;
        auto it = cone.find(cell);
        s.labels[cell] = it == cone.end() ? c.zero(1 - static_cast<int>(cell.size())) : it->second;
    }
    for (const auto& cell : cells_of(n)) {
        if (cell[0] == 0) continue;
        Cell top = cell;
        top.insert(top.begin(), 0);
        Element<S> v = c.d(-static_cast<int>(cell.size()), s.at(top));
        for (std::size_t t = 0; t < cell.size(); ++t) {
            Cell f = top;
            f.erase(f.begin() + 1 + t);
            axpy(v, S(t % 2 ? -1 : 1), s.at(f));
        }
        s.labels[cell] = std::move(v);
    }
    return s;
}

/// Names of the face/degeneracy identities that fail on s, with exact comparison.
template <class S>
std::vector<std::string> simplicial_identity_failures(const DKSimplex<S>& s, const GradedComplex<S>& c) {
    std::vector<std::string> out;
    const int n = s.n;
    auto note = [&](bool ok, const std::string& what) {
        if (!ok) out.push_back(what);
    };
    for (int j = 0; j <= n; ++j) {
        const auto sj = dk_degeneracy(j, s, c);
        const auto tag = " j=" + std::to_string(j);
        note(dk_face(j, sj) == s && dk_face(j + 1, sj) == s, "d_j s_j = d_{j+1} s_j = id" + tag);
        for (int i = 0; i < j; ++i) {
            note(dk_face(i, dk_face(j, s)) == dk_face(j - 1, dk_face(i, s)), "d_i d_j = d_{j-1} d_i" + tag);
            note(dk_face(i, sj) == dk_degeneracy(j - 1, dk_face(i, s), c), "d_i s_j = s_{j-1} d_i" + tag);
        }
        for (int i = j + 2; i <= n + 1; ++i)
            note(dk_face(i, sj) == dk_degeneracy(j, dk_face(i - 1, s), c), "d_i s_j = s_j d_{i-1}" + tag);
        for (int i = 0; i <= j; ++i)
            note(dk_degeneracy(i, sj, c) == dk_degeneracy(j + 1, dk_degeneracy(i, s, c), c),
                 "s_i s_j = s_{j+1} s_i" + tag);
    }
    return out;
}

/// Q^2 -> Q^3 -> Q^2 in degrees -2..0 with d^2 = 0 by construction, small random rational entries.
inline GradedComplex<Rational> random_exact_complex(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-6, 6), den(1, 4);
    auto q = [&] { return Rational(num(rng), den(rng)); };
    Rational a[2][2] = {{q(), q()}, {q(), q()}};
    Rational w[2] = {q(), q()}, r[2] = {q(), q()};
    DenseMatrix<Rational> dm1(2, std::vector<Rational>(3));
    for (int i = 0; i < 2; ++i) dm1[i] = {a[i][0], a[i][1], a[i][0] * w[0] + a[i][1] * w[1]};
    const Rational v[3] = {w[0], w[1], Rational(-1)};
    DenseMatrix<Rational> dm2(3, std::vector<Rational>(2));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) dm2[i][j] = v[i] * r[j];
    return GradedComplex<Rational>::from_matrices({{-2, 2}, {-1, 3}, {0, 2}}, {{-2, dm2}, {-1, dm1}});
}

/// Valid n-simplex from random labels on the cells through vertex 0.
inline DKSimplex<Rational> random_cone_simplex(std::mt19937_64& rng, int n, const GradedComplex<Rational>& c) {
    std::uniform_int_distribution<int> num(-6, 6), den(1, 4);
    std::map<Cell, Element<Rational>> cone;
    for (const auto& cell : cells_of(n)) {
        if (cell[0] != 0) continue;
        Element<Rational> e(c.dim(1 - static_cast<int>(cell.size())));
        for (auto& x : e) x = Rational(num(rng), den(rng));
        cone[cell] = std::move(e);
    }
    return dk_cone_extension(n, c, cone);
}

// ---------------------------------------------------------------- serialization

inline nlohmann::json scalar_to_json(const Rational& q) {
    return {{"num", numerator_of(q).str()}, {"den", denominator_of(q).str()}};
}
inline nlohmann::json scalar_to_json(const std::complex<double>& c) { return nlohmann::json::array({c.real(), c.imag()}); }

template <class S>
S scalar_from_json(const nlohmann::json& j) {
    if constexpr (is_exact_v<S>) {
        if (!j.is_object() || !j.contains("num") || !j.contains("den"))
            throw ValidationError("rational must be {num, den}");
        return parse_rational(j.at("num").get<std::string>(), j.at("den").get<std::string>());
    } else {
        if (!j.is_array() || j.size() != 2) throw ValidationError("complex number must be [re, im]");
        return {j[0].get<double>(), j[1].get<double>()};
    }
}

template <class S>
nlohmann::json to_json(const DKSimplex<S>& s) {
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [cell, v] : s.labels) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& x : v) a.push_back(scalar_to_json(x));
        labels[cell_key(cell)] = a;
    }
    return {{"dim", s.n}, {"labels", labels}};
}

template <class S>
DKSimplex<S> dk_simplex_from_json(const nlohmann::json& j) {
    DKSimplex<S> s{j.at("dim").get<int>(), {}};
    for (const auto& [key, arr] : j.at("labels").items()) {
        Element<S> v;
        for (const auto& x : arr) v.push_back(scalar_from_json<S>(x));
        s.labels[parse_cell_key(key)] = std::move(v);
    }
    return s;
}

// ---------------------------------------------------------------- double complexes

using Bidegree = std::pair<int, int>;

/// Horizontal delta raises the first degree, vertical d the second; the two commute.
template <class S>
struct DoubleComplex {
    using Map = std::function<Element<S>(Bidegree, const Element<S>&)>;
    std::map<Bidegree, int> dims;
    Map delta;
    Map d;
    double tol = 1e-10;

    int dim(Bidegree b) const {
        auto it = dims.find(b);
        return it == dims.end() ? 0 : it->second;
    }
    Element<S> apply_delta(Bidegree b, const Element<S>& x) const {
        Bidegree t{b.first + 1, b.second};
        if (!delta || dim(t) == 0 || dim(b) == 0) return Element<S>(dim(t), S(0));
        return delta(b, x);
    }
    Element<S> apply_d(Bidegree b, const Element<S>& x) const {
        Bidegree t{b.first, b.second + 1};
        if (!d || dim(t) == 0 || dim(b) == 0) return Element<S>(dim(t), S(0));
        return d(b, x);
    }

    /// max over basis vectors of |delta^2|, |d^2|, |delta d - d delta|
    double residual() const {
        double r = 0;
        for (const auto& [b, n] : dims)
            for (int i = 0; i < n; ++i) {
                Element<S> e(n, S(0));
                e[i] = S(1);
                auto [p, q] = b;
                r = std::max(r, max_magnitude(apply_delta({p + 1, q}, apply_delta(b, e))));
                r = std::max(r, max_magnitude(apply_d({p, q + 1}, apply_d(b, e))));
                auto x = apply_d({p + 1, q}, apply_delta(b, e));
                auto y = apply_delta({p, q + 1}, apply_d(b, e));
                for (std::size_t k = 0; k < x.size(); ++k) x[k] -= y[k];
                r = std::max(r, max_magnitude(x));
            }
        return r;
    }
};

/// Total degree t collects bidegrees (p, t - p) in increasing p; D = delta + (-1)^p d.
template <class S>
GradedComplex<S> total_complex(const DoubleComplex<S>& dc) {
    std::map<int, std::vector<std::pair<Bidegree, int>>> blocks;
    std::map<int, int> dims;
    for (const auto& [b, n] : dc.dims) {
        if (n == 0) continue;
        const int t = b.first + b.second;
        blocks[t].push_back({b, dims[t]});
        dims[t] += n;
    }
    auto offset_in = [blocks](int t, Bidegree b) -> int {
        auto it = blocks.find(t);
        if (it == blocks.end()) return -1;
        for (const auto& [bb, off] : it->second)
            if (bb == b) return off;
        return -1;
    };
    auto d = [dc, blocks, dims, offset_in](int t, const Element<S>& x) {
        auto tgt = dims.find(t + 1);
        Element<S> y(tgt == dims.end() ? 0 : tgt->second, S(0));
        for (const auto& [b, off] : blocks.at(t)) {
            const int n = dc.dim(b);
            Element<S> part(x.begin() + off, x.begin() + off + n);
            auto [p, q] = b;
            if (int o = offset_in(t + 1, {p + 1, q}); o >= 0) {
                auto v = dc.apply_delta(b, part);
                for (std::size_t k = 0; k < v.size(); ++k) y[o + k] += v[k];
            }
            if (int o = offset_in(t + 1, {p, q + 1}); o >= 0) {
                auto v = dc.apply_d(b, part);
                const S sign(p % 2 ? -1 : 1);
                for (std::size_t k = 0; k < v.size(); ++k) y[o + k] += sign * v[k];
            }
        }
        return y;
    };
    return GradedComplex<S>(dims, d, dc.tol);
}

}  // namespace cocycle
