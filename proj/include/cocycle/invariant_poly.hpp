#pragma once

#include "cocycle/rational.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <functional>
#include <mutex>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cocycle {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Integer partition with nonincreasing positive parts.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<int> parts) : parts_(std::move(parts)) {
        std::sort(parts_.begin(), parts_.end(), std::greater<>());
        if (!parts_.empty() && parts_.back() < 1) throw ValidationError("partition parts must be >= 1");
    }

    const std::vector<int>& parts() const { return parts_; }
    int weight() const { return std::accumulate(parts_.begin(), parts_.end(), 0); }
    std::size_t length() const { return parts_.size(); }

    friend bool operator==(const Partition&, const Partition&) = default;
    friend bool operator<(const Partition& a, const Partition& b) {
        // [1,1] sorts before [2]: compare the increasing readings
        return std::lexicographical_compare(a.parts_.rbegin(), a.parts_.rend(), b.parts_.rbegin(),
                                            b.parts_.rend());
    }

    Partition merged(const Partition& other) const {
        std::vector<int> p = parts_;
        p.insert(p.end(), other.parts_.begin(), other.parts_.end());
        return Partition(std::move(p));
    }

private:
    std::vector<int> parts_;
};

/// Bijection of {1..k}; images are 1-based.
class Permutation {
public:
    explicit Permutation(std::vector<int> images) : images_(std::move(images)) {
        std::vector<bool> seen(images_.size() + 1, false);
        for (int v : images_) {
            if (v < 1 || v > static_cast<int>(images_.size()) || seen[v])
                throw ValidationError("permutation images are not a bijection of {1..k}");
            seen[v] = true;
        }
    }

    static Permutation identity(int k) {
        std::vector<int> im(k);
        std::iota(im.begin(), im.end(), 1);
        return Permutation(std::move(im));
    }

    /// Builds from disjoint cycles; unlisted points are fixed.
    static Permutation from_cycles(int k, const std::vector<std::vector<int>>& cycles) {
        std::vector<int> im(k, 0);
        for (const auto& c : cycles)
            for (std::size_t i = 0; i < c.size(); ++i) {
                int from = c[i];
                if (from < 1 || from > k || im[from - 1] != 0)
                    throw ValidationError("cycles are not disjoint in {1..k}");
                im[from - 1] = c[(i + 1) % c.size()];
            }
        for (int i = 0; i < k; ++i)
            if (im[i] == 0) im[i] = i + 1;
        return Permutation(std::move(im));
    }

    int size() const { return static_cast<int>(images_.size()); }
    int operator()(int i) const { return images_[i - 1]; }
    const std::vector<int>& images() const { return images_; }

    /// Cycles, each starting at its smallest element, ordered by that element.
    std::vector<std::vector<int>> cycles() const {
        std::vector<std::vector<int>> out;
        std::vector<bool> seen(images_.size() + 1, false);
        for (int s = 1; s <= size(); ++s) {
            if (seen[s]) continue;
            std::vector<int> c;
            for (int x = s; !seen[x]; x = (*this)(x)) {
                seen[x] = true;
                c.push_back(x);
            }
            out.push_back(std::move(c));
        }
        return out;
    }

private:
    std::vector<int> images_;
};

inline Partition cycle_type(const Permutation& p) {
    std::vector<int> lens;
    for (const auto& c : p.cycles()) lens.push_back(static_cast<int>(c.size()));
    return Partition(std::move(lens));
}

/// Small dense square matrix over exact rationals.
class RationalMatrix {
public:
    RationalMatrix() = default;
    explicit RationalMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, Rational(0)) {}

    static RationalMatrix identity(int n) {
        RationalMatrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }
    static RationalMatrix diagonal(const std::vector<Rational>& d) {
        RationalMatrix m(static_cast<int>(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    int rows() const { return n_; }
    int cols() const { return n_; }
    Rational& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    const Rational& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

    Rational trace() const {
        Rational t = 0;
        for (int i = 0; i < n_; ++i) t += (*this)(i, i);
        return t;
    }

    friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
        RationalMatrix c(a.n_);
        for (int i = 0; i < a.n_; ++i)
            for (int k = 0; k < a.n_; ++k) {
                if (a(i, k) == 0) continue;
                for (int j = 0; j < a.n_; ++j) c(i, j) += a(i, k) * b(k, j);
            }
        return c;
    }

private:
    int n_ = 0;
    std::vector<Rational> a_;
};

namespace detail {

template <class M>
using scalar_of = std::remove_cvref_t<decltype(std::declval<const M&>().trace())>;

inline void check_square_common(std::span<const Matrix> mats) {
    if (mats.empty()) return;
    const auto n = mats[0].rows();
    for (const auto& m : mats)
        if (m.rows() != n || m.cols() != n) throw ValidationError("matrix dimension mismatch");
}
inline void check_square_common(std::span<const RationalMatrix> mats) {
    if (mats.empty()) return;
    const auto n = mats[0].rows();
    for (const auto& m : mats)
        if (m.rows() != n) throw ValidationError("matrix dimension mismatch");
}

template <class M>
auto trace_of_block(std::span<const M> mats, const std::vector<int>& idx) {
    if constexpr (std::is_same_v<M, Matrix>) {
        Matrix acc = mats[idx[0] - 1];
        for (std::size_t i = 1; i < idx.size(); ++i) acc = acc * mats[idx[i] - 1];
        return acc.trace();
    } else {
        M acc = mats[idx[0] - 1];
        for (std::size_t i = 1; i < idx.size(); ++i) acc = acc * mats[idx[i] - 1];
        return acc.trace();
    }
}

/// Calls f on each permutation of {1..k} (as image vectors) in lexicographic order.
template <class F>
void for_each_permutation(int k, F&& f) {
    std::vector<int> p(k);
    std::iota(p.begin(), p.end(), 1);
    do {
        f(p);
    } while (std::next_permutation(p.begin(), p.end()));
}

/// Calls f on every permutation of {1..k} with the given cycle type.
template <class F>
void for_each_in_class(const Partition& shape, F&& f) {
    const int k = shape.weight();
    std::vector<int> images(k, 0);
    std::vector<bool> used(k + 1, false);
    std::map<int, int> remaining;
    for (int len : shape.parts()) ++remaining[len];
    // the smallest free point opens a cycle of each still-available length
    std::function<void()> place = [&]() {
        int start = 1;
        while (start <= k && used[start]) ++start;
        if (start > k) {
            f(images);
            return;
        }
        for (auto& [len, count] : remaining) {
            if (count == 0) continue;
            --count;
            used[start] = true;
            std::vector<int> cyc{start};
            std::function<void()> extend = [&]() {
                if (static_cast<int>(cyc.size()) == len) {
                    for (std::size_t i = 0; i < cyc.size(); ++i) images[cyc[i] - 1] = cyc[(i + 1) % cyc.size()];
                    place();
                    return;
                }
                for (int x = 1; x <= k; ++x) {
                    if (used[x]) continue;
                    used[x] = true;
                    cyc.push_back(x);
                    extend();
                    cyc.pop_back();
                    used[x] = false;
                }
            };
            extend();
            used[start] = false;
            ++count;
        }
    };
    place();
}

}  // namespace detail

/// Product over the cycles of p of the trace of the ordered product of the inputs in that cycle.
template <class M>
auto eval_T_sigma(const Permutation& p, std::span<const M> mats) {
    if (static_cast<int>(mats.size()) != p.size()) throw ValidationError("T_sigma: arity mismatch");
    detail::check_square_common(mats);
    using S = detail::scalar_of<M>;
    S acc(1);
    for (const auto& c : p.cycles()) acc *= detail::trace_of_block(mats, c);
    return acc;
}

/// Exact-rational combination of symmetrized multi-trace maps, keyed by cycle shape.
struct InvariantMap {
    int arity = 0;
    std::map<Partition, Rational> terms;

    void add(const Partition& shape, const Rational& c) {
        if (shape.weight() != arity) throw ValidationError("partition weight differs from arity");
        auto& slot = terms[shape];
        slot += c;
        if (slot == 0) terms.erase(shape);
    }
};

inline InvariantMap symmetrize(const Permutation& p) {
    InvariantMap t{p.size(), {}};
    t.add(cycle_type(p), 1);
    return t;
}

/// Symmetrized multi-trace of a given cycle shape: full S_k average for k <= 8, conjugacy-class average above.
template <class M>
auto eval_symmetrized(const Partition& shape, std::span<const M> mats) {
    using S = detail::scalar_of<M>;
    const int k = shape.weight();
    if (static_cast<int>(mats.size()) != k) throw ValidationError("symmetrized trace: arity mismatch");
    detail::check_square_common(mats);
    S sum(0);
    long count = 0;
    if (k <= 8) {
        // average over tau of the block products along the reading tau(1),...,tau(k)
        detail::for_each_permutation(k, [&](const std::vector<int>& tau) {
            S term(1);
            std::size_t pos = 0;
            for (int len : shape.parts()) {
                std::vector<int> block(tau.begin() + pos, tau.begin() + pos + len);
                term *= detail::trace_of_block(mats, block);
                pos += len;
            }
            sum += term;
            ++count;
        });
    } else {
        detail::for_each_in_class(shape, [&](const std::vector<int>& images) {
            sum += eval_T_sigma(Permutation(images), mats);
            ++count;
        });
    }
    if constexpr (std::is_same_v<S, Rational>)
        return S(sum / count);
    else
        return S(sum / static_cast<double>(count));
}

template <class M>
auto eval_invariant(const InvariantMap& t, std::span<const M> mats) {
    using S = detail::scalar_of<M>;
    if (static_cast<int>(mats.size()) != t.arity) throw ValidationError("invariant map: arity mismatch");
    S total(0);
    for (const auto& [shape, c] : t.terms) {
        if constexpr (std::is_same_v<S, Rational>)
            total += c * eval_symmetrized(shape, mats);
        else
            total += to_double(c) * eval_symmetrized(shape, mats);
    }
    return total;
}

inline std::complex<double> eval_invariant(const InvariantMap& t, const std::vector<Matrix>& mats) {
    return eval_invariant(t, std::span<const Matrix>(mats));
}

enum class Basis { PowerSum, Elementary };

inline std::string basis_name(Basis b) { return b == Basis::PowerSum ? "power-sum" : "elementary"; }
inline char basis_letter(Basis b) { return b == Basis::PowerSum ? 'T' : 'S'; }

/// Symmetric function in the power-sum (T_j) or elementary (S_j) basis with exact coefficients.
/// A monomial T_{p1}...T_{pr} is keyed by the partition [p1..pr]; rank_term multiplies the rank n.
struct SymFun {
    Basis basis = Basis::PowerSum;
    std::map<Partition, Rational> terms;
    Rational rank_term{0};

    static SymFun generator(Basis b, int j) {
        SymFun f{b, {}, 0};
        f.terms[Partition({j})] = 1;
        return f;
    }
    static SymFun constant(Basis b, const Rational& c) {
        SymFun f{b, {}, 0};
        if (c != 0) f.terms[Partition()] = c;
        return f;
    }

    void add(const Partition& p, const Rational& c) {
        auto& slot = terms[p];
        slot += c;
        if (slot == 0) terms.erase(p);
    }

    /// Common weight of all terms, or nullopt when inhomogeneous.
    std::optional<int> degree() const {
        std::optional<int> d;
        if (rank_term != 0) d = 0;
        for (const auto& [p, c] : terms) {
            if (d && *d != p.weight()) return std::nullopt;
            d = p.weight();
        }
        return d.value_or(0);
    }
    bool is_homogeneous() const { return degree().has_value(); }

    SymFun homogeneous_part(int k) const {
        SymFun out{basis, {}, k == 0 ? rank_term : Rational(0)};
        for (const auto& [p, c] : terms)
            if (p.weight() == k) out.terms[p] = c;
        return out;
    }

    friend SymFun operator+(SymFun a, const SymFun& b) {
        if (a.basis != b.basis) throw ValidationError("adding symmetric functions in different bases");
        for (const auto& [p, c] : b.terms) a.add(p, c);
        a.rank_term += b.rank_term;
        return a;
    }
    friend SymFun operator*(const Rational& s, SymFun a) {
        if (s == 0) return SymFun{a.basis, {}, 0};
        for (auto& [p, c] : a.terms) c *= s;
        a.rank_term *= s;
        return a;
    }
    friend SymFun operator*(const SymFun& a, const SymFun& b) {
        if (a.basis != b.basis) throw ValidationError("multiplying symmetric functions in different bases");
        if (a.rank_term != 0 || b.rank_term != 0) throw ValidationError("rank marker is not multiplicative");
        SymFun out{a.basis, {}, 0};
        for (const auto& [p, c] : a.terms)
            for (const auto& [q, d] : b.terms) out.add(p.merged(q), c * d);
        return out;
    }
    friend bool operator==(const SymFun&, const SymFun&) = default;
};

namespace detail {

inline const SymFun& one(Basis b) {
    static const SymFun t = SymFun::constant(Basis::PowerSum, 1);
    static const SymFun s = SymFun::constant(Basis::Elementary, 1);
    return b == Basis::PowerSum ? t : s;
}

/// Generator j of `from` written in the other basis, by Newton's identities.
inline SymFun generator_in_other_basis(Basis from, int j) {
    static std::map<std::pair<int, int>, SymFun> cache;  // guarded below
    static std::mutex mu;
    {
        std::lock_guard lock(mu);
        auto it = cache.find({static_cast<int>(from), j});
        if (it != cache.end()) return it->second;
    }
    const Basis to = from == Basis::PowerSum ? Basis::Elementary : Basis::PowerSum;
    SymFun out{to, {}, 0};
    if (from == Basis::PowerSum) {
        // T_j = sum_{i=1}^{j-1} (-1)^{i-1} T_{j-i} S_i + (-1)^{j-1} j S_j
        for (int i = 1; i < j; ++i) {
            Rational sign = (i % 2 == 1) ? 1 : -1;
            out = out + sign * (generator_in_other_basis(from, j - i) * SymFun::generator(to, i));
        }
        out = out + Rational((j % 2 == 1) ? j : -j) * SymFun::generator(to, j);
    } else {
        // S_j = ((-1)^{j+1}/j) sum_{i=0}^{j-1} (-1)^i T_{j-i} S_i
        for (int i = 0; i < j; ++i) {
            Rational sign = (i % 2 == 0) ? 1 : -1;
            SymFun s_i = i == 0 ? one(to) : generator_in_other_basis(from, i);
            out = out + sign * (SymFun::generator(to, j - i) * s_i);
        }
        out = Rational((j % 2 == 1) ? 1 : -1, j) * out;
    }
    std::lock_guard lock(mu);
    cache.emplace(std::pair{static_cast<int>(from), j}, out);
    return out;
}

}  // namespace detail

inline SymFun newton_convert(const SymFun& f, Basis target) {
    if (f.basis == target) return f;
    if (!f.is_homogeneous()) throw ValidationError("basis conversion needs a homogeneous function");
    SymFun out{target, {}, f.rank_term};
    for (const auto& [p, c] : f.terms) {
        SymFun mono = detail::one(target);
        for (int part : p.parts()) mono = mono * detail::generator_in_other_basis(f.basis, part);
        out = out + c * mono;
    }
    return out;
}

/// Coefficients c_0..c_depth of log(t / (1 - e^{-t})).
inline std::vector<Rational> todd_log_series(int depth) {
    // (1 - e^{-t})/t = sum_j (-1)^j t^j/(j+1)!
    std::vector<Rational> g(depth + 1);
    for (int j = 0; j <= depth; ++j) g[j] = Rational(j % 2 == 0 ? 1 : -1) / factorial(j + 1);
    // f = 1/g
    std::vector<Rational> f(depth + 1, Rational(0));
    f[0] = 1;
    for (int m = 1; m <= depth; ++m) {
        Rational s = 0;
        for (int j = 1; j <= m; ++j) s += g[j] * f[m - j];
        f[m] = -s;
    }
    // log f with f(0) = 1: L' = f'/f, i.e. m L_m = m f_m - sum_{j=1}^{m-1} j L_j f_{m-j}
    std::vector<Rational> L(depth + 1, Rational(0));
    for (int m = 1; m <= depth; ++m) {
        Rational s = m * f[m];
        for (int j = 1; j < m; ++j) s -= j * L[j] * f[m - j];
        L[m] = s / m;
    }
    return L;
}

/// Degree-k part of prod_i t_i/(1-e^{-t_i}) in the power-sum basis.
inline SymFun todd_component(int k, int depth = 12) {
    if (k < 1) throw ValidationError("todd degree must be >= 1");
    if (k > depth) throw ValidationError("todd degree exceeds the series depth");
    const auto c = todd_log_series(depth);
    SymFun log_part{Basis::PowerSum, {}, 0};
    for (int m = 1; m <= k; ++m)
        if (c[m] != 0) log_part = log_part + c[m] * SymFun::generator(Basis::PowerSum, m);
    SymFun power = detail::one(Basis::PowerSum);
    SymFun result{Basis::PowerSum, {}, 0};
    for (int j = 1; j <= k; ++j) {
        power = power * log_part;
        // drop terms above degree k
        SymFun trimmed{Basis::PowerSum, {}, 0};
        for (const auto& [p, cf] : power.terms)
            if (p.weight() <= k) trimmed.terms[p] = cf;
        power = trimmed;
        result = result + Rational(1) / factorial(j) * power.homogeneous_part(k);
    }
    return result;
}

/// Degree-k part of sum_i e^{t_i}; degree 0 is the rank marker.
inline SymFun chern_character_component(int k) {
    if (k < 0) throw ValidationError("chern degree must be >= 0");
    if (k == 0) return SymFun{Basis::PowerSum, {}, 1};
    return Rational(1) / factorial(k) * SymFun::generator(Basis::PowerSum, k);
}

inline InvariantMap invariant_from_symfun(const SymFun& f, int k) {
    if (f.basis != Basis::PowerSum) throw ValidationError("invariant map needs the power-sum basis");
    if (f.rank_term != 0) throw ValidationError("the rank marker has no matrix arity");
    auto d = f.degree();
    if (!d || (*d != k && !f.terms.empty())) throw ValidationError("symmetric function is not homogeneous of degree k");
    InvariantMap t{k, {}};
    for (const auto& [p, c] : f.terms) t.add(p, c);
    return t;
}

/// Value on eigenvalues: power sums are sums of powers of the given values.
inline Rational eval_on_eigenvalues(const SymFun& f, const std::vector<Rational>& eig) {
    const SymFun g = newton_convert(f, Basis::PowerSum);
    auto power_sum = [&](int j) {
        Rational s = 0;
        for (const auto& x : eig) {
            Rational p = 1;
            for (int i = 0; i < j; ++i) p *= x;
            s += p;
        }
        return s;
    };
    Rational total = g.rank_term * static_cast<long>(eig.size());
    for (const auto& [p, c] : g.terms) {
        Rational m = c;
        for (int part : p.parts()) m *= power_sum(part);
        total += m;
    }
    return total;
}

// ---------------------------------------------------------------- printing

namespace detail {

inline std::string monomial_text(Basis b, const Partition& p) {
    if (p.length() == 0) return "1";
    std::string out;
    auto parts = p.parts();
    std::reverse(parts.begin(), parts.end());
    for (std::size_t i = 0; i < parts.size();) {
        std::size_t j = i;
        while (j < parts.size() && parts[j] == parts[i]) ++j;
        if (!out.empty()) out += ' ';
        out += basis_letter(b) + std::to_string(parts[i]);
        if (j - i > 1) out += "^" + std::to_string(j - i);
        i = j;
    }
    return out;
}

inline Integer gcd_int(Integer a, Integer b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        Integer t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace detail

/// Human-readable form with the rational content factored out, e.g. "(1/24)(3 T1^2 - T2)".
inline std::string to_string(const SymFun& f) {
    std::vector<std::pair<std::string, Rational>> items;
    if (f.rank_term != 0) items.emplace_back("n", f.rank_term);
    for (const auto& [p, c] : f.terms) items.emplace_back(detail::monomial_text(f.basis, p), c);
    if (items.empty()) return "0";
    Integer g_num = 0, l_den = 1;
    for (const auto& [m, c] : items) {
        g_num = detail::gcd_int(g_num, numerator_of(c));
        Integer d = denominator_of(c);
        l_den = l_den / detail::gcd_int(l_den, d) * d;
    }
    Rational content(g_num, l_den);
    if (items.front().second < 0) content = -content;
    std::string body;
    for (std::size_t i = 0; i < items.size(); ++i) {
        Rational q = items[i].second / content;
        Integer z = numerator_of(q);
        if (i == 0) {
            if (z < 0) body += "-";
        } else {
            body += z < 0 ? " - " : " + ";
        }
        Integer az = z < 0 ? Integer(-z) : z;
        if (az != 1 || items[i].first == "1") body += az.str() + (items[i].first == "1" ? "" : " ");
        if (items[i].first != "1") body += items[i].first;
    }
    if (content == 1) return body;
    std::string prefix = "(" + to_string(content) + ")";
    if (content == -1) prefix = "-";
    return items.size() == 1 ? prefix + (content == -1 ? "" : " ") + body : prefix + "(" + body + ")";
}

// ---------------------------------------------------------------- JSON

inline nlohmann::json terms_to_json(const std::map<Partition, Rational>& terms) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [p, c] : terms)
        arr.push_back({{"partition", p.parts()}, {"num", numerator_of(c).str()}, {"den", denominator_of(c).str()}});
    return arr;
}

inline std::map<Partition, Rational> terms_from_json(const nlohmann::json& arr) {
    std::map<Partition, Rational> terms;
    for (const auto& t : arr) {
        Rational c = parse_rational(t.at("num").get<std::string>(), t.at("den").get<std::string>());
        if (c != 0) terms[Partition(t.at("partition").get<std::vector<int>>())] += c;
    }
    return terms;
}

inline nlohmann::json to_json(const SymFun& f) {
    nlohmann::json j{{"basis", basis_name(f.basis)}, {"terms", terms_to_json(f.terms)}};
    if (f.rank_term != 0)
        j["rank"] = {{"num", numerator_of(f.rank_term).str()}, {"den", denominator_of(f.rank_term).str()}};
    return j;
}

inline SymFun symfun_from_json(const nlohmann::json& j) {
    SymFun f;
    const auto b = j.at("basis").get<std::string>();
    if (b == "power-sum") f.basis = Basis::PowerSum;
    else if (b == "elementary") f.basis = Basis::Elementary;
    else throw ValidationError("unknown basis '" + b + "'");
    f.terms = terms_from_json(j.at("terms"));
    if (j.contains("rank"))
        f.rank_term = parse_rational(j["rank"].at("num").get<std::string>(), j["rank"].at("den").get<std::string>());
    return f;
}

inline nlohmann::json to_json(const InvariantMap& t) {
    return {{"basis", "power-sum"}, {"arity", t.arity}, {"terms", terms_to_json(t.terms)}};
}

inline InvariantMap invariant_from_json(const nlohmann::json& j) {
    InvariantMap t{j.at("arity").get<int>(), {}};
    for (const auto& [p, c] : terms_from_json(j.at("terms"))) t.add(p, c);
    return t;
}

}  // namespace cocycle
