#pragma once

#include "cocycle/chart_cocycle.hpp"

#include <memory>
#include <mutex>
#include <set>

namespace cocycle {

/// Letters are +(g+1) for generator g and -(g+1) for its inverse; the empty word is the identity.
using Word = std::vector<int>;

inline Word concat(const Word& a, const Word& b) {
    Word w = a;
    w.insert(w.end(), b.begin(), b.end());
    return w;
}

/// A cell of the Cech/group nerve: indices i_0..i_m and group elements g_1..g_q.
struct Key {
    std::vector<int> idx;
    std::vector<Word> words;

    int cech_degree() const { return static_cast<int>(idx.size()) - 1; }
    int group_degree() const { return static_cast<int>(words.size()); }
    int total_degree() const { return cech_degree() + group_degree(); }

    friend auto operator<=>(const Key&, const Key&) = default;
};

/// rho(pullback)^* of the base value at src.
struct Atom {
    Key src;
    Word pullback;

    friend auto operator<=>(const Atom&, const Atom&) = default;
};

using FormalSum = std::map<Atom, long>;

inline void add_term(FormalSum& s, const Atom& a, long c) {
    if (c == 0) return;
    auto& slot = s[a];
    slot += c;
    if (slot == 0) s.erase(a);
}

inline void add_term(FormalSum& s, const FormalSum& t, long c, const Word& pullback = {}) {
    for (const auto& [a, v] : t) add_term(s, Atom{a.src, concat(a.pullback, pullback)}, c * v);
}

struct Generator {
    std::string name;
    HoloMap forward;
    HoloMap inverse;
    std::vector<int> index_image;  // i -> i.g
};

/// Right action on indices, rho(g) : U_{i.g} -> U_i, rho(gh) = rho(g) o rho(h).
class GroupAction {
public:
    GroupAction(int n, int num_indices, std::vector<Generator> gens)
        : n_(n), num_indices_(num_indices), gens_(std::move(gens)), cache_(std::make_shared<Cache>()) {
        for (const auto& g : gens_) {
            if (g.forward.dim() != n || g.inverse.dim() != n)
                throw ValidationError("generator '" + g.name + "' has wrong dimension");
            std::vector<int> seen(num_indices, 0);
            if (static_cast<int>(g.index_image.size()) != num_indices)
                throw ValidationError("generator '" + g.name + "' index action has wrong length");
            for (int j : g.index_image) {
                if (j < 0 || j >= num_indices || seen[j]++)
                    throw ValidationError("generator '" + g.name + "' index action is not a permutation");
            }
        }
    }

    static GroupAction trivial(int n, int num_indices) { return GroupAction(n, num_indices, {}); }

    int dim() const { return n_; }
    int num_indices() const { return num_indices_; }
    int num_generators() const { return static_cast<int>(gens_.size()); }
    const Generator& generator(int g) const { return gens_.at(g); }

    void check_letter(int l) const {
        if (l == 0 || std::abs(l) > num_generators())
            throw ValidationError("word letter " + std::to_string(l) + " is not a supplied generator");
    }

    int act(int i, int letter) const {
        check_letter(letter);
        const auto& img = gens_[std::abs(letter) - 1].index_image;
        if (letter > 0) return img.at(i);
        return static_cast<int>(std::find(img.begin(), img.end(), i) - img.begin());
    }
    int act(int i, const Word& w) const {
        for (int l : w) i = act(i, l);
        return i;
    }
    std::vector<int> act(std::vector<int> idx, const Word& w) const {
        for (auto& i : idx) i = act(i, w);
        return idx;
    }

    HoloMap letter_map(int l) const {
        check_letter(l);
        const auto& g = gens_[std::abs(l) - 1];
        return l > 0 ? g.forward : g.inverse;
    }

    /// rho(l_1) o ... o rho(l_r), memoized.
    HoloMap rho(const Word& w) const {
        {
            std::lock_guard lock(cache_->mutex);
            auto it = cache_->maps.find(w);
            if (it != cache_->maps.end()) return it->second;
        }
        HoloMap m = HoloMap::identity(n_);
        for (auto it = w.rbegin(); it != w.rend(); ++it) m = it == w.rbegin() ? letter_map(*it) : compose(letter_map(*it), m);
        m = m.renamed(word_name(w));
        std::lock_guard lock(cache_->mutex);
        return cache_->maps.emplace(w, m).first->second;
    }

    std::string word_name(const Word& w) const {
        if (w.empty()) return "e";
        std::string s;
        for (std::size_t i = 0; i < w.size(); ++i) {
            check_letter(w[i]);
            s += (i ? "*" : "") + gens_[std::abs(w[i]) - 1].name + (w[i] < 0 ? "^-1" : "");
        }
        return s;
    }

    /// "g*h^-1", or "e" for the identity.
    Word parse_word(const std::string& text) const {
        Word w;
        if (text == "e" || text.empty()) return w;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto next = text.find('*', pos);
            if (next == std::string::npos) next = text.size();
            std::string tok = text.substr(pos, next - pos);
            bool inv = tok.size() > 3 && tok.substr(tok.size() - 3) == "^-1";
            if (inv) tok.resize(tok.size() - 3);
            int found = -1;
            for (int g = 0; g < num_generators(); ++g)
                if (gens_[g].name == tok) found = g;
            if (found < 0) throw ValidationError("undefined generator '" + tok + "'");
            w.push_back(inv ? -(found + 1) : found + 1);
            pos = next + 1;
        }
        return w;
    }

    /// Every generator and inverse as a one-letter word.
    std::vector<Word> letters() const {
        std::vector<Word> out;
        for (int g = 1; g <= num_generators(); ++g) {
            out.push_back({g});
            out.push_back({-g});
        }
        return out;
    }

private:
    struct Cache {
        std::mutex mutex;
        std::map<Word, HoloMap> maps;
    };
    int n_ = 0;
    int num_indices_ = 0;
    std::vector<Generator> gens_;
    std::shared_ptr<Cache> cache_;
};

/// Global sample list with per-index member ids; intersections are set intersections.
struct Cover {
    int n = 0;
    std::vector<Point> points;
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::function<bool(const Point&)>> predicates;  // optional per index

    int size() const { return static_cast<int>(members.size()); }

    static Cover single(std::vector<Point> pts) {
        Cover c;
        c.n = pts.empty() ? 0 : static_cast<int>(pts[0].size());
        std::vector<std::size_t> all(pts.size());
        std::iota(all.begin(), all.end(), 0);
        c.points = std::move(pts);
        c.members = {all};
        return c;
    }

    std::vector<std::size_t> cloud(const std::vector<int>& idx) const {
        if (idx.empty()) return {};
        std::vector<std::size_t> cur = members.at(idx[0]);
        for (std::size_t k = 1; k < idx.size(); ++k) {
            std::vector<std::size_t> next;
            const auto& other = members.at(idx[k]);
            std::set_intersection(cur.begin(), cur.end(), other.begin(), other.end(), std::back_inserter(next));
            cur = std::move(next);
        }
        return cur;
    }

    std::vector<Point> cloud_points(const std::vector<int>& idx) const {
        std::vector<Point> out;
        for (auto i : cloud(idx)) out.push_back(points[i]);
        return out;
    }

    void validate() const {
        for (const auto& p : points)
            if (p.size() != n) throw ValidationError("cover point has wrong dimension");
        for (std::size_t i = 0; i < members.size(); ++i) {
            auto m = members[i];
            if (!std::is_sorted(m.begin(), m.end()) || std::adjacent_find(m.begin(), m.end()) != m.end())
                throw ValidationError("cover members of index " + std::to_string(i) + " must be sorted and distinct");
            for (auto id : m) {
                if (id >= points.size()) throw ValidationError("cover member id out of range");
                if (i < predicates.size() && predicates[i] && !predicates[i](points[id]))
                    throw ValidationError("sample " + std::to_string(id) + " violates the region of index " +
                                          std::to_string(i));
            }
        }
    }
};

struct EquivariantCover {
    Cover cover;
    GroupAction action;

    int dim() const { return cover.n; }

    std::vector<std::size_t> cloud(const Key& k) const {
        Word all;
        for (const auto& w : k.words) all = concat(all, w);
        return cover.cloud(action.act(k.idx, all));
    }
    std::vector<Point> cloud_points(const Key& k) const {
        std::vector<Point> out;
        for (auto i : cloud(k)) out.push_back(cover.points[i]);
        return out;
    }

    /// Generators invert on every sample; rho(g) carries the U_{i.g} cloud into the region of U_i.
    void validate(double tol = 1e-10) const {
        cover.validate();
        if (action.dim() != cover.n) throw ValidationError("action and cover differ in dimension");
        if (action.num_indices() != cover.size()) throw ValidationError("action and cover differ in index count");
        for (int g = 0; g < action.num_generators(); ++g) {
            const auto& gen = action.generator(g);
            for (const auto& x : cover.points) {
                double r = std::max((gen.forward(gen.inverse(x)) - x).cwiseAbs().maxCoeff(),
                                    (gen.inverse(gen.forward(x)) - x).cwiseAbs().maxCoeff());
                if (!(r <= tol)) throw ValidationError("generator '" + gen.name + "' does not invert on the samples");
            }
            for (int i = 0; i < cover.size(); ++i) {
                if (i >= static_cast<int>(cover.predicates.size()) || !cover.predicates[i]) continue;
                for (auto id : cover.members[gen.index_image[i]])
                    if (!cover.predicates[i](gen.forward(cover.points[id])))
                        throw ValidationError("generator '" + gen.name + "' leaves the region of index " +
                                              std::to_string(i));
            }
        }
    }

    std::string key_name(const Key& k) const {
        std::string s = "(";
        for (std::size_t i = 0; i < k.idx.size(); ++i) s += (i ? "," : "") + std::to_string(k.idx[i]);
        s += "|";
        for (std::size_t i = 0; i < k.words.size(); ++i) s += (i ? "," : "") + action.word_name(k.words[i]);
        return s + ")";
    }
};

/// One chart and its inverse per cover index.
struct Atlas {
    std::string name;
    std::vector<HoloMap> charts;
    std::vector<HoloMap> inverses;

    void validate(const EquivariantCover& ec, double tol = 1e-10) const {
        if (static_cast<int>(charts.size()) != ec.cover.size() || inverses.size() != charts.size())
            throw ValidationError("atlas '" + name + "' needs one chart and one inverse per index");
        for (int i = 0; i < ec.cover.size(); ++i) {
            if (charts[i].dim() != ec.dim() || inverses[i].dim() != ec.dim())
                throw ValidationError("atlas '" + name + "' chart has wrong dimension");
            for (auto id : ec.cover.members[i]) {
                const Point& x = ec.cover.points[id];
                double r = (inverses[i](charts[i](x)) - x).cwiseAbs().maxCoeff();
                if (!(r <= tol))
                    throw ValidationError("atlas '" + name + "': inverse of chart " + std::to_string(i) +
                                          " fails on sample " + std::to_string(id));
            }
        }
    }
};

// ---------------------------------------------------------------- differentials

using FormalCochain = std::function<FormalSum(const Key&)>;

namespace detail {

inline FormalCochain identity_formal() {
    return [](const Key& k) { return FormalSum{{Atom{k, {}}, 1}}; };
}

inline FormalCochain cech_formal(FormalCochain f) {
    return [f](const Key& k) {
        FormalSum out;
        if (k.idx.size() < 2) return out;
        for (std::size_t j = 0; j < k.idx.size(); ++j) {
            Key face = k;
            face.idx.erase(face.idx.begin() + j);
            add_term(out, f(face), j % 2 ? -1 : 1);
        }
        return out;
    };
}

/// Negated alternating face sum, so that (dc)(g) = rho(g)^* c - c in degree zero.
inline FormalCochain group_formal(FormalCochain f, const GroupAction& action) {
    return [f, action](const Key& k) {
        FormalSum out;
        const int q = k.group_degree();
        if (q < 1) return out;
        for (int j = 0; j <= q; ++j) {
            Key face{k.idx, {}};
            Word pull;
            if (j == 0) {
                face.idx = action.act(k.idx, k.words[0]);
                face.words.assign(k.words.begin() + 1, k.words.end());
            } else if (j < q) {
                for (int t = 0; t < q; ++t) {
                    if (t == j) continue;
                    face.words.push_back(t == j - 1 ? concat(k.words[j - 1], k.words[j]) : k.words[t]);
                }
            } else {
                face.words.assign(k.words.begin(), k.words.end() - 1);
                pull = k.words.back();
            }
            add_term(out, f(face), j % 2 ? 1 : -1, pull);
        }
        return out;
    };
}

inline FormalCochain mixed_formal(FormalCochain f, const GroupAction& action) {
    auto c = cech_formal(f);
    auto g = group_formal(f, action);
    return [c, g](const Key& k) {
        FormalSum out = c(k);
        add_term(out, g(k), k.cech_degree() % 2 ? -1 : 1);
        return out;
    };
}

}  // namespace detail

/// Cochain of sampled k-forms on the Cech/group nerve: formal terms over lazily evaluated base values.
class MixedCochain {
public:
    using Evaluator = std::function<ScalarKForm(const Key&)>;

    MixedCochain(std::shared_ptr<const EquivariantCover> ctx, int form_degree, Evaluator base, std::string name)
        : ctx_(std::move(ctx)), k_(form_degree), base_(std::move(base)), formal_(detail::identity_formal()),
          name_(std::move(name)) {}

    int form_degree() const { return k_; }
    const std::string& name() const { return name_; }
    const EquivariantCover& context() const { return *ctx_; }
    std::shared_ptr<const EquivariantCover> shared_context() const { return ctx_; }

    FormalSum terms(const Key& k) const { return formal_(k); }

    ScalarKForm value(const Key& key) const {
        const int n = ctx_->dim();
        FormalSum t = formal_(key);
        if (t.empty()) return ScalarKForm::zero(n, k_);
        std::map<Key, ScalarKForm> bases;
        for (const auto& [a, c] : t)
            if (!bases.count(a.src)) bases.emplace(a.src, base_(a.src));
        std::vector<std::pair<ScalarKForm, double>> parts;
        for (const auto& [a, c] : t) {
            const auto& f = bases.at(a.src);
            parts.push_back({a.pullback.empty() ? f : pullback_kform(ctx_->action.rho(a.pullback), f), double(c)});
        }
        const auto size = static_cast<Eigen::Index>(k_subsets(n, k_).size());
        return {n, k_,
                [parts, size](const Point& z) {
                    Vector acc = Vector::Zero(size);
                    for (const auto& [f, c] : parts) acc += c * f(z);
                    return acc;
                },
                name_ + ctx_->key_name(key)};
    }

    /// Values on the cloud of the key, concatenated per point.
    Element<Sampled> sampled(const Key& key) const { return sample_form(value(key), ctx_->cloud_points(key)); }

    /// Same values, with the formal structure hidden behind the evaluator.
    MixedCochain materialized() const {
        MixedCochain self = *this;
        return MixedCochain(ctx_, k_, [self](const Key& k) { return self.value(k); }, name_);
    }

    friend MixedCochain cech_differential(const MixedCochain& c) {
        MixedCochain r = c;
        r.formal_ = detail::cech_formal(c.formal_);
        r.name_ = "delta " + c.name_;
        return r;
    }
    friend MixedCochain group_differential(const MixedCochain& c) {
        MixedCochain r = c;
        r.formal_ = detail::group_formal(c.formal_, c.ctx_->action);
        r.name_ = "dG " + c.name_;
        return r;
    }
    /// delta + (-1)^m d_G on the total complex.
    friend MixedCochain mixed_differential(const MixedCochain& c) {
        MixedCochain r = c;
        r.formal_ = detail::mixed_formal(c.formal_, c.ctx_->action);
        r.name_ = "D " + c.name_;
        return r;
    }

private:
    std::shared_ptr<const EquivariantCover> ctx_;
    int k_ = 0;
    Evaluator base_;
    FormalCochain formal_;
    std::string name_;
};

/// Ordered index tuples (repeats allowed) times tuples drawn from words, keeping nonempty clouds.
inline std::vector<Key> enumerate_keys(const EquivariantCover& ec, int m, int q, const std::vector<Word>& words) {
    std::vector<Key> out;
    if (m < 0 || q < 0) return out;
    const int nidx = ec.cover.size();
    std::vector<int> idx(m + 1, 0);
    std::vector<std::size_t> wsel(q, 0);
    if (q > 0 && words.empty()) return out;
    for (;;) {
        for (;;) {
            Key k{idx, {}};
            for (auto s : wsel) k.words.push_back(words[s]);
            if (!ec.cloud(k).empty()) out.push_back(std::move(k));
            int t = q - 1;
            while (t >= 0 && wsel[t] + 1 == words.size()) wsel[t--] = 0;
            if (t < 0) break;
            ++wsel[t];
        }
        int t = m;
        while (t >= 0 && idx[t] + 1 == nidx) idx[t--] = 0;
        if (t < 0) break;
        ++idx[t];
    }
    return out;
}

inline std::vector<Key> enumerate_total(const EquivariantCover& ec, int total, const std::vector<Word>& words) {
    std::vector<Key> out;
    for (int m = total; m >= 0; --m) {
        auto part = enumerate_keys(ec, m, total - m, words);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

struct KeyResidual {
    std::string key;
    int cech_degree = 0;
    int group_degree = 0;
    std::size_t points = 0;
    double residual = 0;
};

struct ResidualReport {
    bool pass = true;
    double tol = 0;
    double max_residual = 0;
    std::string worst_key;
    std::vector<KeyResidual> keys;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const {
        nlohmann::json j = {{"pass", pass},         {"tol", tol},   {"max_residual", max_residual},
                            {"worst_key", worst_key}, {"warnings", warnings}, {"keys", nlohmann::json::array()}};
        for (const auto& k : keys)
            j["keys"].push_back({{"key", k.key},
                                 {"bidegree", {k.cech_degree, k.group_degree}},
                                 {"points", k.points},
                                 {"residual", k.residual}});
        return j;
    }
};

/// max over keys and cloud points of |a - b| (b optional).
inline ResidualReport compare_cochains(const MixedCochain& a, const MixedCochain* b, const std::vector<Key>& keys,
                                       double tol) {
    ResidualReport r;
    r.tol = tol;
    const auto& ec = a.context();
    auto per_key = parallel_map<KeyResidual>(keys.size(), [&](std::size_t i) {
        const Key& k = keys[i];
        auto pts = ec.cloud_points(k);
        auto va = a.value(k);
        std::optional<ScalarKForm> vb;
        if (b) vb = b->value(k);
        double res = 0;
        for (const auto& p : pts) {
            Vector d = va(p);
            if (vb) d -= (*vb)(p);
            double m = max_abs(d);
            res = std::max(res, std::isfinite(m) ? m : std::numeric_limits<double>::infinity());
        }
        return KeyResidual{ec.key_name(k), k.cech_degree(), k.group_degree(), pts.size(), res};
    });
    for (auto& k : per_key) {
        if (k.points < kMinSamples)
            r.warnings.push_back(k.key + ": only " + std::to_string(k.points) + " sample points");
        if (r.worst_key.empty() || k.residual > r.max_residual) {
            r.max_residual = k.residual;
            r.worst_key = k.key;
        }
    }
    r.keys = std::move(per_key);
    r.pass = r.max_residual <= tol;
    return r;
}

inline ResidualReport check_vanishes(const MixedCochain& c, const std::vector<Key>& keys, double tol) {
    return compare_cochains(c, nullptr, keys, tol);
}

/// Largest |coefficient| and whether every sampled coefficient is +0.0 in both parts.
struct ZeroScan {
    bool bitwise_zero = true;
    double max_abs = 0;
};

inline ZeroScan scan_zero(const MixedCochain& c, const std::vector<Key>& keys) {
    ZeroScan s;
    for (const auto& k : keys)
        for (const auto& v : c.sampled(k)) {
            s.max_abs = std::max(s.max_abs, std::abs(v));
            if (v.real() != 0 || v.imag() != 0 || std::signbit(v.real()) || std::signbit(v.imag()))
                s.bitwise_zero = false;
        }
    return s;
}

// ---------------------------------------------------------------- tau and witness

namespace detail {

/// Monotone lattice paths (0,0) -> (m,q); true marks a Cech step.
inline std::vector<std::vector<bool>> shuffle_paths(int m, int q) {
    std::vector<std::vector<bool>> out;
    std::vector<bool> steps(m + q, false);
    std::fill(steps.begin(), steps.begin() + m, true);
    std::sort(steps.begin(), steps.end());
    do out.push_back(steps);
    while (std::next_permutation(steps.begin(), steps.end()));
    return out;
}

/// (-1)^(number of Cech steps preceded by group steps, counted pairwise) times (-1)^q.
inline int shuffle_sign(const std::vector<bool>& path) {
    long inv = 0, q = 0, groups_seen = 0;
    for (bool cech : path) {
        if (cech)
            inv += groups_seen;
        else {
            ++groups_seen;
            ++q;
        }
    }
    return ((inv + q) % 2) ? -1 : 1;
}

struct GridVertex {
    int a = 0;      // Cech position
    int b = 0;      // group position
    int atlas = 0;  // which atlas supplies the chart
};

inline Word word_range(const Key& k, int from, int to) {
    Word w;
    for (int t = from; t < to; ++t) w = concat(w, k.words[t]);
    return w;
}

/// Chart simplex on the cloud of k whose vertex (a, b) carries chart_{i_a.(g_1..g_b)} o rho(g_{b+1}..g_q).
inline ChartSimplex grid_simplex(const EquivariantCover& ec, const std::vector<const Atlas*>& atlases, const Key& k,
                                 const std::vector<GridVertex>& verts) {
    const int q = k.group_degree();
    std::vector<int> chart_index;
    for (const auto& v : verts) chart_index.push_back(ec.action.act(k.idx[v.a], word_range(k, 0, v.b)));
    std::vector<HoloMap> charts;
    std::map<std::pair<int, int>, HoloMap> tr;
    for (std::size_t s = 0; s < verts.size(); ++s) {
        const auto& vs = verts[s];
        const HoloMap& phi = atlases[vs.atlas]->charts.at(chart_index[s]);
        Word tail = word_range(k, vs.b, q);
        charts.push_back(tail.empty() ? phi : compose(phi, ec.action.rho(tail)));
        for (std::size_t t = s + 1; t < verts.size(); ++t) {
            const auto& vt = verts[t];
            const HoloMap& inv = atlases[vt.atlas]->inverses.at(chart_index[t]);
            Word mid = word_range(k, vs.b, vt.b);
            HoloMap m = mid.empty() ? inv : compose(ec.action.rho(mid), inv);
            tr[{int(s), int(t)}] = compose(phi, m);
        }
    }
    return ChartSimplex(std::move(charts), std::move(tr), {});
}

inline std::vector<GridVertex> path_vertices(const std::vector<bool>& path) {
    std::vector<GridVertex> v{{0, 0, 0}};
    for (bool cech : path) v.push_back({v.back().a + (cech ? 1 : 0), v.back().b + (cech ? 0 : 1), 0});
    return v;
}

inline ScalarKForm signed_sum(int n, int k, std::vector<std::pair<ScalarKForm, double>> parts, std::string name) {
    const auto size = static_cast<Eigen::Index>(k_subsets(n, k).size());
    return {n, k,
            [parts = std::move(parts), size](const Point& z) {
                Vector acc = Vector::Zero(size);
                for (const auto& [f, c] : parts) acc += c * f(z);
                return acc;
            },
            std::move(name)};
}

}  // namespace detail

/// The Chern-Weil cochain of an atlas in total degree arity(T).
inline MixedCochain tau_invariant(std::shared_ptr<const EquivariantCover> ec, const Atlas& atlas,
                                  const InvariantMap& t) {
    atlas.validate(*ec);
    const int n = ec->dim();
    return MixedCochain(
        ec, t.arity,
        [ec, atlas, t, n](const Key& k) {
            if (k.total_degree() != t.arity)
                throw ValidationError("tau lives in total degree " + std::to_string(t.arity));
            std::vector<std::pair<ScalarKForm, double>> parts;
            for (const auto& path : detail::shuffle_paths(k.cech_degree(), k.group_degree())) {
                auto s = detail::grid_simplex(*ec, {&atlas}, k, detail::path_vertices(path));
                parts.push_back({cf_label_top(s, t), double(detail::shuffle_sign(path))});
            }
            return detail::signed_sum(n, t.arity, std::move(parts), "tau");
        },
        "tau[" + atlas.name + "]");
}

/// Prism over the shuffle paths, interleaving the two atlases; D(witness) = tau(first) - tau(second).
inline MixedCochain cohomologous_witness(std::shared_ptr<const EquivariantCover> ec, const Atlas& first,
                                         const Atlas& second, const InvariantMap& t) {
    first.validate(*ec);
    second.validate(*ec);
    const int n = ec->dim();
    return MixedCochain(
        ec, t.arity,
        [ec, first, second, t, n](const Key& k) {
            if (k.total_degree() != t.arity - 1)
                throw ValidationError("witness lives in total degree " + std::to_string(t.arity - 1));
            std::vector<std::pair<ScalarKForm, double>> parts;
            for (const auto& path : detail::shuffle_paths(k.cech_degree(), k.group_degree())) {
                auto base = detail::path_vertices(path);
                for (std::size_t r = 0; r < base.size(); ++r) {
                    std::vector<detail::GridVertex> verts(base.begin(), base.begin() + r + 1);
                    for (std::size_t s = r; s < base.size(); ++s) verts.push_back({base[s].a, base[s].b, 1});
                    auto simplex = detail::grid_simplex(*ec, {&first, &second}, k, verts);
                    const double sign = -double(detail::shuffle_sign(path)) * (r % 2 ? -1.0 : 1.0);
                    parts.push_back({cf_label_top(simplex, t), sign});
                }
            }
            return detail::signed_sum(n, t.arity, std::move(parts), "witness");
        },
        "witness[" + first.name + "," + second.name + "]");
}

/// tau(first) - tau(second) as one cochain.
inline MixedCochain difference(const MixedCochain& a, const MixedCochain& b) {
    const int n = a.context().dim();
    const int k = a.form_degree();
    return MixedCochain(
        a.shared_context(), k,
        [a, b, n, k](const Key& key) {
            return detail::signed_sum(n, k, {{a.value(key), 1.0}, {b.value(key), -1.0}}, "difference");
        },
        a.name() + " - " + b.name());
}

}  // namespace cocycle
