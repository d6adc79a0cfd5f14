#pragma once

#include "cocycle/bm_kernel.hpp"
#include "cocycle/cech_group.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

namespace cocycle {

inline constexpr const char* kToolVersion = "0.1.0";

namespace scn {

using nlohmann::json;

// ---------------------------------------------------------------- value parsing

inline std::string at_path(const std::string& base, const std::string& key) { return base + "/" + key; }
inline std::string at_path(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

inline const json& require(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
    return j.at(key);
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(at_path(where, key) + ": wrong type");
    }
}

inline double positive_tol(const json& j, double fallback, const std::string& where) {
    double t = get_or(j, "tol", fallback, where);
    if (!(t > 0)) throw ValidationError(at_path(where, "tol") + ": tolerance must be positive");
    return t;
}

inline Integer integer_field(const json& v, const std::string& where) {
    if (v.is_string()) return parse_integer(v.get<std::string>());
    if (v.is_number_integer()) return Integer(v.get<long long>());
    throw ValidationError(where + ": expected a decimal string");
}

/// {"num": "3", "den": "10"}
inline Rational rational_from(const json& v, const std::string& where) {
    if (!v.is_object()) throw ValidationError(where + ": rationals are {num, den} objects");
    Integer den = v.contains("den") ? integer_field(v.at("den"), at_path(where, "den")) : Integer(1);
    if (den == 0) throw ValidationError(where + ": zero denominator");
    return make_rational(integer_field(require(v, "num", where), at_path(where, "num")), den);
}

/// [re, im] with rational parts.
inline ComplexRational complex_rational_from(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) throw ValidationError(where + ": complex values are [re, im]");
    return {rational_from(v[0], at_path(where, 0)), rational_from(v[1], at_path(where, 1))};
}

inline std::complex<double> complex_from(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ValidationError(where + ": complex values are [re, im]");
    return {v[0].get<double>(), v[1].get<double>()};
}

inline Point point_from(const json& v, int n, const std::string& where) {
    if (!v.is_array() || static_cast<int>(v.size()) != n)
        throw ValidationError(where + ": expected " + std::to_string(n) + " complex coordinates");
    Point p(n);
    for (int i = 0; i < n; ++i) p(i) = complex_from(v[i], at_path(where, i));
    return p;
}

inline std::string fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) h = (h ^ c) * 1099511628211ull;
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return "fnv1a64:" + os.str();
}

// ---------------------------------------------------------------- scenario

struct CheckOutcome {
    std::string status = "pass";  // pass | fail | error
    double max_residual = 0;
    std::string worst;
    std::string message;
    json details = json::object();
};

struct PreparedCheck {
    std::string name;
    std::string type;
    std::function<CheckOutcome()> run;
};

struct Scenario {
    std::string name;
    std::string hash;
    int n = 0;
    ConstantTable constants;
    std::map<std::string, HoloMap> maps;
    std::vector<Point> points;
    std::shared_ptr<const EquivariantCover> context;
    std::map<std::string, Atlas> atlases;
    std::vector<PreparedCheck> checks;
    std::string output = "cocycle-report.json";

    const HoloMap& map(const std::string& symbol, const std::string& where) const {
        auto it = maps.find(symbol);
        if (it == maps.end()) throw ValidationError(where + ": undefined map '" + symbol + "'");
        return it->second;
    }
    const Atlas& atlas(const std::string& symbol, const std::string& where) const {
        auto it = atlases.find(symbol);
        if (it == atlases.end()) throw ValidationError(where + ": undefined atlas '" + symbol + "'");
        if (!context) throw ValidationError(where + ": atlas checks need a cover");
        return it->second;
    }
    std::shared_ptr<const EquivariantCover> require_context(const std::string& where) const {
        if (!context) throw ValidationError(where + ": this check needs a cover section");
        return context;
    }
};

namespace detail {

inline std::vector<Point> load_samples(const json& j, int n, const std::string& where) {
    std::vector<Point> pts;
    if (j.contains("points")) {
        const auto& arr = j.at("points");
        if (!arr.is_array()) throw ValidationError(at_path(where, "points") + ": expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) pts.push_back(point_from(arr[i], n, at_path(at_path(where, "points"), i)));
    }
    if (j.contains("annulus")) {
        const auto& a = j.at("annulus");
        const auto w = at_path(where, "annulus");
        const int count = get_or(a, "count", 24, w);
        const auto seed = get_or<std::uint64_t>(a, "seed", 1, w);
        const double lo = get_or(a, "inner", 0.15, w), hi = get_or(a, "outer", 0.4, w);
        if (count < 1 || !(lo > 0) || !(hi >= lo)) throw ValidationError(w + ": bad annulus parameters");
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> r(lo, hi), ang(0, 2 * std::numbers::pi);
        for (int k = 0; k < count; ++k) {
            Point p(n);
            for (int i = 0; i < n; ++i) {
                double rad = r(rng), phi = ang(rng);
                p(i) = std::polar(rad, phi);
            }
            pts.push_back(p);
        }
    }
    if (pts.empty()) throw ValidationError(where + ": no sample points");
    return pts;
}

/// Member ids and region predicate for one cover index.
inline std::pair<std::vector<std::size_t>, std::function<bool(const Point&)>> load_region(
    const json& j, const std::vector<Point>& pts, int num_indices, const std::string& where) {
    std::function<bool(const Point&)> pred;
    std::vector<std::size_t> ids;
    if (j.contains("members")) {
        const auto& m = j.at("members");
        if (m.is_string() && m.get<std::string>() == "all") {
            ids.resize(pts.size());
            std::iota(ids.begin(), ids.end(), 0);
        } else if (m.is_array()) {
            for (const auto& v : m) {
                if (!v.is_number_unsigned()) throw ValidationError(at_path(where, "members") + ": ids are non-negative integers");
                ids.push_back(v.get<std::size_t>());
            }
            std::sort(ids.begin(), ids.end());
        } else {
            throw ValidationError(at_path(where, "members") + ": expected \"all\" or a list of ids");
        }
        return {ids, pred};
    }
    if (j.contains("sector")) {
        const auto& s = j.at("sector");
        const auto w = at_path(where, "sector");
        const int coord = get_or(s, "coordinate", 0, w);
        const double center = get_or(s, "center", 0.0, w), half = get_or(s, "half_width", 2.3, w);
        pred = [coord, center, half](const Point& z) {
            return std::abs(std::remainder(std::arg(z(coord)) - center, 2 * std::numbers::pi)) <= half;
        };
    } else if (j.contains("band")) {
        const auto& b = j.at("band");
        const auto w = at_path(where, "band");
        const int coord = get_or(b, "coordinate", 0, w);
        const bool imag = get_or<std::string>(b, "part", "imag", w) == "imag";
        const double lo = get_or(b, "min", -1e300, w), hi = get_or(b, "max", 1e300, w);
        pred = [coord, imag, lo, hi](const Point& z) {
            double v = imag ? z(coord).imag() : z(coord).real();
            return v >= lo && v <= hi;
        };
    } else {
        throw ValidationError(where + ": cover index needs members, sector or band");
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (pred(pts[i])) ids.push_back(i);
    (void)num_indices;
    return {ids, pred};
}

inline InvariantMap invariant_from(const json& j, const std::string& where) {
    const auto& inv = require(j, "invariant", where);
    const auto w = at_path(where, "invariant");
    const auto kind = get_or<std::string>(inv, "kind", "todd", w);
    const int degree = get_or(inv, "degree", 0, w);
    if (degree < 1) throw ValidationError(at_path(w, "degree") + ": degree must be at least 1");
    if (kind == "todd") return invariant_from_symfun(todd_component(degree), degree);
    if (kind == "chern") return invariant_from_symfun(chern_character_component(degree), degree);
    throw ValidationError(at_path(w, "kind") + ": unsupported invariant '" + kind + "'");
}

inline std::vector<Word> words_from(const json& j, const EquivariantCover& ec, const std::string& where) {
    if (!j.contains("words")) return ec.action.letters();
    std::vector<Word> out;
    for (const auto& w : j.at("words")) out.push_back(ec.action.parse_word(w.get<std::string>()));
    (void)where;
    return out;
}

inline CheckOutcome from_residual(const ResidualReport& r) {
    CheckOutcome o;
    o.status = r.pass ? "pass" : "fail";
    o.max_residual = r.max_residual;
    o.worst = r.worst_key;
    o.details = r.to_json();
    return o;
}

inline std::vector<std::string> symfun_lines(const std::string& kind, int k) {
    if (kind == "todd" || kind == "chern") {
        if (k < 1) throw ValidationError("degree must be at least 1");
        SymFun f = kind == "todd" ? todd_component(k) : chern_character_component(k);
        return {to_string(newton_convert(f, Basis::Elementary)) + " = " + to_string(newton_convert(f, Basis::PowerSum))};
    }
    if (kind == "convert") {
        if (k < 1) throw ValidationError("degree must be at least 1");
        return {"T" + std::to_string(k) + " = " +
                    to_string(newton_convert(SymFun::generator(Basis::PowerSum, k), Basis::Elementary)),
                "S" + std::to_string(k) + " = " +
                    to_string(newton_convert(SymFun::generator(Basis::Elementary, k), Basis::PowerSum))};
    }
    throw ValidationError("unsupported symfun kind '" + kind + "'");
}

}  // namespace detail

/// Partitions of d in decreasing-part order.
inline std::vector<Partition> integer_partitions(int d) {
    std::vector<Partition> out;
    std::vector<int> cur;
    std::function<void(int, int)> rec = [&](int rest, int cap) {
        if (rest == 0) {
            out.emplace_back(cur);
            return;
        }
        for (int p = std::min(rest, cap); p >= 1; --p) {
            cur.push_back(p);
            rec(rest - p, p);
            cur.pop_back();
        }
    };
    rec(d, d);
    return out;
}

// ---------------------------------------------------------------- standalone checks

inline CheckOutcome newton_roundtrip_check(int max_degree) {
    CheckOutcome o;
    int count = 0;
    for (int d = 1; d <= max_degree; ++d)
        for (const auto& p : integer_partitions(d))
            for (Basis b : {Basis::PowerSum, Basis::Elementary}) {
                SymFun f{b, {}, 0};
                f.add(p, Rational(d, 7));
                const Basis other = b == Basis::PowerSum ? Basis::Elementary : Basis::PowerSum;
                ++count;
                if (!(newton_convert(newton_convert(f, other), b) == f)) {
                    o.status = "fail";
                    o.max_residual = 1;
                    o.worst = cocycle::detail::monomial_text(b, p);
                }
            }
    o.details = {{"monomials", count}, {"max_degree", max_degree}};
    return o;
}

/// Relative |T(g A g^-1) - T(A)| over random tuples, for Todd_k and Ch_k with k <= max_degree.
inline CheckOutcome gl_invariance_check(int max_degree, int max_n, int trials, double tol, std::uint64_t seed) {
    CheckOutcome o;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> dim(1, max_n);
    auto random_matrix = [&](int n) {
        Matrix m(n, n);
        for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = {g(rng), g(rng)};
        return m;
    };
    json per = json::array();
    for (int k = 1; k <= max_degree; ++k)
        for (const std::string kind : {"todd", "chern"}) {
            auto f = kind == "todd" ? todd_component(k) : chern_character_component(k);
            auto t = invariant_from_symfun(f, k);
            double worst = 0;
            for (int trial = 0; trial < trials; ++trial) {
                const int n = dim(rng);
                Matrix a = random_matrix(n) + 2.0 * Matrix::Identity(n, n);
                Matrix ai = a.inverse();
                std::vector<Matrix> m, c;
                for (int i = 0; i < k; ++i) {
                    m.push_back(random_matrix(n));
                    c.push_back(ai * m.back() * a);
                }
                auto base = eval_invariant(t, m);
                double rel = std::abs(eval_invariant(t, c) - base) / std::max(1.0, std::abs(base));
                worst = std::max(worst, rel);
            }
            std::string label = kind + std::to_string(k);
            per.push_back({{"invariant", label}, {"max_relative_residual", worst}});
            if (worst > o.max_residual || o.worst.empty()) {
                o.max_residual = std::max(o.max_residual, worst);
                o.worst = label;
            }
        }
    o.status = o.max_residual <= tol ? "pass" : "fail";
    o.details = {{"trials", trials}, {"max_n", max_n}, {"invariants", per}};
    return o;
}

/// theta(g o f) = f^# theta(g) + theta(f) at the given points.
inline CheckOutcome theta_composition_check(const std::vector<std::pair<library::Entry, library::Entry>>& pairs,
                                           const std::vector<Point>& points, double tol) {
    CheckOutcome o;
    json per = json::array();
    for (const auto& [f, g] : pairs) {
        auto lhs = theta(compose(g.forward, f.forward));
        auto rhs = sharp_pullback(f.forward, theta(g.forward)) + theta(f.forward);
        double worst = 0;
        for (const auto& z : points) {
            auto a = lhs(z), b = rhs(z);
            for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, max_abs(Matrix(a[i] - b[i])));
        }
        std::string label = f.name + " then " + g.name;
        per.push_back({{"pair", label}, {"residual", worst}});
        if (worst > o.max_residual || o.worst.empty()) {
            o.max_residual = std::max(o.max_residual, worst);
            o.worst = label;
        }
    }
    o.status = o.max_residual <= tol ? "pass" : "fail";
    o.details = {{"pairs", per}, {"points", points.size()}};
    return o;
}

inline std::vector<std::pair<library::Entry, library::Entry>> library_pairs() {
    std::vector<std::pair<library::Entry, library::Entry>> out;
    auto lib = library::standard(2);
    for (const auto& f : lib)
        for (const auto& g : lib)
            if (!(f.affine && g.affine)) out.push_back({f, g});
    return out;
}

/// DK condition on the cocycle labels plus the telescoping identity; optional corrupted control must fail.
inline CheckOutcome telescoping_check(const ChartSimplex& s, const InvariantMap& t, double tol, bool control) {
    CheckOutcome o;
    auto c = sampled_form_complex(s.dim(), t.arity, s.samples().size(), tol);
    auto dk = dk_validate(cf_map(s, t), c, tol);
    auto tele = verify_telescoping(s, t, s.samples(), tol);
    o.max_residual = std::max(dk.max_residual, tele.max_residual);
    o.worst = tele.max_residual >= dk.max_residual ? "telescoping" : "dk";
    o.details = {{"dk", dk.to_json()}, {"telescoping", tele.to_json(s.samples())}};
    bool ok = dk.pass && tele.pass;
    if (control) {
        auto shear = library::shear({Rational(1, 10), 0}, {0, 0});
        auto broken = s.with_transition(0, 2, compose(shear, s.transition(0, 2)));
        auto neg = verify_telescoping(broken, t, s.samples(), tol);
        o.details["negative_control"] = {{"pass", neg.pass}, {"max_residual", neg.max_residual}};
        if (neg.pass) {
            ok = false;
            o.message = "corrupted control was not detected";
        }
    }
    o.status = ok ? "pass" : "fail";
    return o;
}

/// Face/degeneracy identities on random exact simplices.
inline CheckOutcome simplicial_identities_check(int instances, std::uint64_t seed) {
    CheckOutcome o;
    std::mt19937_64 rng(seed);
    int failures = 0;
    for (int i = 0; i < instances; ++i) {
        auto c = random_exact_complex(rng);
        auto s = random_cone_simplex(rng, 2 + i % 2, c);
        auto f = simplicial_identity_failures(s, c);
        if (!dk_validate(s, c, 0).pass) f.push_back("input simplex invalid");
        if (!f.empty()) {
            ++failures;
            if (o.worst.empty()) o.worst = "instance " + std::to_string(i) + ": " + f.front();
        }
    }
    o.max_residual = failures;
    o.status = failures == 0 ? "pass" : "fail";
    o.details = {{"instances", instances}, {"failing_instances", failures}};
    return o;
}

inline CheckOutcome bm_dbar_outcome(int n, const Point& z, int probes, double radius, double step, std::uint64_t seed) {
    auto r = bm_dbar_check(n, z, sphere_probes(z, probes, radius, seed), step);
    CheckOutcome o;
    o.status = r.pass ? "pass" : "fail";
    o.max_residual = r.residual;
    o.worst = "ratio " + std::to_string(r.ratio);
    o.details = r.to_json();
    return o;
}

inline CheckOutcome bm_reproducing_outcome(const Point& z, const std::vector<double>& radii, int order, double tol) {
    CheckOutcome o;
    json per = json::array();
    for (double r : radii) {
        auto v = reproducing_integral(z, r, order);
        double err = std::abs(v - std::complex<double>(1));
        per.push_back({{"radius", r}, {"value", complex_json(v)}, {"error", err}});
        if (err > o.max_residual || o.worst.empty()) {
            o.max_residual = std::max(o.max_residual, err);
            o.worst = "radius " + std::to_string(r);
        }
    }
    o.status = o.max_residual <= tol ? "pass" : "fail";
    o.details = {{"order", order}, {"radii", per}, {"kernel_constant_mass", complex_json(bm_constant(2) / unit_mass_constant(2))}};
    return o;
}

/// Sampled tau values per key of total degree equal to the invariant degree.
inline json tau_dump(std::shared_ptr<const EquivariantCover> ec, const Atlas& atlas, const InvariantMap& inv,
                     const std::vector<Word>& words) {
    auto tau = tau_invariant(ec, atlas, inv);
    json out = {{"atlas", atlas.name}, {"form_degree", inv.arity}, {"keys", json::array()}};
    for (const auto& k : enumerate_total(*ec, inv.arity, words)) {
        json vals = json::array();
        for (const auto& v : tau.sampled(k)) vals.push_back(complex_json(v));
        out["keys"].push_back({{"key", ec->key_name(k)},
                               {"bidegree", {k.cech_degree(), k.group_degree()}},
                               {"points", ec->cloud_points(k).size()},
                               {"values", vals}});
    }
    return out;
}

// ---------------------------------------------------------------- check preparation

namespace detail {

inline PreparedCheck prepare_check(const Scenario& s, const json& j, const std::string& where) {
    PreparedCheck pc;
    pc.type = require(j, "type", where).get<std::string>();
    pc.name = get_or<std::string>(j, "name", pc.type, where);
    const auto& t = pc.type;
    if (t == "symfun") {
        auto kind = require(j, "kind", where).get<std::string>();
        int degree = require(j, "degree", where).get<int>();
        auto expect = get_or<std::string>(j, "expect", "", where);
        auto lines = symfun_lines(kind, degree);
        pc.run = [lines, expect] {
            CheckOutcome o;
            o.details = {{"output", lines}};
            if (!expect.empty() && lines.front() != expect) {
                o.status = "fail";
                o.max_residual = 1;
                o.worst = lines.front();
            }
            return o;
        };
    } else if (t == "newton_roundtrip") {
        int d = get_or(j, "max_degree", 8, where);
        pc.run = [d] { return newton_roundtrip_check(d); };
    } else if (t == "gl_invariance") {
        int deg = get_or(j, "max_degree", 4, where), n = get_or(j, "max_n", 4, where),
            trials = get_or(j, "trials", 100, where);
        double tol = positive_tol(j, 1e-9, where);
        auto seed = get_or<std::uint64_t>(j, "seed", 1, where);
        pc.run = [=] { return gl_invariance_check(deg, n, trials, tol, seed); };
    } else if (t == "theta_composition") {
        double tol = positive_tol(j, 1e-8, where);
        std::vector<std::pair<library::Entry, library::Entry>> pairs;
        if (j.contains("pairs")) {
            const auto& arr = j.at("pairs");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                auto w = at_path(at_path(where, "pairs"), i);
                if (!arr[i].is_array() || arr[i].size() != 2) throw ValidationError(w + ": pairs are [first, second]");
                auto a = arr[i][0].get<std::string>(), b = arr[i][1].get<std::string>();
                pairs.push_back({{a, s.map(a, w), std::nullopt, false}, {b, s.map(b, w), std::nullopt, false}});
            }
        } else {
            if (s.n != 2) throw ValidationError(where + ": the built-in pair list is two-dimensional");
            pairs = library_pairs();
        }
        auto pts = s.points;
        pc.run = [pairs, pts, tol] { return theta_composition_check(pairs, pts, tol); };
    } else if (t == "telescoping") {
        double tol = positive_tol(j, kTelescopingTol, where);
        auto inv = invariant_from(j, where);
        const auto& last = s.map(require(j, "last", where).get<std::string>(), at_path(where, "last"));
        std::vector<HoloMap> steps;
        const auto& arr = require(j, "steps", where);
        for (std::size_t i = 0; i < arr.size(); ++i)
            steps.push_back(s.map(arr[i].get<std::string>(), at_path(at_path(where, "steps"), i)));
        if (static_cast<int>(steps.size()) != inv.arity + 1)
            throw ValidationError(at_path(where, "steps") + ": need degree + 1 transitions");
        bool control = get_or(j, "negative_control", false, where);
        auto simplex = ChartSimplex::from_chain(last, steps, s.points);
        pc.run = [simplex, inv, tol, control] { return telescoping_check(simplex, inv, tol, control); };
    } else if (t == "tau_vanishes" || t == "tau_closed") {
        auto ec = s.require_context(where);
        const auto& atlas = s.atlas(require(j, "atlas", where).get<std::string>(), at_path(where, "atlas"));
        auto inv = invariant_from(j, where);
        auto words = words_from(j, *ec, where);
        double tol = t == "tau_closed" ? positive_tol(j, kTelescopingTol, where) : 0.0;
        const int cech_only = get_or(j, "cech_degree", -1, where);
        atlas.validate(*ec);
        bool bitwise = t == "tau_vanishes";
        pc.run = [ec, atlas, inv, words, tol, bitwise, cech_only] {
            auto tau = tau_invariant(ec, atlas, inv);
            auto keys = enumerate_total(*ec, inv.arity, words);
            auto next = enumerate_total(*ec, inv.arity + 1, words);
            if (cech_only >= 0)
                for (auto* ks : {&keys, &next})
                    std::erase_if(*ks, [cech_only](const Key& k) { return k.cech_degree() != cech_only; });
            auto dtau = mixed_differential(tau);
            if (bitwise) {
                auto a = scan_zero(tau, keys), b = scan_zero(dtau, next);
                CheckOutcome o;
                o.status = a.bitwise_zero && b.bitwise_zero ? "pass" : "fail";
                o.max_residual = std::max(a.max_abs, b.max_abs);
                o.worst = a.bitwise_zero ? (b.bitwise_zero ? "" : "D tau") : "tau";
                o.details = {{"keys", keys.size()}, {"differential_keys", next.size()}, {"tau_bitwise_zero", a.bitwise_zero},
                             {"differential_bitwise_zero", b.bitwise_zero}, {"max_abs", o.max_residual}};
                return o;
            }
            auto o = from_residual(check_vanishes(dtau, next, tol));
            o.details["tau_max_abs"] = scan_zero(tau, keys).max_abs;
            return o;
        };
    } else if (t == "witness") {
        auto ec = s.require_context(where);
        const auto& a = s.atlas(require(j, "first", where).get<std::string>(), at_path(where, "first"));
        const auto& b = s.atlas(require(j, "second", where).get<std::string>(), at_path(where, "second"));
        auto inv = invariant_from(j, where);
        auto words = words_from(j, *ec, where);
        double tol = positive_tol(j, kTelescopingTol, where);
        a.validate(*ec);
        b.validate(*ec);
        pc.run = [ec, a, b, inv, words, tol] {
            auto w = cohomologous_witness(ec, a, b, inv);
            auto diff = difference(tau_invariant(ec, a, inv), tau_invariant(ec, b, inv));
            auto keys = enumerate_total(*ec, inv.arity, words);
            auto o = from_residual(compare_cochains(mixed_differential(w), &diff, keys, tol));
            o.details["difference_max_abs"] = scan_zero(diff, keys).max_abs;
            return o;
        };
    } else if (t == "bm_dbar") {
        int n = get_or(j, "n", s.n, where);
        if (n < 2) throw ValidationError(at_path(where, "n") + ": the kernel needs n >= 2");
        Point z = j.contains("z") ? point_from(j.at("z"), n, at_path(where, "z")) : Point(Point::Zero(n));
        int probes = get_or(j, "probes", 20, where);
        double radius = get_or(j, "radius", 1.0, where), step = get_or(j, "step", 1e-3, where);
        auto seed = get_or<std::uint64_t>(j, "seed", 1, where);
        if (!(step > 0) || !(radius >= 10 * step)) throw ValidationError(where + ": probes must lie 10 steps away");
        pc.run = [=] { return bm_dbar_outcome(n, z, probes, radius, step, seed); };
    } else if (t == "bm_reproducing") {
        Point z = j.contains("z") ? point_from(j.at("z"), 2, at_path(where, "z")) : Point(Point::Zero(2));
        auto radii = get_or(j, "radii", std::vector<double>{0.5, 1.0, 2.0}, where);
        int order = get_or(j, "order", 32, where);
        double tol = positive_tol(j, 1e-3, where);
        if (order < kMinQuadratureOrder) throw ValidationError(at_path(where, "order") + ": order too small");
        pc.run = [=] { return bm_reproducing_outcome(z, radii, order, tol); };
    } else if (t == "hartogs") {
        const int n = s.n;
        auto text = require(j, "expression", where).get<std::string>();
        auto comps = cocycle::detail::Parser(text, 2 * n, s.constants).parse_list();
        std::vector<Expr> diag;
        if (j.contains("diagonal")) diag = cocycle::detail::Parser(j.at("diagonal").get<std::string>(), n, s.constants).parse_list();
        if (!diag.empty() && diag.size() != comps.size())
            throw ValidationError(at_path(where, "diagonal") + ": component count differs from expression");
        auto expect = get_or<std::string>(j, "expect", "extendable", where);
        if (expect != "extendable" && expect != "singular")
            throw ValidationError(at_path(where, "expect") + ": expected 'extendable' or 'singular'");
        double tol = positive_tol(j, 1e-12, where);
        auto pts = s.points;
        pc.run = [=] {
            PairFunction f = [comps, n](const Point& z, const Point& xi) {
                Point zz(2 * n);
                zz << z, xi;
                Vector v(static_cast<Eigen::Index>(comps.size()));
                for (std::size_t c = 0; c < comps.size(); ++c) v(c) = evaluate(comps[c], zz);
                return v;
            };
            CheckOutcome o;
            try {
                auto out = hartogs_diagonal(n, f, pts);
                if (expect == "singular") {
                    o.status = "fail";
                    o.message = "singular input was extended";
                    return o;
                }
                double est = 0;
                for (const auto& d : out) {
                    est = std::max(est, d.error_estimate);
                    if (!diag.empty()) {
                        for (std::size_t c = 0; c < diag.size(); ++c) {
                            double r = std::abs(d.value(c) - evaluate(diag[c], d.z));
                            if (r > o.max_residual) o.max_residual = r;
                        }
                    }
                }
                o.details = {{"points", out.size()}, {"max_error_estimate", est}};
                o.status = o.max_residual <= tol ? "pass" : "fail";
            } catch (const DomainError& e) {
                o.details = {{"flagged", e.what()}};
                o.status = expect == "singular" ? "pass" : "fail";
                o.message = e.what();
            }
            return o;
        };
    } else if (t == "simplicial_identities") {
        int instances = get_or(j, "instances", 500, where);
        auto seed = get_or<std::uint64_t>(j, "seed", 1, where);
        pc.run = [=] { return simplicial_identities_check(instances, seed); };
    } else {
        throw ValidationError(at_path(where, "type") + ": unknown check type '" + t + "'");
    }
    return pc;
}

}  // namespace detail

/// Parses, resolves every name and prepares the checks; throws ValidationError with a location.
inline Scenario load_scenario(const json& j, const std::string& hash) {
    Scenario s;
    s.hash = hash;
    if (!j.is_object()) throw ValidationError("/: scenario must be a JSON object");
    s.name = get_or<std::string>(j, "name", "scenario", "");
    s.n = get_or(j, "dimension", 0, "");
    if (s.n < 1) throw ValidationError("/dimension: must be a positive integer");
    s.output = get_or<std::string>(j, "output", s.output, "");
    if (j.contains("constants"))
        for (const auto& [k, v] : j.at("constants").items())
            s.constants[k] = complex_rational_from(v, "/constants/" + k);
    if (j.contains("maps"))
        for (const auto& [k, v] : j.at("maps").items()) {
            if (!v.is_string()) throw ValidationError("/maps/" + k + ": map text must be a string");
            try {
                s.maps.emplace(k, parse_map(v.get<std::string>(), s.n, s.constants, k));
            } catch (const ValidationError& e) {
                throw ValidationError("/maps/" + k + ": " + e.what());
            }
        }
    if (j.contains("samples")) s.points = detail::load_samples(j.at("samples"), s.n, "/samples");

    if (j.contains("cover")) {
        const auto& cov = j.at("cover");
        if (!cov.is_array() || cov.empty()) throw ValidationError("/cover: expected a non-empty array");
        if (s.points.empty()) throw ValidationError("/cover: a cover needs samples");
        Cover cover;
        cover.n = s.n;
        cover.points = s.points;
        for (std::size_t i = 0; i < cov.size(); ++i) {
            auto [ids, pred] = detail::load_region(cov[i], s.points, static_cast<int>(cov.size()), at_path("/cover", i));
            cover.members.push_back(ids);
            cover.predicates.push_back(pred);
        }
        std::vector<Generator> gens;
        if (j.contains("action")) {
            const auto& g = require(j.at("action"), "generators", "/action");
            for (std::size_t i = 0; i < g.size(); ++i) {
                const auto w = at_path("/action/generators", i);
                auto name = require(g[i], "name", w).get<std::string>();
                const auto& fwd = s.map(require(g[i], "map", w).get<std::string>(), at_path(w, "map"));
                const auto& inv = s.map(require(g[i], "inverse", w).get<std::string>(), at_path(w, "inverse"));
                std::vector<int> perm(cov.size());
                std::iota(perm.begin(), perm.end(), 0);
                if (g[i].contains("index_action")) perm = g[i].at("index_action").get<std::vector<int>>();
                gens.push_back({name, fwd.renamed(name), inv.renamed(name + "^-1"), perm});
            }
        }
        auto ec = std::make_shared<EquivariantCover>(
            EquivariantCover{std::move(cover), GroupAction(s.n, static_cast<int>(cov.size()), std::move(gens))});
        ec->validate();
        s.context = ec;
    }
    if (j.contains("atlases"))
        for (const auto& [name, charts] : j.at("atlases").items()) {
            const auto w = "/atlases/" + name;
            if (!s.context) throw ValidationError(w + ": atlases need a cover");
            if (!charts.is_array() || static_cast<int>(charts.size()) != s.context->cover.size())
                throw ValidationError(w + ": one chart per cover index required");
            Atlas a{name, {}, {}};
            for (std::size_t i = 0; i < charts.size(); ++i) {
                const auto wi = at_path(w, i);
                a.charts.push_back(s.map(require(charts[i], "chart", wi).get<std::string>(), at_path(wi, "chart")));
                a.inverses.push_back(s.map(require(charts[i], "inverse", wi).get<std::string>(), at_path(wi, "inverse")));
            }
            a.validate(*s.context);
            s.atlases.emplace(name, std::move(a));
        }
    if (j.contains("checks")) {
        const auto& arr = j.at("checks");
        if (!arr.is_array()) throw ValidationError("/checks: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto w = at_path("/checks", i);
            try {
                s.checks.push_back(detail::prepare_check(s, arr[i], w));
            } catch (const json::exception& e) {
                throw ValidationError(w + ": " + e.what());
            } catch (const ValidationError& e) {
                if (std::string_view(e.what()).starts_with("/")) throw;
                throw ValidationError(w + ": " + e.what());
            }
        }
    }
    return s;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read scenario '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return load_scenario(j, fnv1a(text));
}

/// Runs every check in declared order; runtime errors are recorded per check.
inline json run_scenario(const Scenario& s, bool* all_pass = nullptr) {
    json report = {{"tool", "cocycle"},       {"version", kToolVersion}, {"scenario", s.name},
                   {"scenario_hash", s.hash}, {"dimension", s.n},        {"checks", json::array()}};
    bool ok = true;
    for (const auto& c : s.checks) {
        const auto start = std::chrono::steady_clock::now();
        CheckOutcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.status = "error";
            o.message = e.what();
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        ok = ok && o.status == "pass";
        json entry = {{"name", c.name},   {"type", c.type},       {"status", o.status},
                      {"max_residual", o.max_residual}, {"worst", o.worst}, {"details", o.details},
                      {"timing_ms", ms}};
        if (!o.message.empty()) entry["message"] = o.message;
        report["checks"].push_back(std::move(entry));
    }
    report["pass"] = ok;
    if (all_pass) *all_pass = ok;
    return report;
}

}  // namespace scn
}  // namespace cocycle
