// One line per acceptance criterion; exit status 1 if any criterion fails.
#include "cocycle/scenario.hpp"

#include "support.hpp"

#include <cstdio>
#include <iostream>

using namespace cocycle;
namespace scn = cocycle::scn;
using nlohmann::json;

namespace {

struct Line {
    bool pass = false;
    std::string note;
};

SymFun poly(Basis b, std::initializer_list<std::pair<std::vector<int>, Rational>> terms) {
    SymFun f{b, {}, 0};
    for (const auto& [p, c] : terms) f.add(Partition(p), c);
    return f;
}

Line todd_exact() {
    using Q = Rational;
    using B = Basis;
    const std::vector<std::pair<SymFun, SymFun>> expect = {
        {poly(B::Elementary, {{{1}, Q(1, 2)}}), poly(B::PowerSum, {{{1}, Q(1, 2)}})},
        {poly(B::Elementary, {{{1, 1}, Q(1, 12)}, {{2}, Q(1, 12)}}),
         poly(B::PowerSum, {{{1, 1}, Q(3, 24)}, {{2}, Q(-1, 24)}})},
        {poly(B::Elementary, {{{2, 1}, Q(1, 24)}}), poly(B::PowerSum, {{{1, 1, 1}, Q(1, 48)}, {{2, 1}, Q(-1, 48)}})},
    };
    const std::vector<std::string> printed = {"(1/2) S1 = (1/2) T1", "(1/12)(S1^2 + S2) = (1/24)(3 T1^2 - T2)",
                                              "(1/24) S1 S2 = (1/48)(T1^3 - T1 T2)"};
    Line l{true, ""};
    for (int k = 1; k <= 3; ++k) {
        auto t = todd_component(k);
        const auto& [s_form, t_form] = expect[k - 1];
        bool ok = newton_convert(t, Basis::Elementary) == s_form && newton_convert(t, Basis::PowerSum) == t_form &&
                  scn::detail::symfun_lines("todd", k).front() == printed[k - 1];
        if (!ok) {
            l.pass = false;
            l.note = "todd " + std::to_string(k) + " differs";
        }
    }
    if (l.pass) l.note = "k = 1, 2, 3 in both bases";
    return l;
}

std::string fmt_residual(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", r);
    return buf;
}

Line from_outcome(const scn::CheckOutcome& o, const std::string& what) {
    return {o.status == "pass", what + ", max residual " + fmt_residual(o.max_residual) +
                                    (o.message.empty() ? "" : " (" + o.message + ")")};
}

std::vector<Point> annulus(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Point> pts;
    for (int i = 0; i < count; ++i) pts.push_back(testing_support::annulus_point(rng, 2, 0.15, 0.4));
    return pts;
}

const library::Entry& entry(const std::string& name) {
    static const auto lib = library::standard(2);
    for (const auto& e : lib)
        if (e.name == name) return e;
    throw std::runtime_error("missing library map " + name);
}

Line theta_composition() {
    auto pairs = scn::library_pairs();
    std::size_t both_nonaffine = 0;
    for (const auto& [f, g] : pairs) both_nonaffine += !f.affine && !g.affine;
    if (both_nonaffine < 6) return {false, "fewer than 6 non-affine pairs"};
    auto o = scn::theta_composition_check(pairs, annulus(50, 4), 1e-8);
    return from_outcome(o, std::to_string(pairs.size()) + " pairs x 50 points");
}

Line telescoping() {
    std::vector<HoloMap> steps = {entry("shear").forward, entry("mobius").forward, entry("exp_twist").forward};
    auto s = ChartSimplex::from_chain(entry("henon").forward, steps, annulus(24, 5));
    auto inv = invariant_from_symfun(todd_component(2), 2);
    auto o = scn::telescoping_check(s, inv, kTelescopingTol, true);
    double control = o.details["negative_control"]["max_residual"].get<double>();
    return from_outcome(o, "24 points; corrupted control residual " + fmt_residual(control));
}

json scenario_check(const std::string& file, const std::string& check_name) {
    auto s = scn::load_scenario_file(std::string(COCYCLE_SCENARIO_DIR) + "/" + file);
    auto report = scn::run_scenario(s);
    for (const auto& c : report["checks"])
        if (c["name"] == check_name) return c;
    throw std::runtime_error(file + " has no check '" + check_name + "'");
}

Line affine_vanishing() {
    auto c = scenario_check("affine_torus.scn", "todd2 vanishes");
    bool ok = c["status"] == "pass" && c["details"]["tau_bitwise_zero"].get<bool>();
    return {ok, "affine_torus.scn, " + std::to_string(c["details"]["keys"].get<int>()) + " keys, bitwise zero: " +
                    (ok ? "yes" : "no")};
}

Line henon_closed() {
    auto c = scenario_check("henon_z.scn", "closed projective");
    bool ok = c["status"] == "pass" && c["max_residual"].get<double>() <= 1e-7;
    return {ok, "henon_z.scn, max residual " + fmt_residual(c["max_residual"].get<double>())};
}

Line witness() {
    auto c = scenario_check("henon_z.scn", "projective vs plain");
    bool ok = c["status"] == "pass" && c["max_residual"].get<double>() <= 1e-7 &&
              c["details"]["difference_max_abs"].get<double>() > 1e-6;
    return {ok, "max residual " + fmt_residual(c["max_residual"].get<double>()) + ", |tau1 - tau2| up to " +
                    fmt_residual(c["details"]["difference_max_abs"].get<double>())};
}

Line bm_kernel() {
    auto d2 = scn::bm_dbar_outcome(2, Point::Zero(2), 20, 1.0, 1e-3, 1);
    auto d3 = scn::bm_dbar_outcome(3, Point::Zero(3), 20, 1.0, 1e-3, 2);
    auto rep = scn::bm_reproducing_outcome(Point::Zero(2), {0.5, 1.0, 2.0}, 32, 1e-3);
    bool ok = d2.status == "pass" && d3.status == "pass" && rep.status == "pass";
    return {ok, "halving ratios " + fmt_residual(d2.details["ratio"].get<double>()) + " (n=2), " +
                    fmt_residual(d3.details["ratio"].get<double>()) + " (n=3); reproducing error " +
                    fmt_residual(rep.max_residual)};
}

Line hartogs() {
    scn::Scenario s;
    s.n = 2;
    s.points = annulus(10, 6);
    auto poly = scn::detail::prepare_check(
        s,
        {{"type", "hartogs"}, {"expression", "z1*z3 + z2^2*z4 - 3*z3; z1 - z3 + z2*z4"}, {"diagonal", "z1^2 + z2^3 - 3*z1; z2^2"}},
        "/acceptance/0");
    auto pole = scn::detail::prepare_check(
        s, {{"type", "hartogs"}, {"expression", "1/(z3 - z1)"}, {"expect", "singular"}}, "/acceptance/1");
    auto a = poly.run(), b = pole.run();
    return {a.status == "pass" && b.status == "pass",
            "polynomial residual " + fmt_residual(a.max_residual) + "; pole " +
                (b.status == "pass" ? "flagged" : "not flagged")};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Line()> run;
    };
    const std::vector<Criterion> criteria = {
        {"Todd coefficients exact", 1, todd_exact},
        {"Newton identities round trip", 5,
         [] { return from_outcome(scn::newton_roundtrip_check(8), "degrees <= 8"); }},
        {"GL-invariance", 10,
         [] { return from_outcome(scn::gl_invariance_check(4, 4, 100, 1e-9, 3), "Todd1..4, Ch1..4, n <= 4"); }},
        {"theta composition", 10, theta_composition},
        {"telescoping and DK condition", 30, telescoping},
        {"affine vanishing", 5, affine_vanishing},
        {"Henon Z-action closedness", 60, henon_closed},
        {"cohomologous witness", 60, witness},
        {"Bochner-Martinelli kernel", 60, bm_kernel},
        {"Hartogs restriction", 5, hartogs},
        {"simplicial identities", 10,
         [] { return from_outcome(scn::simplicial_identities_check(500, 9), "500 instances"); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto start = std::chrono::steady_clock::now();
        Line l;
        try {
            l = c.run();
        } catch (const std::exception& e) {
            l = {false, std::string("error: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (s > c.budget_s) {
            l.pass = false;
            l.note += "; over budget";
        }
        failed += !l.pass;
        std::printf("%s %2zu %-30s %7.2fs / %3.0fs  %s\n", l.pass ? "PASS" : "FAIL", i + 1, c.name, s, c.budget_s,
                    l.note.c_str());
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed ? 1 : 0;
}
