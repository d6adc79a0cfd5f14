#include "cocycle/cech_group.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace cocycle;
using testing_support::annulus_point;
using C = std::complex<double>;

namespace {

InvariantMap todd(int k) { return invariant_from_symfun(todd_component(k), k); }

library::Entry lib(const std::string& name) {
    for (auto& e : library::standard(2))
        if (e.name == name) return e;
    throw std::runtime_error(name);
}

/// Index i holds the samples with arg z1 within half_width of 2 pi i / count.
Cover sector_cover(int count, int points, double half_width = 2.3, std::uint64_t seed = 11) {
    std::mt19937_64 rng(seed);
    Cover c;
    c.n = 2;
    c.members.resize(count);
    for (int p = 0; p < points; ++p) {
        Point z = annulus_point(rng, 2, 0.15, 0.4);
        c.points.push_back(z);
        for (int i = 0; i < count; ++i) {
            double d = std::remainder(std::arg(z(0)) - 2 * std::numbers::pi * i / count, 2 * std::numbers::pi);
            if (std::abs(d) <= half_width) c.members[i].push_back(p);
        }
    }
    return c;
}

std::shared_ptr<const EquivariantCover> context(Cover cover, GroupAction action) {
    auto ec = std::make_shared<EquivariantCover>(EquivariantCover{std::move(cover), std::move(action)});
    ec->validate();
    return ec;
}

/// Two generators permuting three indices.
GroupAction two_generators() {
    auto h = lib("henon");
    auto s = lib("shear");
    return GroupAction(2, 3, {{"g", h.forward, *h.inverse, {1, 2, 0}}, {"h", s.forward, *s.inverse, {0, 2, 1}}});
}

MixedCochain random_cochain(std::shared_ptr<const EquivariantCover> ec, int k) {
    const int n = ec->dim();
    return MixedCochain(
        ec, k,
        [n, k](const Key& key) {
            std::size_t seed = 1469598103934665603ull;
            auto mix = [&](int v) { seed = (seed ^ static_cast<std::size_t>(v + 1000)) * 1099511628211ull; };
            for (int i : key.idx) mix(i);
            for (const auto& w : key.words) {
                mix(-7777);
                for (int l : w) mix(l);
            }
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> g;
            const auto size = static_cast<Eigen::Index>(k_subsets(n, k).size());
            Matrix coef(size, 3);
            for (Eigen::Index i = 0; i < coef.size(); ++i) coef(i) = C(g(rng), g(rng));
            return ScalarKForm{n, k,
                               [coef](const Point& z) {
                                   return Vector(coef.col(0) + coef.col(1) * z(0) + coef.col(2) * z(0) * z(1));
                               },
                               "r"};
        },
        "r");
}

Atlas library_atlas(const std::vector<std::string>& names, const std::string& label) {
    Atlas a{label, {}, {}};
    for (const auto& nm : names) {
        auto e = lib(nm);
        a.charts.push_back(e.forward);
        a.inverses.push_back(*e.inverse);
    }
    return a;
}

double sample_max(const MixedCochain& c, const std::vector<Key>& keys) { return scan_zero(c, keys).max_abs; }

}  // namespace

TEST(Cover, IntersectionsAreSubsetsOfFaces) {
    auto cover = sector_cover(3, 60);
    cover.validate();
    auto triple = cover.cloud({0, 1, 2});
    EXPECT_FALSE(triple.empty());
    for (int drop = 0; drop < 3; ++drop) {
        std::vector<int> face{0, 1, 2};
        face.erase(face.begin() + drop);
        auto f = cover.cloud(face);
        EXPECT_TRUE(std::includes(f.begin(), f.end(), triple.begin(), triple.end()));
    }
    EXPECT_EQ(cover.cloud({1, 1}), cover.members[1]);
}

TEST(Cover, RejectsBadMembers) {
    auto cover = sector_cover(2, 10);
    cover.members[0] = {3, 1};
    EXPECT_THROW(cover.validate(), ValidationError);
    cover.members[0] = {99};
    EXPECT_THROW(cover.validate(), ValidationError);
}

TEST(GroupAction, WordsActOnTheRight) {
    auto a = two_generators();
    EXPECT_EQ(a.act(0, Word{1}), 1);
    EXPECT_EQ(a.act(0, Word{1, 2}), 2);
    EXPECT_EQ(a.act(a.act(2, Word{-1}), Word{1}), 2);
    EXPECT_EQ(a.parse_word("g*h^-1"), (Word{1, -2}));
    EXPECT_EQ(a.word_name({1, -2}), "g*h^-1");
    EXPECT_THROW(a.parse_word("k"), ValidationError);
    EXPECT_THROW(a.act(0, Word{3}), ValidationError);
}

TEST(GroupAction, RhoOfProductIsComposite) {
    auto a = two_generators();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        Point z = annulus_point(rng, 2, 0.1, 0.5);
        Point expect = a.letter_map(1)(a.letter_map(-2)(z));
        EXPECT_LT(max_abs(Vector(a.rho({1, -2})(z) - expect)), 1e-13);
        EXPECT_LT(max_abs(Vector(a.rho({1, -1})(z) - z)), 1e-13);
    }
}

TEST(GroupAction, RejectsNonPermutation) {
    auto h = lib("henon");
    EXPECT_THROW(GroupAction(2, 2, {{"g", h.forward, *h.inverse, {0, 0}}}), ValidationError);
}

TEST(EquivariantCover, RejectsWrongInverse) {
    auto h = lib("henon");
    auto s = lib("shear");
    EquivariantCover ec{sector_cover(1, 10), GroupAction(2, 1, {{"g", h.forward, *s.inverse, {0}}})};
    EXPECT_THROW(ec.validate(), ValidationError);
}

TEST(EquivariantCover, RegionPredicateIsEnforced) {
    auto cover = sector_cover(1, 20);
    cover.predicates = {[](const Point& z) { return std::abs(z(0)) < 1.0 && std::abs(z(1)) < 1.0; }};
    auto t = lib("affine");
    EquivariantCover ec{cover, GroupAction(2, 1, {{"t", t.forward, *t.inverse, {0}}})};
    EXPECT_THROW(ec.validate(), ValidationError);
}

TEST(Atlas, InverseIsChecked) {
    auto ec = context(sector_cover(2, 20), GroupAction::trivial(2, 2));
    auto good = library_atlas({"shear", "mobius"}, "a");
    EXPECT_NO_THROW(good.validate(*ec));
    auto bad = good;
    bad.inverses[1] = lib("shear").inverse.value();
    EXPECT_THROW(bad.validate(*ec), ValidationError);
}

TEST(Keys, EnumerationSkipsEmptyClouds) {
    auto ec = context(sector_cover(3, 60, 1.2), GroupAction::trivial(2, 3));
    auto keys = enumerate_keys(*ec, 2, 0, {});
    for (const auto& k : keys) EXPECT_FALSE(ec->cloud(k).empty());
    EXPECT_LT(keys.size(), 27u);
    EXPECT_GT(keys.size(), 3u);
    EXPECT_TRUE(enumerate_keys(*ec, 0, 1, {}).empty());
}

TEST(Differentials, CechSquaredIsExactlyZero) {
    auto ec = context(sector_cover(3, 60), two_generators());
    auto c = random_cochain(ec, 2);
    auto dd = cech_differential(cech_differential(c));
    auto keys = enumerate_keys(*ec, 2, 1, ec->action.letters());
    ASSERT_FALSE(keys.empty());
    for (const auto& k : keys) EXPECT_TRUE(dd.terms(k).empty());
    EXPECT_TRUE(scan_zero(dd, keys).bitwise_zero);
    EXPECT_GT(sample_max(cech_differential(c), keys), 0.1);
}

TEST(Differentials, GroupSquaredVanishes) {
    auto ec = context(sector_cover(3, 60), two_generators());
    auto c = random_cochain(ec, 2);
    auto keys = enumerate_keys(*ec, 1, 2, ec->action.letters());
    ASSERT_FALSE(keys.empty());
    for (const auto& k : keys) EXPECT_TRUE(group_differential(group_differential(c)).terms(k).empty());
    auto numeric = group_differential(group_differential(c).materialized());
    auto r = check_vanishes(numeric, keys, 1e-9);
    EXPECT_TRUE(r.pass) << r.max_residual << " at " << r.worst_key;
    EXPECT_GT(sample_max(group_differential(c), keys), 0.1);
}

TEST(Differentials, MixedSquaredIsExactlyZero) {
    auto ec = context(sector_cover(3, 60), two_generators());
    auto c = random_cochain(ec, 2);
    auto dd = mixed_differential(mixed_differential(c));
    for (const auto& k : enumerate_total(*ec, 3, ec->action.letters())) EXPECT_TRUE(dd.terms(k).empty());
}

TEST(Differentials, CechAndGroupCommute) {
    auto ec = context(sector_cover(3, 60), two_generators());
    auto c = random_cochain(ec, 2);
    auto a = cech_differential(group_differential(c));
    auto b = group_differential(cech_differential(c));
    for (const auto& k : enumerate_keys(*ec, 2, 2, ec->action.letters())) EXPECT_EQ(a.terms(k), b.terms(k));
}

TEST(Differentials, DegreeZeroGroupDifferential) {
    auto ec = context(sector_cover(3, 60), two_generators());
    auto c = random_cochain(ec, 2);
    auto dc = group_differential(c);
    Key k{{0}, {{1}}};
    auto lhs = dc.value(k);
    auto pulled = pullback_kform(ec->action.rho({1}), c.value({{0}, {}}));
    auto plain = c.value({{ec->action.act(0, Word{1})}, {}});
    for (const auto& z : ec->cloud_points(k)) EXPECT_LT(max_abs(Vector(lhs(z) - (pulled(z) - plain(z)))), 1e-14);
}

TEST(Differentials, CechFacesAlternate) {
    auto ec = context(sector_cover(3, 60), GroupAction::trivial(2, 3));
    auto c = random_cochain(ec, 2);
    auto dc = cech_differential(c);
    Key k{{0, 1}, {}};
    auto v = dc.value(k);
    auto a = c.value({{1}, {}});
    auto b = c.value({{0}, {}});
    for (const auto& z : ec->cloud_points(k)) EXPECT_LT(max_abs(Vector(v(z) - (a(z) - b(z)))), 1e-14);
}

TEST(Tau, AffineTorusIsBitwiseZero) {
    Cover cover = sector_cover(2, 40);
    using Q = Rational;
    auto t1 = library::affine({{{1, 0}, {0, 0}}, {{0, 0}, {1, 0}}}, {{1, 0}, {0, 0}});
    auto t1i = library::affine({{{1, 0}, {0, 0}}, {{0, 0}, {1, 0}}}, {{-1, 0}, {0, 0}});
    auto t2 = library::affine({{{1, 0}, {0, 0}}, {{0, 0}, {1, 0}}}, {{0, 0}, {1, 0}});
    auto t2i = library::affine({{{1, 0}, {0, 0}}, {{0, 0}, {1, 0}}}, {{0, 0}, {-1, 0}});
    auto ec = context(cover, GroupAction(2, 2, {{"a", t1, t1i, {0, 1}}, {"b", t2, t2i, {0, 1}}}));
    auto shift = library::affine({{{2, 0}, {1, 0}}, {{0, 0}, {1, 0}}}, {{Q(1, 2), 0}, {0, 0}});
    auto shift_inv = library::affine({{{Q(1, 2), 0}, {Q(-1, 2), 0}}, {{0, 0}, {1, 0}}}, {{Q(-1, 4), 0}, {0, 0}});
    Atlas atlas{"affine", {HoloMap::identity(2), shift}, {HoloMap::identity(2), shift_inv}};
    auto tau = tau_invariant(ec, atlas, todd(2));
    auto keys = enumerate_total(*ec, 2, ec->action.letters());
    ASSERT_GT(keys.size(), 10u);
    auto s = scan_zero(tau, keys);
    EXPECT_TRUE(s.bitwise_zero) << s.max_abs;
    EXPECT_TRUE(scan_zero(mixed_differential(tau), enumerate_total(*ec, 3, ec->action.letters())).bitwise_zero);
}

TEST(Tau, CechCocycleOnThreeCharts) {
    auto ec = context(sector_cover(3, 60), GroupAction::trivial(2, 3));
    auto tau = tau_invariant(ec, library_atlas({"shear", "mobius", "exp_twist"}, "lib"), todd(2));
    auto top = enumerate_keys(*ec, 2, 0, {});
    EXPECT_GT(sample_max(tau, top), 1e-3);
    auto r = check_vanishes(mixed_differential(tau), enumerate_keys(*ec, 3, 0, {}), kTelescopingTol);
    EXPECT_TRUE(r.pass) << r.max_residual << " at " << r.worst_key;
    EXPECT_TRUE(r.warnings.empty());
}

TEST(Tau, CechComponentMatchesChartCocycle) {
    auto ec = context(sector_cover(3, 60), GroupAction::trivial(2, 3));
    auto atlas = library_atlas({"shear", "mobius", "exp_twist"}, "lib");
    auto tau = tau_invariant(ec, atlas, todd(2));
    Key k{{0, 1, 2}, {}};
    auto pts = ec->cloud_points(k);
    auto s = ChartSimplex::from_charts(atlas.charts, atlas.inverses, pts);
    auto expect = sample_form(cf_label_top(s, todd(2)), pts);
    auto got = tau.sampled(k);
    ASSERT_EQ(got.size(), expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_LT(std::abs(got[i] - expect[i]), 1e-12);
}

TEST(Tau, HenonActionIsClosed) {
    auto h = lib("henon");
    for (const std::string chart : {"mobius", "identity"}) {
        auto ec = context(sector_cover(1, 30), GroupAction(2, 1, {{"g", h.forward, *h.inverse, {0}}}));
        Atlas atlas = chart == "identity" ? Atlas{"id", {HoloMap::identity(2)}, {HoloMap::identity(2)}}
                                          : library_atlas({chart}, chart);
        auto tau = tau_invariant(ec, atlas, todd(2));
        auto words = ec->action.letters();
        if (chart == "mobius") EXPECT_GT(sample_max(tau, enumerate_keys(*ec, 0, 2, words)), 1e-4);
        auto r = check_vanishes(mixed_differential(tau), enumerate_total(*ec, 3, words), kTelescopingTol);
        EXPECT_TRUE(r.pass) << chart << ": " << r.max_residual << " at " << r.worst_key;
    }
}

TEST(Tau, MixedCechAndGroupIsClosed) {
    auto ec = context(sector_cover(3, 60), two_generators());
    auto tau = tau_invariant(ec, library_atlas({"shear", "mobius", "exp_twist"}, "lib"), todd(2));
    auto words = ec->action.letters();
    EXPECT_GT(sample_max(tau, enumerate_keys(*ec, 1, 1, words)), 1e-4);
    auto r = check_vanishes(mixed_differential(tau), enumerate_total(*ec, 3, words), kTelescopingTol);
    EXPECT_TRUE(r.pass) << r.max_residual << " at " << r.worst_key;
}

TEST(Tau, CorruptedInverseIsRejected) {
    auto ec = context(sector_cover(2, 20), GroupAction::trivial(2, 2));
    auto atlas = library_atlas({"shear", "mobius"}, "lib");
    atlas.inverses[0] = lib("henon").inverse.value();
    EXPECT_THROW(tau_invariant(ec, atlas, todd(2)), ValidationError);
}

TEST(Tau, WrongTotalDegreeThrows) {
    auto ec = context(sector_cover(2, 20), GroupAction::trivial(2, 2));
    auto tau = tau_invariant(ec, library_atlas({"shear", "mobius"}, "lib"), todd(2));
    EXPECT_THROW(tau.value(Key{{0, 1}, {}}), ValidationError);
}

TEST(Witness, IdenticalAtlasesGiveZero) {
    auto ec = context(sector_cover(3, 60), GroupAction::trivial(2, 3));
    auto a = library_atlas({"shear", "mobius", "exp_twist"}, "lib");
    auto w = cohomologous_witness(ec, a, a, todd(2));
    EXPECT_LT(sample_max(w, enumerate_total(*ec, 1, {})), 1e-12);
}

TEST(Witness, BoundsTheDifference) {
    auto ec = context(sector_cover(3, 60), GroupAction::trivial(2, 3));
    auto a = library_atlas({"shear", "mobius", "exp_twist"}, "first");
    auto h = lib("henon");
    auto aff = lib("affine");
    for (bool affine : {true, false}) {
        Atlas b = a;
        b.name = "second";
        const auto& psi = affine ? aff : h;
        b.charts[1] = compose(psi.forward, a.charts[1]);
        b.inverses[1] = compose(a.inverses[1], *psi.inverse);
        auto t1 = tau_invariant(ec, a, todd(2));
        auto t2 = tau_invariant(ec, b, todd(2));
        auto w = cohomologous_witness(ec, a, b, todd(2));
        auto keys = enumerate_total(*ec, 2, {});
        auto diff = difference(t1, t2);
        if (affine)
            EXPECT_LT(sample_max(diff, keys), 1e-12);
        else
            EXPECT_GT(sample_max(diff, keys), 1e-4);
        auto r = compare_cochains(mixed_differential(w), &diff, keys, kTelescopingTol);
        EXPECT_TRUE(r.pass) << (affine ? "affine " : "henon ") << r.max_residual << " at " << r.worst_key;
    }
}

TEST(Witness, MixedDegrees) {
    auto ec = context(sector_cover(3, 60), two_generators());
    auto a = library_atlas({"shear", "mobius", "exp_twist"}, "first");
    Atlas b = a;
    b.name = "second";
    auto t = lib("exp_twist");
    b.charts[2] = compose(t.forward, a.charts[2]);
    b.inverses[2] = compose(a.inverses[2], *t.inverse);
    auto w = cohomologous_witness(ec, a, b, todd(2));
    auto diff = difference(tau_invariant(ec, a, todd(2)), tau_invariant(ec, b, todd(2)));
    auto r = compare_cochains(mixed_differential(w), &diff, enumerate_total(*ec, 2, ec->action.letters()),
                              kTelescopingTol);
    EXPECT_TRUE(r.pass) << r.max_residual << " at " << r.worst_key;
}

TEST(Reports, JsonShape) {
    auto ec = context(sector_cover(3, 60), GroupAction::trivial(2, 3));
    auto tau = tau_invariant(ec, library_atlas({"shear", "mobius", "exp_twist"}, "lib"), todd(2));
    auto r = check_vanishes(mixed_differential(tau), enumerate_keys(*ec, 3, 0, {}), kTelescopingTol);
    auto j = r.to_json();
    EXPECT_EQ(j["keys"].size(), r.keys.size());
    EXPECT_EQ(j["keys"][0]["bidegree"][1], 0);
    EXPECT_TRUE(j.contains("worst_key"));
}
