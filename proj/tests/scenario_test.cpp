#include "cocycle/scenario.hpp"

#include <gtest/gtest.h>

using namespace cocycle;
namespace scn = cocycle::scn;
using nlohmann::json;

namespace {

json henon_json() {
    std::ifstream in(std::string(COCYCLE_SCENARIO_DIR) + "/henon_z.scn");
    return json::parse(in);
}

std::string validation_message(const json& j) {
    try {
        scn::load_scenario(j, "h");
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

json strip_timing(json report) {
    for (auto& c : report["checks"]) c.erase("timing_ms");
    return report;
}

}  // namespace

TEST(Partitions, CountsMatchPartitionNumbers) {
    const std::vector<std::size_t> p = {1, 2, 3, 5, 7, 11, 15, 22, 30, 42};
    for (int d = 1; d <= 10; ++d) EXPECT_EQ(scn::integer_partitions(d).size(), p[d - 1]) << d;
    for (const auto& q : scn::integer_partitions(6)) {
        int sum = 0;
        for (int part : q.parts()) sum += part;
        EXPECT_EQ(sum, 6);
    }
}

TEST(Symfun, CommandLines) {
    EXPECT_EQ(scn::detail::symfun_lines("todd", 2).front(), "(1/12)(S1^2 + S2) = (1/24)(3 T1^2 - T2)");
    EXPECT_NE(scn::detail::symfun_lines("chern", 3).front().find("= (1/6) T3"), std::string::npos);
    auto conv = scn::detail::symfun_lines("convert", 2);
    EXPECT_EQ(conv[0], "T2 = S1^2 - 2 S2");
    EXPECT_EQ(conv[1], "S2 = (1/2)(T1^2 - T2)");
    EXPECT_THROW(scn::detail::symfun_lines("todd", 0), ValidationError);
    EXPECT_THROW(scn::detail::symfun_lines("euler", 2), ValidationError);
}

TEST(Loader, ShippedScenariosPass) {
    for (const std::string name : {"affine_torus.scn", "henon_z.scn"}) {
        auto s = scn::load_scenario_file(std::string(COCYCLE_SCENARIO_DIR) + "/" + name);
        bool ok = false;
        auto r = scn::run_scenario(s, &ok);
        EXPECT_TRUE(ok) << r.dump(2);
        EXPECT_EQ(r["scenario_hash"].get<std::string>().rfind("fnv1a64:", 0), 0u);
    }
}

TEST(Loader, UndefinedMapIsNamedWithLocation) {
    auto j = henon_json();
    j["action"]["generators"][0]["inverse"] = "henon_inverse_typo";
    auto msg = validation_message(j);
    EXPECT_NE(msg.find("henon_inverse_typo"), std::string::npos) << msg;
    EXPECT_NE(msg.find("/action/generators/0/inverse"), std::string::npos) << msg;

    j = henon_json();
    j["atlases"]["plain"][0]["chart"] = "nowhere";
    msg = validation_message(j);
    EXPECT_NE(msg.find("'nowhere'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("/atlases/plain/0/chart"), std::string::npos) << msg;

    j = henon_json();
    j["checks"][2]["second"] = "missing_atlas";
    msg = validation_message(j);
    EXPECT_NE(msg.find("missing_atlas"), std::string::npos) << msg;
    EXPECT_NE(msg.find("/checks/2/second"), std::string::npos) << msg;
}

TEST(Loader, MapTextErrorsCarryTheMapName) {
    auto j = henon_json();
    j["maps"]["henon"] = "z2; z2^2 + unknown_const - z1";
    auto msg = validation_message(j);
    EXPECT_NE(msg.find("/maps/henon"), std::string::npos) << msg;
}

TEST(Loader, RejectsBadFields) {
    auto j = henon_json();
    j["checks"][0]["tol"] = 0;
    EXPECT_NE(validation_message(j).find("tolerance must be positive"), std::string::npos);
    j = henon_json();
    j["checks"][0]["type"] = "mystery";
    EXPECT_NE(validation_message(j).find("unknown check type 'mystery'"), std::string::npos);
    j = henon_json();
    j["constants"]["c"][0]["den"] = "0";
    EXPECT_NE(validation_message(j).find("zero denominator"), std::string::npos);
    j = henon_json();
    j["dimension"] = 0;
    EXPECT_FALSE(validation_message(j).empty());
    j = henon_json();
    j["atlases"]["plain"].push_back({{"chart", "id"}, {"inverse", "id"}});
    EXPECT_NE(validation_message(j).find("one chart per cover index"), std::string::npos);
    j = henon_json();
    j["checks"][0]["invariant"]["degree"] = 0;
    EXPECT_NE(validation_message(j).find("degree must be at least 1"), std::string::npos);
}

TEST(Loader, WrongInverseIsRejected) {
    auto j = henon_json();
    j["action"]["generators"][0]["inverse"] = "henon";
    EXPECT_FALSE(validation_message(j).empty());
}

TEST(Loader, RationalConstantsAreExact) {
    auto s = scn::load_scenario(henon_json(), "h");
    EXPECT_EQ(s.constants.at("c").re, Rational(3, 10));
    EXPECT_EQ(s.constants.at("c").im, Rational(1, 5));
    EXPECT_EQ(s.constants.at("q").re, Rational(-1, 7));
}

TEST(Report, DeterministicModuloTiming) {
    auto s = scn::load_scenario(henon_json(), scn::fnv1a(henon_json().dump()));
    EXPECT_EQ(strip_timing(scn::run_scenario(s)).dump(), strip_timing(scn::run_scenario(s)).dump());
}

TEST(Report, RuntimeErrorsDoNotAbortTheBatch) {
    scn::Scenario s;
    s.name = "errors";
    s.n = 2;
    s.checks.push_back({"boom", "custom", []() -> scn::CheckOutcome { throw DomainError("singular point"); }});
    s.checks.push_back({"fine", "custom", [] { return scn::CheckOutcome{}; }});
    bool ok = true;
    auto r = scn::run_scenario(s, &ok);
    EXPECT_FALSE(ok);
    ASSERT_EQ(r["checks"].size(), 2u);
    EXPECT_EQ(r["checks"][0]["status"], "error");
    EXPECT_NE(r["checks"][0]["message"].get<std::string>().find("singular point"), std::string::npos);
    EXPECT_EQ(r["checks"][1]["status"], "pass");
    EXPECT_FALSE(r["pass"].get<bool>());
}

TEST(Checks, NonAffineAtlasDoesNotVanish) {
    auto j = henon_json();
    j["checks"] = json::array({{{"type", "tau_vanishes"}, {"atlas", "projective"}, {"invariant", {{"kind", "todd"}, {"degree", 2}}}}});
    auto r = scn::run_scenario(scn::load_scenario(j, "h"));
    EXPECT_EQ(r["checks"][0]["status"], "fail");
    EXPECT_GT(r["checks"][0]["max_residual"].get<double>(), 1e-4);
}

TEST(Checks, GroupPartFilterKeepsOnlyCechDegreeZero) {
    auto j = henon_json();
    j["checks"] = json::array(
        {{{"type", "tau_closed"}, {"atlas", "projective"}, {"cech_degree", 0}, {"invariant", {{"kind", "todd"}, {"degree", 2}}}}});
    auto r = scn::run_scenario(scn::load_scenario(j, "h"));
    ASSERT_EQ(r["checks"][0]["status"], "pass");
    for (const auto& k : r["checks"][0]["details"]["keys"]) EXPECT_EQ(k["bidegree"][0], 0);
}

TEST(Checks, TelescopingControlIsDetected) {
    auto lib = library::standard(2);
    std::vector<HoloMap> steps = {lib[2].forward, lib[3].forward, lib[4].forward};
    std::vector<Point> pts;
    for (int i = 0; i < 12; ++i) pts.push_back(Point::Constant(2, std::complex<double>(0.1 + 0.01 * i, 0.05)));
    auto s = ChartSimplex::from_chain(lib[1].forward, steps, pts);
    auto o = scn::telescoping_check(s, invariant_from_symfun(todd_component(2), 2), kTelescopingTol, true);
    EXPECT_EQ(o.status, "pass") << o.message;
    EXPECT_FALSE(o.details["negative_control"]["pass"].get<bool>());
}

TEST(Checks, HartogsExpectations) {
    scn::Scenario s;
    s.n = 2;
    s.points = {Point{{0.3, 0.1}, {-0.2, 0.4}}, Point{{0.5, -0.1}, {0.1, 0.2}}};
    auto run = [&](json j) { return scn::detail::prepare_check(s, j, "/t").run(); };
    EXPECT_EQ(run({{"type", "hartogs"}, {"expression", "z1*z4"}, {"diagonal", "z1*z2"}}).status, "pass");
    EXPECT_EQ(run({{"type", "hartogs"}, {"expression", "z1*z4"}, {"diagonal", "z1*z1"}}).status, "fail");
    EXPECT_EQ(run({{"type", "hartogs"}, {"expression", "1/(z3 - z1)"}}).status, "fail");
    EXPECT_EQ(run({{"type", "hartogs"}, {"expression", "1/(z3 - z1)"}, {"expect", "singular"}}).status, "pass");
}
