#include "cocycle/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using cocycle::ValidationError;
using nlohmann::json;
namespace scn = cocycle::scn;

enum Exit { kPass = 0, kFail = 1, kInvalid = 2 };

json read_json_file(const std::string& path, std::string* hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read scenario '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    *hash = scn::fnv1a(buf.str());
    try {
        return json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_report(const json& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write report '" + path + "'");
    out << report.dump(2) << "\n";
}

void print_summary(const json& report) {
    for (const auto& c : report.at("checks"))
        std::cout << c.at("status").get<std::string>() << "  " << c.at("name").get<std::string>()
                  << "  max_residual=" << c.at("max_residual").get<double>() << "\n";
    std::cout << (report.at("pass").get<bool>() ? "PASS" : "FAIL") << "\n";
}

/// Replaces the scenario's checks with one synthesized check and runs it.
int run_single(const std::string& path, json check, const std::string& output) {
    std::string hash;
    json j = read_json_file(path, &hash);
    j["checks"] = json::array({std::move(check)});
    auto s = scn::load_scenario(j, hash);
    bool ok = false;
    auto report = scn::run_scenario(s, &ok);
    if (!output.empty()) write_report(report, output);
    print_summary(report);
    return ok ? kPass : kFail;
}

struct InvariantArgs {
    std::string kind = "todd";
    int degree = 2;
    std::vector<std::string> words;

    void add_to(CLI::App* app) {
        app->add_option("--kind", kind, "invariant: todd or chern")->check(CLI::IsMember({"todd", "chern"}));
        app->add_option("--degree", degree, "form degree k");
        app->add_option("--words", words, "group words for key enumeration");
    }
    void fill(json& check) const {
        check["invariant"] = {{"kind", kind}, {"degree", degree}};
        if (!words.empty()) check["words"] = words;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cocycle-level characteristic class checks"};
    app.require_subcommand(1);
    std::function<int()> action;

    auto* run = app.add_subcommand("run", "run every check of a scenario");
    std::string scenario, output;
    run->add_option("scenario", scenario)->required();
    run->add_option("-o,--output", output, "report path (default: the scenario's output field)");
    run->callback([&] {
        action = [&] {
            auto s = scn::load_scenario_file(scenario);
            bool ok = false;
            auto report = scn::run_scenario(s, &ok);
            write_report(report, output.empty() ? s.output : output);
            print_summary(report);
            return ok ? kPass : kFail;
        };
    });

    auto* symfun = app.add_subcommand("symfun", "print a symmetric function in both bases");
    std::string kind;
    int degree = 0;
    symfun->add_option("kind", kind, "todd, chern or convert")->required();
    symfun->add_option("degree", degree)->required();
    symfun->callback([&] {
        action = [&] {
            for (const auto& line : scn::detail::symfun_lines(kind, degree)) std::cout << line << "\n";
            return kPass;
        };
    });

    auto* bm = app.add_subcommand("bm-check", "kernel closedness and reproducing checks");
    int bm_n = 2, probes = 20, quad_order = 32;
    double step = 1e-3, radius = 1.0;
    bm->add_option("--n", bm_n);
    bm->add_option("--probes", probes);
    bm->add_option("--step", step);
    bm->add_option("--quad-order", quad_order);
    bm->add_option("--radius", radius);
    bm->callback([&] {
        action = [&] {
            if (bm_n < 2) throw ValidationError("--n: the kernel needs n >= 2");
            if (!(step > 0) || radius < 10 * step) throw ValidationError("--radius: probes must lie 10 steps away");
            if (quad_order < cocycle::kMinQuadratureOrder) throw ValidationError("--quad-order: order too small");
            json report = {{"tool", "cocycle"}, {"version", cocycle::kToolVersion}};
            auto dbar = scn::bm_dbar_outcome(bm_n, cocycle::Point::Zero(bm_n), probes, radius, step, 1);
            report["dbar"] = dbar.details;
            bool ok = dbar.status == "pass";
            if (bm_n == 2) {
                auto rep = scn::bm_reproducing_outcome(cocycle::Point::Zero(2), {radius}, quad_order, 1e-3);
                report["reproducing"] = rep.details;
                ok = ok && rep.status == "pass";
            }
            report["pass"] = ok;
            std::cout << report.dump(2) << "\n";
            return ok ? kPass : kFail;
        };
    });

    InvariantArgs inv;
    std::string atlas, first, second;
    double tol = cocycle::kTelescopingTol;

    auto* todd = app.add_subcommand("todd-cocycle", "dump sampled cocycle values for one atlas");
    todd->add_option("scenario", scenario)->required();
    todd->add_option("--atlas", atlas)->required();
    todd->add_option("-o,--output", output);
    inv.add_to(todd);
    todd->callback([&] {
        action = [&] {
            auto s = scn::load_scenario_file(scenario);
            const std::string where = "--atlas";
            const auto& a = s.atlas(atlas, where);
            auto ec = s.require_context(where);
            json check;
            inv.fill(check);
            auto invariant = scn::detail::invariant_from(check, "--invariant");
            std::vector<cocycle::Word> words = ec->action.letters();
            if (!inv.words.empty()) words = scn::detail::words_from(check, *ec, "--words");
            auto dump = scn::tau_dump(ec, a, invariant, words);
            if (output.empty())
                std::cout << dump.dump(2) << "\n";
            else
                write_report(dump, output);
            return kPass;
        };
    });

    auto* verify = app.add_subcommand("verify-cocycle", "check that the cocycle of an atlas is closed");
    verify->add_option("scenario", scenario)->required();
    verify->add_option("--atlas", atlas)->required();
    verify->add_option("--tol", tol);
    std::string verify_output = "cocycle-report.json";
    verify->add_option("-o,--output", verify_output, "report path");
    inv.add_to(verify);
    verify->callback([&] {
        action = [&] {
            json check = {{"type", "tau_closed"}, {"name", "closed " + atlas}, {"atlas", atlas}, {"tol", tol}};
            inv.fill(check);
            return run_single(scenario, check, verify_output);
        };
    });

    auto* group = app.add_subcommand("group-invariant", "check the pure group-cohomology part of the cocycle");
    group->add_option("scenario", scenario)->required();
    group->add_option("--atlas", atlas)->required();
    group->add_option("--tol", tol);
    group->add_option("-o,--output", output);
    inv.add_to(group);
    group->callback([&] {
        action = [&] {
            json check = {{"type", "tau_closed"}, {"name", "group part " + atlas}, {"atlas", atlas},
                          {"tol", tol},          {"cech_degree", 0}};
            inv.fill(check);
            return run_single(scenario, check, output);
        };
    });

    auto* witness = app.add_subcommand("witness", "build and check a witness between two atlases");
    witness->add_option("scenario", scenario)->required();
    witness->add_option("--first", first)->required();
    witness->add_option("--second", second)->required();
    witness->add_option("--tol", tol);
    witness->add_option("-o,--output", output);
    inv.add_to(witness);
    witness->callback([&] {
        action = [&] {
            json check = {{"type", "witness"}, {"name", first + " vs " + second},
                          {"first", first},    {"second", second}, {"tol", tol}};
            inv.fill(check);
            return run_single(scenario, check, output);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kInvalid;
    }
    try {
        return action();
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
}
