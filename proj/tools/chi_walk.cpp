// chi-walk: evaluation harness, session server and session replay.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numeric>

#include "chiloc/eval/eval.hpp"
#include "chiloc/server/server.hpp"
#include "chiloc/session/session.hpp"
#include "chiloc/sim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitProperty = 3;

struct EvalArgs {
    std::string scenario = "builtin:grid100";
    std::vector<std::string> approaches;
    std::size_t seeds = 20;
    std::uint64_t first_seed = 1;
    double horizon = 24000.0;
    double checkpoint = 250.0;
    std::string out = "eval-out";
    bool svg = false;
    bool check = false;
    unsigned threads = 0;
};

int run_eval(const EvalArgs& args) {
    std::vector<chiloc::ApproachConfig> approaches;
    try {
        for (const auto& a : args.approaches) approaches.push_back(chiloc::ApproachConfig::parse(a));
        if (approaches.empty()) approaches.push_back(chiloc::ApproachConfig::parse("chi"));
        if (args.seeds == 0) throw std::invalid_argument("--seeds must be >= 1");
        chiloc::resolve_scenario(args.scenario, args.first_seed);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    std::vector<std::uint64_t> seeds(args.seeds);
    std::iota(seeds.begin(), seeds.end(), args.first_seed);

    chiloc::EvalOptions options;
    options.horizon = args.horizon;
    options.checkpoint = args.checkpoint;
    chiloc::EvalReport report;
    try {
        report = chiloc::run_evaluation(args.scenario, approaches, seeds, options, args.threads);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    std::filesystem::create_directories(args.out);
    const std::filesystem::path dir(args.out);
    {
        std::ofstream f(dir / "curves.csv");
        chiloc::write_curves_csv(f, report);
    }
    std::map<std::string, std::vector<chiloc::SeriesPoint>> means;
    std::map<std::string, chiloc::ApproachConfig> by_label;
    for (const auto& a : approaches) {
        means[a.label] = report.mean_curve(a.label);
        by_label[a.label] = a;
    }
    {
        std::ofstream f(dir / "expense.csv");
        chiloc::write_expense_csv(f, chiloc::error_vs_expense(means, by_label, chiloc::kDefaultErrorTargets));
    }
    if (args.svg) {
        std::ofstream f(dir / "curves.svg");
        f << chiloc::curves_svg(report);
    }

    for (const auto& a : approaches) {
        const auto& m = means[a.label];
        std::printf("%-12s final mean error %.3f at t=%g\n", a.label.c_str(), m.back().error, m.back().t);
    }
    if (!args.check) return kExitOk;
    bool ok = true;
    for (const auto& c : chiloc::check_properties(report)) {
        std::printf("%s %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        ok = ok && c.passed;
    }
    return ok ? kExitOk : kExitProperty;
}

int run_replay(const std::string& path, bool print_state) {
    try {
        const chiloc::Session s = chiloc::load_session(path);
        std::printf("replayed %zu events, %zu marks, %zu trajectories, %zu APs positioned: state matches\n",
                    s.events().size(), s.marks().size(), s.trajectory_count(), s.constellation().size());
        if (print_state) std::cout << s.state_json().dump(2) << '\n';
        return kExitOk;
    } catch (const chiloc::ReplayMismatchError& e) {
        std::cerr << "replay mismatch: " << e.what() << '\n';
        return kExitProperty;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chi-walk: indoor AP localization by guided walking"};
    app.require_subcommand(1);

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Run the localization-process comparison");
    eval_cmd->add_option("--scenario", eval.scenario, "Scenario file or builtin:grid100 / builtin:office17");
    eval_cmd->add_option("--approach", eval.approaches, "chi, fp:<p>,<c> or crowd:<k>; repeatable")->delimiter(';');
    eval_cmd->add_option("--seeds", eval.seeds, "Number of seeds");
    eval_cmd->add_option("--first-seed", eval.first_seed, "First seed of the consecutive range");
    eval_cmd->add_option("--horizon", eval.horizon, "Time horizon")->check(CLI::NonNegativeNumber);
    eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint spacing")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--out", eval.out, "Output directory");
    eval_cmd->add_option("--threads", eval.threads, "Worker threads (0 = all cores)");
    eval_cmd->add_flag("--svg", eval.svg, "Also write curves.svg");
    eval_cmd->add_flag("--check", eval.check, "Check the ordering properties; exit 3 on violation");

    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the session HTTP API");
    serve_cmd->add_option("--host", host, "Bind address");
    serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(0, 65535));

    std::string session_path;
    bool print_state = false;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run a saved session event log and verify the state");
    replay_cmd->add_option("session", session_path, "Session JSON file")->required();
    replay_cmd->add_flag("--print", print_state, "Print the replayed state");

    std::string scenario_spec;
    std::uint64_t scenario_seed = 1;
    std::string scenario_out;
    auto* scen_cmd = app.add_subcommand("scenario", "Write a scenario file");
    scen_cmd->add_option("spec", scenario_spec, "builtin:grid100, builtin:office17 or a scenario file")->required();
    scen_cmd->add_option("--seed", scenario_seed, "Seed for builtin generators");
    scen_cmd->add_option("-o,--out", scenario_out, "Output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    if (*eval_cmd) return run_eval(eval);
    if (*replay_cmd) return run_replay(session_path, print_state);
    if (*scen_cmd) {
        try {
            const chiloc::Scenario s = chiloc::resolve_scenario(scenario_spec, scenario_seed);
            if (scenario_out.empty()) {
                std::cout << chiloc::scenario_to_json(s).dump(2) << '\n';
            } else {
                chiloc::save_scenario(s, scenario_out);
            }
            return kExitOk;
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return kExitConfig;
        }
    }
    if (*serve_cmd) {
        chiloc::HttpServer server;
        std::printf("serving on http://%s:%d\n", host.c_str(), port);
        std::fflush(stdout);
        if (!server.listen(host, port)) {
            std::cerr << "could not bind " << host << ':' << port << '\n';
            return kExitConfig;
        }
    }
    return kExitOk;
}
