#include "coaforge/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "coaforge/http_server.hpp"
#include "coaforge/session.hpp"

namespace coaforge {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError({fmt::format("{}: cannot read file", path)});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw std::runtime_error(fmt::format("{}: cannot write file", path.string()));
}

std::optional<fs::path> data_dir(const std::string& flag)
{
    if (!flag.empty())
        return fs::path(flag);
    if (const char* env = std::getenv("COAFORGE_DATA"); env && *env)
        return fs::path(env);
    return std::nullopt;
}

struct PlanArgs {
    std::vector<std::string> inputs;
    int k = 3;
    int replications = 200;
    std::uint64_t seed = 42;
    std::string weights;
    std::string out;
    std::string layers_out;
};

void print_stage_error(std::ostream& err, const StageError& e)
{
    err << "error: " << e.what() << "\n";
    for (const auto& d : e.details())
        err << "  " << d << "\n";
}

int run_plan(const PlanArgs& args, std::ostream& out, std::ostream& err)
{
    std::string scenario_doc, opord_doc;
    try {
        std::string text[2] = {read_file(args.inputs[0]), read_file(args.inputs[1])};
        std::string kind[2] = {classify_input(args.inputs[0], text[0]), classify_input(args.inputs[1], text[1])};
        if (kind[0].empty() && !kind[1].empty())
            kind[0] = kind[1] == "scenario" ? "opord" : "scenario";
        if (kind[1].empty() && !kind[0].empty())
            kind[1] = kind[0] == "scenario" ? "opord" : "scenario";
        if (kind[0].empty() || kind[0] == kind[1])
            throw ValidationError({fmt::format("cannot tell which of {} and {} is the scenario and which the order",
                args.inputs[0], args.inputs[1])});
        const int s = kind[0] == "scenario" ? 0 : 1;
        scenario_doc = std::move(text[s]);
        opord_doc = std::move(text[1 - s]);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    PlanningConfig config;
    try {
        config.k = args.k;
        config.replications = args.replications;
        config.seed = args.seed;
        if (!args.weights.empty())
            config.weights = parse_weights(args.weights);
        config.apply(config.to_json()); // range checks
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    if (!args.out.empty()) {
        const auto ext = fs::path(args.out).extension();
        if (ext != ".json" && ext != ".txt") {
            err << "error: --out must end in .json or .txt\n";
            return kExitValidation;
        }
    }

    try {
        const auto dir = data_dir("");
        std::optional<PlanningSession> session;
        std::optional<SessionStore> store;
        const std::string id = derived_session_id(scenario_doc, opord_doc);
        std::string json_text, text;
        auto render = [&](PlanningSession& s) {
            const auto& r = s.replan(config.to_json());
            json_text = render_report_json(r);
            text = render_report_text(r);
        };
        if (dir) {
            store.emplace(*dir);
            if (!store->contains(id))
                store->create(scenario_doc, opord_doc, config, id);
            store->with_session(id, render);
        } else {
            session.emplace(PlanningSession::create(id, scenario_doc, opord_doc, config));
            render(*session);
        }

        if (!args.layers_out.empty()) {
            auto write_layers = [&](PlanningSession& s) {
                for (LayerKind k : kLayerKinds)
                    write_file(fs::path(args.layers_out) / fmt::format("{}.txt", to_string(k)), layer_raster(s.terrain(), k));
            };
            if (store)
                store->with_session(id, write_layers);
            else
                write_layers(*session);
        }
        if (args.out.empty()) {
            out << text;
        } else {
            write_file(args.out, fs::path(args.out).extension() == ".json" ? json_text : text);
            // Mission analysis and the recommendation stay visible on stdout.
            std::istringstream lines(text);
            std::string line;
            bool keep = false;
            while (std::getline(lines, line)) {
                if (line.rfind("MISSION ANALYSIS", 0) == 0 || line.rfind("RECOMMENDATION", 0) == 0)
                    keep = true;
                else if (line.empty())
                    keep = false;
                if (keep)
                    out << line << "\n";
            }
            out << "report written to " << args.out << "\n";
        }
        return kExitOk;
    } catch (const StageError& e) {
        print_stage_error(err, e);
        return e.stage() == "load" || e.stage() == "parse" ? kExitValidation : kExitPipeline;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitPipeline;
    }
}

ApiServer* g_server = nullptr;

extern "C" void on_signal(int)
{
    if (g_server)
        g_server->stop();
}

int run_serve(const std::string& host, int port, const std::string& data, std::ostream& out, std::ostream& err)
{
    try {
        SessionStore store(data_dir(data));
        ApiServer server(store);
        const int bound = server.bind(host, port);
        if (bound < 0) {
            err << fmt::format("error: cannot bind {}:{}\n", host, port);
            return kExitPipeline;
        }
        out << fmt::format("listening on {}:{}", host, bound);
        if (store.directory())
            out << fmt::format(" (sessions in {})", store.directory()->string());
        out << std::endl;
        g_server = &server;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        const bool ok = server.serve();
        g_server = nullptr;
        return ok ? kExitOk : kExitPipeline;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitPipeline;
    }
}

} // namespace

std::string classify_input(const std::string& path, const std::string& content)
{
    const auto ext = fs::path(path).extension().string();
    if (ext == ".scn" || ext == ".json")
        return "scenario";
    if (ext == ".opord")
        return "opord";
    const auto first = content.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return "";
    if (content[first] == '{')
        return "scenario";
    if (content.compare(first, 2, "1.") == 0)
        return "opord";
    return "";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Course-of-action planning from a scenario and an operation order", "coaforge"};
    app.require_subcommand(1);

    PlanArgs plan;
    auto* plan_cmd = app.add_subcommand("plan", "Run the planning pipeline and print the report");
    plan_cmd->add_option("inputs", plan.inputs, "Scenario and operation order files, in either order")
        ->required()
        ->expected(2);
    plan_cmd->add_option("--k", plan.k, "Number of friendly CoAs")->check(CLI::PositiveNumber);
    plan_cmd->add_option("--replications", plan.replications, "Monte Carlo replications per CoA")
        ->check(CLI::PositiveNumber);
    plan_cmd->add_option("--seed", plan.seed, "Base seed");
    plan_cmd->add_option("--weights", plan.weights,
        "Criterion weights: success, loss, attrition, duration, reliability");
    plan_cmd->add_option("--out", plan.out, "Write the report to a .json or .txt file");
    plan_cmd->add_option("--layers-out", plan.layers_out, "Write the terrain layer rasters to this directory");

    std::string host = "127.0.0.1";
    int port = 8080;
    std::string data;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the planning API over HTTP");
    serve_cmd->add_option("--host", host, "Listen address");
    serve_cmd->add_option("--port", port, "Listen port (0 picks a free one)")->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--data", data, "Session directory (default: $COAFORGE_DATA, else memory only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        if (app.get_subcommands().empty())
            err << app.help();
        return kExitValidation;
    }

    if (*plan_cmd)
        return run_plan(plan, out, err);
    return run_serve(host, port, data, out, err);
}

} // namespace coaforge
