// twsc: batch front end over a workspace directory.
//
//   twsc compile   -w DIR
//   twsc run       -w DIR -s FILE [--no-optimize]
//   twsc interpret -w DIR --input "5" [--trace] [--max-steps N]
//   twsc serve     --port P --data DIR [--static DIR]
//
// Exit status: 0 success, 1 diagnostics or a runtime trap, 2 usage error.

#include "tws/pipeline.hpp"
#include "tws/service.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace tws;
using nlohmann::ordered_json;

constexpr int exit_ok = 0;
constexpr int exit_diagnostics = 1;
constexpr int exit_usage = 2;

void print_diagnostics(const std::vector<pipeline::Diagnostic>& diags, std::string_view where)
{
    for (const auto& d : diags)
        std::cerr << where << ":" << d.pos.line << ":" << d.pos.col << ": " << d.code << ": " << d.message << "\n";
}

void print_subfases(const std::vector<pipeline::SubfaseReport>& subfases)
{
    for (const auto& s : subfases) {
        std::cout << pipeline::subfase_name(s.subfase) << ": " << pipeline::status_name(s.status) << "\n";
        print_diagnostics(s.diagnostics, pipeline::subfase_name(s.subfase));
    }
}

pipeline::Workspace open_workspace(const std::string& dir)
{
    return pipeline::load_workspace(dir);
}

int cmd_compile(const std::string& dir, bool json)
{
    auto ws = open_workspace(dir);
    auto report = ws.compile();
    pipeline::save_workspace(ws, dir);
    if (json)
        std::cout << pipeline::to_json(report) << "\n";
    else
        print_subfases(report.subfases);
    return report.ok() ? exit_ok : exit_diagnostics;
}

int cmd_run(const std::string& dir, const std::string& source_file, bool optimize, bool json)
{
    std::ifstream in(source_file, std::ios::binary);
    if (!in) {
        std::cerr << "cannot read " << source_file << "\n";
        return exit_usage;
    }
    std::ostringstream ss;
    ss << in.rdbuf();

    auto ws = open_workspace(dir);
    auto report = ws.run(ss.str(), optimize);
    pipeline::save_workspace(ws, dir);
    if (report.refusal) {
        std::cerr << report.refusal->code << ": " << report.refusal->message << "\n";
        return exit_diagnostics;
    }
    if (json) {
        std::cout << pipeline::to_json(report) << "\n";
    } else {
        print_subfases(report.subfases);
        const auto& gen = report.subfases.back();
        if (gen.status == pipeline::Status::Fresh)
            std::cout << ordered_json::parse(gen.payload).at("listing").get<std::string>();
    }
    return report.ok() ? exit_ok : exit_diagnostics;
}

int cmd_interpret(const std::string& dir, const std::string& input, bool trace, std::uint64_t max_steps)
{
    auto ws = open_workspace(dir);
    pipeline::Limits limits;
    limits.max_steps = max_steps;
    auto report = ws.interpret(input, limits);
    if (report.refusal) {
        std::cerr << report.refusal->code << ": " << report.refusal->message << "\n";
        return exit_diagnostics;
    }
    pipeline::save_workspace(ws, dir);
    if (trace) {
        for (const auto& r : report.result.trace)
            std::cout << vm::to_json_line(r) << "\n";
    }
    std::cout << report.result.output << std::flush;
    if (report.result.trap) {
        const auto& t = *report.result.trap;
        std::cerr << "trap: " << vm::trap_name(t.kind) << " at pc " << t.pc << " (step " << t.step << ")\n";
        return exit_diagnostics;
    }
    return exit_ok;
}

int cmd_serve(service::Config cfg)
{
    service::Service svc(std::move(cfg));
    return service::serve(svc);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Translator writing system: compile compiler specs, run programs, step the machine"};
    app.require_subcommand(1);

    std::string dir;
    bool json = false;

    auto* compile = app.add_subcommand("compile", "build the scanner, parser, constrainer and generator");
    compile->add_option("-w,--workspace", dir, "workspace directory")->required();
    compile->add_flag("--json", json, "print the full report as JSON");

    std::string source_file;
    bool no_optimize = false;
    auto* run = app.add_subcommand("run", "scan, parse, check and generate code for a source file");
    run->add_option("-w,--workspace", dir, "workspace directory")->required();
    run->add_option("-s,--source", source_file, "source program")->required();
    run->add_flag("--no-optimize", no_optimize, "skip the peephole optimizer");
    run->add_flag("--json", json, "print the full report as JSON");

    std::string input;
    bool trace = false;
    std::uint64_t max_steps = pipeline::Limits{}.max_steps;
    auto* interpret = app.add_subcommand("interpret", "execute the generated code");
    interpret->add_option("-w,--workspace", dir, "workspace directory")->required();
    interpret->add_option("--input", input, "whitespace-separated integers for READ");
    interpret->add_flag("--trace", trace, "print one JSON line per step before the output");
    interpret->add_option("--max-steps", max_steps, "step limit");

    service::Config cfg;
    std::string data_dir;
    std::string static_dir;
    auto* serve = app.add_subcommand("serve", "serve the HTTP API");
    auto* port_opt = serve->add_option("--port", cfg.port, "TCP port (TWS_PORT)");
    auto* data_opt = serve->add_option("--data", data_dir, "workspace storage directory (TWS_DATA_DIR)");
    serve->add_option("--static", static_dir, "directory of web UI files to serve");
    serve->add_option("--host", cfg.host, "bind address");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    try {
        if (*compile)
            return cmd_compile(dir, json);
        if (*run)
            return cmd_run(dir, source_file, !no_optimize, json);
        if (*interpret)
            return cmd_interpret(dir, input, trace, max_steps);
        if (*serve) {
            service::Config env = service::config_from_env(cfg);
            if (port_opt->count())
                env.port = cfg.port;
            if (data_opt->count())
                env.data_dir = data_dir;
            if (!static_dir.empty())
                env.static_dir = static_dir;
            return cmd_serve(env);
        }
    } catch (const pipeline::PersistError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_diagnostics;
    }
    return exit_usage;
}
