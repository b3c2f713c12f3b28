#include "fixtures.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tws::testing {

namespace fs = std::filesystem;

fs::path fixture_dir()
{
    return fs::path(TWS_FIXTURE_DIR) / "tiny";
}

std::string read_text(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::vector<CorpusProgram>& corpus()
{
    static const std::vector<CorpusProgram> programs = [] {
        std::vector<CorpusProgram> out;
        for (const auto& e : fs::directory_iterator(fixture_dir() / "programs")) {
            if (e.path().extension() != ".tiny")
                continue;
            CorpusProgram p;
            p.name = e.path().stem().string();
            p.source = read_text(e.path());
            auto j = nlohmann::json::parse(read_text(fs::path(e.path()).replace_extension(".json")));
            for (const auto& r : j.at("runs"))
                p.runs.push_back({r.at("input"), r.at("output"), r.at("exit")});
            out.push_back(std::move(p));
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
        return out;
    }();
    return programs;
}

const std::vector<ErrorProgram>& error_corpus()
{
    static const std::vector<ErrorProgram> programs = [] {
        std::vector<ErrorProgram> out;
        auto expected = nlohmann::json::parse(read_text(fixture_dir() / "errors" / "expected.json"));
        for (const auto& e : fs::directory_iterator(fixture_dir() / "errors")) {
            if (e.path().extension() != ".tiny")
                continue;
            ErrorProgram p;
            p.name = e.path().stem().string();
            p.source = read_text(e.path());
            p.codes = expected.at(p.name).get<std::vector<std::string>>();
            out.push_back(std::move(p));
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
        return out;
    }();
    return programs;
}

const CorpusProgram& corpus_program(const std::string& name)
{
    for (const auto& p : corpus())
        if (p.name == name)
            return p;
    throw std::out_of_range("no corpus program " + name);
}

const TinySpecs& tiny_specs()
{
    static const TinySpecs specs{
        read_text(fixture_dir() / "scanner.scan"),
        read_text(fixture_dir() / "grammar.grm"),
        read_text(fixture_dir() / "constrain.con"),
        read_text(fixture_dir() / "codegen.gen"),
    };
    return specs;
}

const TinyTools& tiny_tools()
{
    static const TinyTools tools{
        lexgen::build_scanner(lexgen::parse_scanner_spec(tiny_specs().scanner)),
        parsegen::build_lalr(parsegen::parse_grammar_spec(tiny_specs().grammar)),
        constrainer::parse_constrain_spec(tiny_specs().constrain),
        codegen::parse_codegen_spec(tiny_specs().codegen),
    };
    return tools;
}

SynTree parse_tiny(const std::string& source)
{
    return parsegen::parse(tiny_tools().table, lexgen::scan(tiny_tools().scanner, source));
}

constrainer::ConstrainResult constrain_tiny(const std::string& source)
{
    return constrainer::constrain(tiny_tools().constrain, parse_tiny(source));
}

pipeline::Workspace tiny_workspace(const std::string& name)
{
    auto ws = pipeline::create_workspace(name);
    ws.set_spec(pipeline::Slot::Scanner, tiny_specs().scanner);
    ws.set_spec(pipeline::Slot::Parser, tiny_specs().grammar);
    ws.set_spec(pipeline::Slot::Contrainer, tiny_specs().constrain);
    ws.set_spec(pipeline::Slot::Generator, tiny_specs().codegen);
    return ws;
}

TempDir::TempDir()
{
    std::random_device rd;
    for (;;) {
        path_ = fs::temp_directory_path() / ("tws-test-" + std::to_string(rd()));
        if (fs::create_directory(path_))
            return;
    }
}

TempDir::~TempDir()
{
    std::error_code ec;
    fs::remove_all(path_, ec);
}

} // namespace tws::testing
