#pragma once

// Access to the Tiny fixture corpus shipped under fixtures/tiny.

#include "tws/codegen.hpp"
#include "tws/constrainer.hpp"
#include "tws/lexgen.hpp"
#include "tws/parsegen.hpp"
#include "tws/pipeline.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tws::testing {

std::filesystem::path fixture_dir();
std::string read_text(const std::filesystem::path& p);

struct ExpectedRun
{
    std::string input;
    std::string output;
    std::string exit; // "halted" or a trap name
};

struct CorpusProgram
{
    std::string name;
    std::string source;
    std::vector<ExpectedRun> runs;
};

struct ErrorProgram
{
    std::string name;
    std::string source;
    std::vector<std::string> codes;
};

/// Clean programs with their expected runs, sorted by name.
const std::vector<CorpusProgram>& corpus();
/// Programs seeded with one static error, sorted by name.
const std::vector<ErrorProgram>& error_corpus();
const CorpusProgram& corpus_program(const std::string& name);

struct TinySpecs
{
    std::string scanner;
    std::string grammar;
    std::string constrain;
    std::string codegen;
};
const TinySpecs& tiny_specs();

/// The four Tiny tools built once and shared.
struct TinyTools
{
    lexgen::ScannerAutomaton scanner;
    parsegen::LalrTable table;
    constrainer::ConstrainSpec constrain;
    codegen::GenSpec gen;
};
const TinyTools& tiny_tools();

SynTree parse_tiny(const std::string& source);
constrainer::ConstrainResult constrain_tiny(const std::string& source);

/// A workspace with the Tiny specs loaded (nothing compiled).
pipeline::Workspace tiny_workspace(const std::string& name = "tiny");

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir
{
  public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

} // namespace tws::testing
