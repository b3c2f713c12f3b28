#pragma once

// Workspaces: four spec slots plus a source text, the three phases
// (Compiler, Run, Interpreter) over them, and a content-hashed artifact cache
// that makes every edit visible downstream as staleness.

#include "tws/common.hpp"
#include "tws/tinyvm.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tws::pipeline {

enum class Subfase
{
    Scanner,
    Parser,
    Contrainer,
    Generator,
    Source,
    Scanning,
    Parsing,
    Constrain,
    GenCode,
    Code,
};

inline constexpr std::array<Subfase, 10> all_subfases = {
    Subfase::Scanner, Subfase::Parser,  Subfase::Contrainer, Subfase::Generator, Subfase::Source,
    Subfase::Scanning, Subfase::Parsing, Subfase::Constrain,  Subfase::GenCode,   Subfase::Code,
};
inline constexpr std::array<Subfase, 4> phase1_subfases = {Subfase::Scanner, Subfase::Parser, Subfase::Contrainer,
                                                           Subfase::Generator};
inline constexpr std::array<Subfase, 5> phase2_subfases = {Subfase::Source, Subfase::Scanning, Subfase::Parsing,
                                                           Subfase::Constrain, Subfase::GenCode};

std::string_view subfase_name(Subfase s);
std::optional<Subfase> subfase_from_name(std::string_view name);

/// Editable texts. The four spec slots plus the program source.
enum class Slot
{
    Scanner,
    Parser,
    Contrainer,
    Generator,
    Source,
};

inline constexpr std::array<Slot, 4> spec_slots = {Slot::Scanner, Slot::Parser, Slot::Contrainer, Slot::Generator};

/// Lower-case API name: "scanner", "parser", "contrainer", "generator", "source".
std::string_view slot_name(Slot s);
std::optional<Slot> slot_from_name(std::string_view name);
/// File name inside a persisted workspace directory.
std::string_view slot_file(Slot s);

/// The texts a subfase's artifact is computed from, in hashing order.
std::vector<Slot> dependencies(Subfase s);

enum class Status
{
    Absent,
    Fresh,
    Stale,
    Failed,
};

std::string_view status_name(Status s);

namespace codes {
inline const std::string missing_spec = "E_MISSING_SPEC";
inline const std::string missing_source = "E_MISSING_SOURCE";
inline const std::string spec_error = "E_SPEC";
inline const std::string conflict = "E_CONFLICT";
inline const std::string cross_link = "E_CROSS_LINK";
inline const std::string lex_error = "E_LEX";
inline const std::string parse_error = "E_PARSE";
inline const std::string gen_error = "E_GEN";
inline const std::string stale_upstream = "E_STALE_UPSTREAM";
} // namespace codes

struct Diagnostic
{
    std::string code;
    std::string message;
    SourcePos pos;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// One cached result. `payload` is JSON text and is kept even for failures
/// when there is something useful to show (e.g. the decorated tree).
struct Artifact
{
    std::string hash;
    bool failed = false;
    std::vector<Diagnostic> diagnostics;
    std::string payload = "{}";

    friend bool operator==(const Artifact&, const Artifact&) = default;
};

struct SubfaseReport
{
    Subfase subfase = Subfase::Scanner;
    Status status = Status::Absent;
    std::vector<Diagnostic> diagnostics;
    std::string payload = "{}";
};

/// Why a phase did not start: the subfases it needs that are not fresh.
struct Refusal
{
    std::string code;
    std::string message;
    std::vector<std::string> blocking; // "Scanner: stale", ...
};

struct Phase1Report
{
    std::vector<SubfaseReport> subfases;
    bool ok() const;
};

struct Phase2Report
{
    std::optional<Refusal> refusal;
    std::vector<SubfaseReport> subfases;
    bool ok() const;
};

struct Phase3Report
{
    std::optional<Refusal> refusal;
    std::string input;
    vm::RunResult result;
    std::size_t memory_size = 0;
    bool halted() const { return !refusal && !result.trap; }
};

struct Limits
{
    std::uint64_t max_steps = 1'000'000;
    std::size_t max_trace = 100'000;
};

/// A program ready for the VM, as produced by GenCode.
struct Program
{
    codegen::MachineCode code;
    std::size_t memory_size = 0;
};

/// Lower-case hex SHA-256 digest; the function behind every input hash.
std::string sha256_hex(std::string_view bytes);

class Workspace
{
  public:
    Workspace(std::string id, std::string name);
    ~Workspace();
    Workspace(const Workspace&);
    Workspace& operator=(const Workspace&);
    Workspace(Workspace&&) noexcept;
    Workspace& operator=(Workspace&&) noexcept;

    const std::string& id() const { return id_; }
    const std::string& name() const { return name_; }

    const std::optional<std::string>& text(Slot s) const { return texts_[static_cast<std::size_t>(s)]; }
    void set_text(Slot s, std::optional<std::string> text);
    void set_spec(Slot s, std::string text) { set_text(s, std::move(text)); }
    void set_source(std::string text) { set_text(Slot::Source, std::move(text)); }

    /// Hash of the current texts the subfase depends on.
    std::string input_hash(Subfase s) const;

    Status status(Subfase s) const;
    std::map<Subfase, Status> status() const;

    const std::map<Subfase, Artifact>& artifacts() const { return cache_; }
    const Artifact* artifact(Subfase s) const;

    Phase1Report compile();
    Phase2Report run(bool optimize = true);
    Phase2Report run(std::string source, bool optimize = true);
    // keeps a string literal from binding to run(bool)
    Phase2Report run(const char* source, bool optimize = true) { return run(std::string(source), optimize); }
    Phase3Report interpret(std::string_view input_text, const Limits& limits = {});

    /// The assembled program when Code is fresh; otherwise a refusal.
    std::optional<Program> program(Refusal* why = nullptr) const;

    /// Replaces the cache wholesale (persistence).
    void restore_cache(std::map<Subfase, Artifact> cache);

  private:
    struct Compiled;

    std::string id_;
    std::string name_;
    std::array<std::optional<std::string>, 5> texts_;
    std::map<Subfase, Artifact> cache_;
    std::unique_ptr<Compiled> compiled_;

    SubfaseReport report(Subfase s) const;
    std::optional<Refusal> refuse_unless_fresh(const std::vector<Subfase>& needed, const std::string& action) const;
    void store(Subfase s, Artifact a);
    void erase_from(Subfase first);
    Compiled& compiled();
};

Workspace create_workspace(std::string name);
/// Random 128-bit hex identifier.
std::string new_workspace_id();

class PersistError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr int manifest_schema_version = 1;

/// Writes `dir/manifest.json`, the slot files and `dir/artifacts/*.json`.
/// Every file is written to a temporary name and renamed into place.
void save_workspace(const Workspace& ws, const std::filesystem::path& dir);

/// Reads a directory written by save_workspace. A directory holding only
/// slot files (no manifest) loads as a workspace named after the directory
/// with an empty cache. Throws PersistError.
Workspace load_workspace(const std::filesystem::path& dir);

/// JSON renderings used by the HTTP API and the command-line tool.
std::string to_json(const Phase1Report& r);
std::string to_json(const Phase2Report& r);
std::string to_json(const Phase3Report& r);
std::string to_json(const Refusal& r);
std::string status_json(const Workspace& ws);

} // namespace tws::pipeline
