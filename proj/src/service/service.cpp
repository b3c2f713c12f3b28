#include "tws/service.hpp"

#include "../tinyvm/trace_json.hpp"

#include <json.hpp>

#include <cstdlib>
#include <mutex>

namespace tws::service {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using pipeline::Subfase;

namespace {

std::string dump(const ordered_json& j)
{
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

Response json_response(int status, const ordered_json& j)
{
    return {status, dump(j), "application/json"};
}

Response raw_json(int status, std::string body)
{
    return {status, std::move(body), "application/json"};
}

Response error(int status, const std::string& code, const std::string& message)
{
    return json_response(status, {{"code", code}, {"message", message}});
}

Response no_content()
{
    return {204, "", "application/json"};
}

Response not_found(const std::string& what)
{
    return error(404, "E_NOT_FOUND", what);
}

Response bad_method()
{
    return error(405, "E_METHOD", "method not allowed");
}

/// Thrown while decoding a request body.
struct BadRequest
{
    std::string message;
};

ordered_json parse_body(const std::string& body)
{
    if (body.find_first_not_of(" \t\r\n") == std::string::npos)
        return ordered_json::object();
    ordered_json j;
    try {
        j = ordered_json::parse(body);
    } catch (const ordered_json::parse_error& e) {
        throw BadRequest{std::string("malformed JSON: ") + e.what()};
    }
    if (!j.is_object())
        throw BadRequest{"request body must be a JSON object"};
    return j;
}

template <typename T>
std::optional<T> field(const ordered_json& j, const char* name)
{
    auto it = j.find(name);
    if (it == j.end() || it->is_null())
        return std::nullopt;
    try {
        return it->get<T>();
    } catch (const ordered_json::exception&) {
        throw BadRequest{std::string("field '") + name + "' has the wrong type"};
    }
}

/// Input may be given as text ("1 2 3") or as an array of integers.
std::string input_text(const ordered_json& j)
{
    auto it = j.find("input");
    if (it == j.end() || it->is_null())
        return "";
    if (it->is_string())
        return it->get<std::string>();
    if (it->is_array()) {
        std::string out;
        for (const auto& v : *it) {
            if (!v.is_number_integer())
                throw BadRequest{"'input' array must hold integers"};
            out += std::to_string(v.get<std::int64_t>()) + " ";
        }
        return out;
    }
    throw BadRequest{"'input' must be a string or an array of integers"};
}

std::vector<std::string> split_path(const std::string& path)
{
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        if (path[i] == '/') {
            ++i;
            continue;
        }
        std::size_t j = path.find('/', i);
        if (j == std::string::npos)
            j = path.size();
        parts.push_back(path.substr(i, j - i));
        i = j;
    }
    return parts;
}

std::string random_id()
{
    return pipeline::new_workspace_id();
}

std::uint64_t parse_count(const char* name, const char* text)
{
    char* end = nullptr;
    errno = 0;
    unsigned long long v = std::strtoull(text, &end, 10);
    if (errno || end == text || *end != '\0' || text[0] == '-')
        throw std::invalid_argument(std::string(name) + " must be a non-negative integer");
    return v;
}

} // namespace

Config config_from_env(Config base)
{
    if (const char* v = std::getenv("TWS_PORT")) {
        auto port = parse_count("TWS_PORT", v);
        if (port > 65535)
            throw std::invalid_argument("TWS_PORT out of range");
        base.port = static_cast<int>(port);
    }
    if (const char* v = std::getenv("TWS_DATA_DIR"))
        base.data_dir = v;
    if (const char* v = std::getenv("TWS_MAX_STEPS"))
        base.max_steps = parse_count("TWS_MAX_STEPS", v);
    if (const char* v = std::getenv("TWS_MAX_TRACE"))
        base.max_trace = parse_count("TWS_MAX_TRACE", v);
    return base;
}

struct Service::WorkspaceEntry
{
    std::mutex mutex;
    pipeline::Workspace ws;
    bool deleted = false;

    explicit WorkspaceEntry(pipeline::Workspace w) : ws(std::move(w)) {}
};

struct Service::SessionEntry
{
    std::mutex mutex;
    std::string id;
    std::shared_ptr<WorkspaceEntry> workspace;
    std::string code_hash;
    pipeline::Program program;
    std::vector<std::int64_t> original_input;
    std::uint64_t max_steps = 0;
    std::size_t max_trace = 0;

    vm::MachineState state;
    std::deque<std::int64_t> input;
    std::vector<vm::StepRecord> trace;
    bool trace_truncated = false;
    std::string output;
    std::optional<vm::Trap> trap;

    // what the previous summary already showed
    std::size_t output_reported = 0;
    std::vector<std::int64_t> memory_reported;

    void reset()
    {
        state = vm::load(program.code, program.memory_size);
        input.assign(original_input.begin(), original_input.end());
        trace.clear();
        trace_truncated = false;
        output.clear();
        trap.reset();
        output_reported = 0;
        memory_reported = state.memory;
    }

    std::string status() const
    {
        if (state.halted)
            return "halted";
        return trap ? "trapped" : "runnable";
    }

    ordered_json summary()
    {
        ordered_json j;
        j["session"] = id;
        j["workspace"] = workspace->ws.id();
        j["status"] = status();
        j["trap"] = trap ? vm::trap_json(*trap) : ordered_json(nullptr);
        j["pc"] = state.pc;
        j["step"] = state.steps;
        j["stack"] = state.stack;
        j["memory"] = state.memory;
        ordered_json changes = ordered_json::array();
        for (std::size_t a = 0; a < state.memory.size(); ++a) {
            if (a >= memory_reported.size() || memory_reported[a] != state.memory[a])
                changes.push_back({{"addr", a}, {"value", state.memory[a]}});
        }
        j["memory_changes"] = std::move(changes);
        j["input_queue"] = std::vector<std::int64_t>(input.begin(), input.end());
        j["output"] = output;
        j["output_delta"] = output.substr(output_reported);
        j["trace_length"] = trace.size();
        j["trace_truncated"] = trace_truncated;
        memory_reported = state.memory;
        output_reported = output.size();
        return j;
    }
};

Service::Service(Config config) : config_(std::move(config))
{
    if (config_.data_dir.empty())
        return;
    std::error_code ec;
    fs::create_directories(config_.data_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create data directory " + config_.data_dir.string());
    for (const auto& d : fs::directory_iterator(config_.data_dir)) {
        if (!d.is_directory() || !fs::exists(d.path() / "manifest.json"))
            continue;
        auto ws = pipeline::load_workspace(d.path());
        std::string id = ws.id();
        workspaces_.emplace(id, std::make_shared<WorkspaceEntry>(std::move(ws)));
    }
}

Service::~Service() = default;

std::shared_ptr<Service::WorkspaceEntry> Service::find_workspace(const std::string& id)
{
    std::shared_lock lock(mutex_);
    auto it = workspaces_.find(id);
    return it == workspaces_.end() ? nullptr : it->second;
}

std::shared_ptr<Service::SessionEntry> Service::find_session(const std::string& id)
{
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

void Service::persist(WorkspaceEntry& e)
{
    if (!config_.data_dir.empty() && !e.deleted)
        pipeline::save_workspace(e.ws, config_.data_dir / e.ws.id());
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body)
{
    try {
        return route(method, path, body);
    } catch (const BadRequest& e) {
        return error(400, "E_BAD_REQUEST", e.message);
    } catch (const std::exception& e) {
        return error(500, "E_INTERNAL", e.what());
    }
}

Response Service::route(const std::string& method, const std::string& path, const std::string& body)
{
    auto parts = split_path(path);
    if (parts.empty())
        return not_found(path);

    auto rest_of = [&](std::size_t from) {
        std::string rest;
        for (std::size_t i = from; i < parts.size(); ++i)
            rest += "/" + parts[i];
        return rest;
    };

    if (parts[0] == "workspaces") {
        if (parts.size() == 1) {
            if (method == "GET") {
                std::shared_lock lock(mutex_);
                ordered_json list = ordered_json::array();
                for (const auto& [id, e] : workspaces_)
                    list.push_back({{"id", id}, {"name", e->ws.name()}});
                return json_response(200, list);
            }
            if (method == "POST") {
                auto j = parse_body(body);
                std::string name = field<std::string>(j, "name").value_or("");
                std::unique_lock lock(mutex_);
                std::string id;
                do {
                    id = random_id();
                } while (workspaces_.count(id));
                auto entry = std::make_shared<WorkspaceEntry>(pipeline::Workspace(id, name));
                workspaces_.emplace(id, entry);
                lock.unlock();
                std::lock_guard wl(entry->mutex);
                persist(*entry);
                return json_response(201, {{"id", id}, {"name", name}});
            }
            return bad_method();
        }
        return workspace_route(method, parts[1], rest_of(2), body);
    }
    if (parts[0] == "sessions" && parts.size() >= 2)
        return session_route(method, parts[1], rest_of(2), body);
    return not_found(path);
}

Response Service::workspace_route(const std::string& method, const std::string& id, const std::string& rest,
                                  const std::string& body)
{
    auto entry = find_workspace(id);
    if (!entry)
        return not_found("no workspace " + id);

    if (rest.empty()) {
        if (method == "GET") {
            std::lock_guard lock(entry->mutex);
            ordered_json slots;
            for (auto s : {pipeline::Slot::Scanner, pipeline::Slot::Parser, pipeline::Slot::Contrainer,
                           pipeline::Slot::Generator, pipeline::Slot::Source})
                slots[std::string(pipeline::slot_name(s))] = entry->ws.text(s).has_value();
            return json_response(200, {{"id", entry->ws.id()},
                                       {"name", entry->ws.name()},
                                       {"slots", slots},
                                       {"status", ordered_json::parse(pipeline::status_json(entry->ws))}});
        }
        if (method == "DELETE") {
            {
                std::unique_lock lock(mutex_);
                workspaces_.erase(id);
                for (auto it = sessions_.begin(); it != sessions_.end();) {
                    if (it->second->workspace == entry)
                        it = sessions_.erase(it);
                    else
                        ++it;
                }
            }
            std::lock_guard lock(entry->mutex);
            entry->deleted = true;
            if (!config_.data_dir.empty()) {
                std::error_code ec;
                fs::remove_all(config_.data_dir / id, ec);
            }
            return no_content();
        }
        return bad_method();
    }

    if (rest == "/status") {
        if (method != "GET")
            return bad_method();
        std::lock_guard lock(entry->mutex);
        return raw_json(200, pipeline::status_json(entry->ws));
    }

    auto slot_io = [&](pipeline::Slot slot) -> Response {
        std::lock_guard lock(entry->mutex);
        if (method == "PUT") {
            entry->ws.set_text(slot, body);
            persist(*entry);
            return no_content();
        }
        if (method == "GET") {
            const auto& t = entry->ws.text(slot);
            if (!t)
                return not_found(std::string(pipeline::slot_name(slot)) + " text not set");
            return {200, *t, "text/plain; charset=utf-8"};
        }
        return bad_method();
    };

    if (rest.rfind("/specs/", 0) == 0) {
        auto slot = pipeline::slot_from_name(rest.substr(7));
        if (!slot || *slot == pipeline::Slot::Source)
            return not_found("no spec slot " + rest.substr(7));
        return slot_io(*slot);
    }
    if (rest == "/source")
        return slot_io(pipeline::Slot::Source);

    if (rest == "/compile") {
        if (method != "POST")
            return bad_method();
        std::lock_guard lock(entry->mutex);
        auto report = entry->ws.compile();
        persist(*entry);
        return raw_json(200, pipeline::to_json(report));
    }
    if (rest == "/run") {
        if (method != "POST")
            return bad_method();
        auto j = parse_body(body);
        bool optimize = field<bool>(j, "optimize").value_or(true);
        auto source = field<std::string>(j, "source");
        std::lock_guard lock(entry->mutex);
        if (source) {
            entry->ws.set_source(*source);
            persist(*entry);
        }
        auto report = entry->ws.run(optimize);
        if (report.refusal)
            return raw_json(409, pipeline::to_json(*report.refusal));
        persist(*entry);
        return raw_json(200, pipeline::to_json(report));
    }
    if (rest == "/interpret") {
        if (method != "POST")
            return bad_method();
        auto j = parse_body(body);
        std::string input = input_text(j);
        pipeline::Limits limits{config_.max_steps, config_.max_trace};
        if (auto n = field<std::uint64_t>(j, "maxSteps"))
            limits.max_steps = std::min(*n, config_.max_steps);
        std::lock_guard lock(entry->mutex);
        auto report = entry->ws.interpret(input, limits);
        if (report.refusal)
            return raw_json(409, pipeline::to_json(*report.refusal));
        persist(*entry);
        return raw_json(200, pipeline::to_json(report));
    }
    if (rest == "/sessions") {
        if (method != "POST")
            return bad_method();
        return open_session(entry, body);
    }
    return not_found("no resource " + rest);
}

Response Service::open_session(const std::shared_ptr<WorkspaceEntry>& entry, const std::string& body)
{
    auto j = parse_body(body);
    std::string input = input_text(j);
    auto s = std::make_shared<SessionEntry>();
    s->workspace = entry;
    s->max_steps = std::min(field<std::uint64_t>(j, "maxSteps").value_or(config_.max_steps), config_.max_steps);
    s->max_trace = std::min(field<std::size_t>(j, "maxTrace").value_or(config_.max_trace), config_.max_trace);
    {
        std::lock_guard lock(entry->mutex);
        pipeline::Refusal why;
        auto prog = entry->ws.program(&why);
        if (!prog)
            return raw_json(409, pipeline::to_json(why));
        s->program = std::move(*prog);
        s->code_hash = entry->ws.input_hash(Subfase::Code);
    }
    auto values = vm::parse_input(input);
    if (!values)
        return error(400, "InputMalformed", "input must be whitespace-separated decimal integers");
    s->original_input = std::move(*values);
    s->reset();

    std::unique_lock lock(mutex_);
    if (entry->deleted)
        return not_found("no workspace " + entry->ws.id());
    do {
        s->id = random_id();
    } while (sessions_.count(s->id));
    sessions_.emplace(s->id, s);
    lock.unlock();

    std::lock_guard sl(s->mutex);
    return json_response(201, s->summary());
}

Response Service::session_route(const std::string& method, const std::string& id, const std::string& rest,
                                 const std::string& body)
{
    auto s = find_session(id);
    if (!s)
        return error(404, "E_INVALID_SESSION", "no session " + id);

    if (rest.empty() && method == "DELETE") {
        std::unique_lock lock(mutex_);
        sessions_.erase(id);
        return no_content();
    }

    std::lock_guard sl(s->mutex);

    auto still_fresh = [&]() -> std::optional<Response> {
        std::lock_guard wl(s->workspace->mutex);
        if (s->workspace->deleted)
            return error(404, "E_INVALID_SESSION", "the session's workspace was deleted");
        const auto& ws = s->workspace->ws;
        if (ws.status(Subfase::Code) != pipeline::Status::Fresh || ws.input_hash(Subfase::Code) != s->code_hash)
            return error(409, pipeline::codes::stale_upstream,
                         "the program changed since this session was opened; open a new session");
        return std::nullopt;
    };

    if (rest.empty()) {
        if (method != "GET")
            return bad_method();
        return json_response(200, s->summary());
    }
    if (rest == "/step") {
        if (method != "POST")
            return bad_method();
        auto j = parse_body(body);
        std::uint64_t n = field<std::uint64_t>(j, "n").value_or(1);
        if (auto stale = still_fresh())
            return *stale;
        ordered_json records = ordered_json::array();
        bool finished = s->state.halted || (s->trap && s->trap->kind != vm::TrapKind::InputExhausted);
        if (!finished) {
            s->trap.reset();
            for (std::uint64_t i = 0; i < n && !s->state.halted; ++i) {
                if (s->state.steps >= s->max_steps) {
                    s->trap = vm::Trap{vm::TrapKind::StepLimit, s->state.pc, s->state.steps};
                    break;
                }
                auto out = vm::step(s->state, s->input);
                if (auto* t = std::get_if<vm::Trap>(&out)) {
                    s->trap = *t;
                    break;
                }
                auto& rec = std::get<vm::StepRecord>(out);
                if (rec.io && rec.io->kind == vm::IoEvent::Kind::Wrote)
                    s->output += rec.io->text;
                records.push_back(vm::step_json(rec));
                if (s->trace.size() < s->max_trace)
                    s->trace.push_back(std::move(rec));
                else
                    s->trace_truncated = true;
            }
        }
        return json_response(200, {{"records", std::move(records)}, {"state", s->summary()}});
    }
    if (rest == "/input") {
        if (method != "POST")
            return bad_method();
        auto j = parse_body(body);
        auto values = vm::parse_input(input_text(j));
        if (!values)
            return error(400, "InputMalformed", "input must be whitespace-separated decimal integers");
        s->input.insert(s->input.end(), values->begin(), values->end());
        if (s->trap && s->trap->kind == vm::TrapKind::InputExhausted)
            s->trap.reset();
        return json_response(200, s->summary());
    }
    if (rest == "/reset") {
        if (method != "POST")
            return bad_method();
        if (auto stale = still_fresh())
            return *stale;
        s->reset();
        return json_response(200, s->summary());
    }
    if (rest == "/trace") {
        if (method != "GET")
            return bad_method();
        ordered_json records = ordered_json::array();
        for (const auto& r : s->trace)
            records.push_back(vm::step_json(r));
        return json_response(200, {{"records", std::move(records)}, {"truncated", s->trace_truncated}});
    }
    return not_found("no resource " + rest);
}

} // namespace tws::service
