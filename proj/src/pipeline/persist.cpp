#include "tws/pipeline.hpp"

#include "codec.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace tws::pipeline {

namespace fs = std::filesystem;
using detail::ordered_json;

namespace {

constexpr const char* manifest_name = "manifest.json";
constexpr const char* artifact_dir = "artifacts";

void write_atomic(const fs::path& target, const std::string& bytes)
{
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(rng() & 0xffffff);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw PersistError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out)
            throw PersistError("cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw PersistError("cannot replace " + target.string());
    }
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw PersistError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ordered_json parse_file(const fs::path& p)
{
    try {
        return ordered_json::parse(read_file(p));
    } catch (const ordered_json::exception& e) {
        throw PersistError("corrupt " + p.string() + ": " + e.what());
    }
}

} // namespace

void save_workspace(const Workspace& ws, const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir / artifact_dir, ec);
    if (ec)
        throw PersistError("cannot create " + (dir / artifact_dir).string() + ": " + ec.message());

    ordered_json slots = ordered_json::object();
    for (Slot s : {Slot::Scanner, Slot::Parser, Slot::Contrainer, Slot::Generator, Slot::Source}) {
        const auto& t = ws.text(s);
        fs::path file = dir / slot_file(s);
        if (t) {
            write_atomic(file, *t);
            slots[std::string(slot_name(s))] = {{"file", std::string(slot_file(s))}, {"hash", sha256_hex(*t)}};
        } else {
            fs::remove(file, ec);
            slots[std::string(slot_name(s))] = nullptr;
        }
    }

    ordered_json artifacts = ordered_json::object();
    for (Subfase s : all_subfases) {
        std::string name(subfase_name(s));
        fs::path file = dir / artifact_dir / (name + ".json");
        const Artifact* a = ws.artifact(s);
        if (!a) {
            fs::remove(file, ec);
            continue;
        }
        write_atomic(file, detail::artifact_json(*a).dump(2, ' ', false, ordered_json::error_handler_t::replace));
        artifacts[name] = {{"file", std::string(artifact_dir) + "/" + name + ".json"},
                           {"hash", a->hash},
                           {"status", std::string(status_name(ws.status(s)))}};
    }

    ordered_json m;
    m["schema"] = manifest_schema_version;
    m["hash_function"] = "sha256";
    m["id"] = ws.id();
    m["name"] = ws.name();
    m["slots"] = std::move(slots);
    m["artifacts"] = std::move(artifacts);
    write_atomic(dir / manifest_name, m.dump(2) + "\n");
}

Workspace load_workspace(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw PersistError("no workspace at " + dir.string());

    auto read_slots = [&](Workspace& ws) {
        for (Slot s : {Slot::Scanner, Slot::Parser, Slot::Contrainer, Slot::Generator, Slot::Source}) {
            fs::path file = dir / slot_file(s);
            if (fs::is_regular_file(file))
                ws.set_text(s, read_file(file));
        }
    };

    fs::path manifest_path = dir / manifest_name;
    if (!fs::exists(manifest_path)) {
        std::string name = fs::absolute(dir).lexically_normal().filename().string();
        if (name.empty())
            name = "workspace";
        Workspace ws(name, name);
        read_slots(ws);
        return ws;
    }

    ordered_json m = parse_file(manifest_path);
    try {
        if (!m.is_object() || !m.contains("schema"))
            throw PersistError("corrupt " + manifest_path.string() + ": no schema version");
        if (m.at("schema") != manifest_schema_version)
            throw PersistError(manifest_path.string() + ": unknown schema version " + m.at("schema").dump());
        if (m.value("hash_function", "") != "sha256")
            throw PersistError(manifest_path.string() + ": unsupported hash function");

        Workspace ws(m.at("id").get<std::string>(), m.at("name").get<std::string>());
        read_slots(ws);

        std::map<Subfase, Artifact> cache;
        for (const auto& [name, entry] : m.at("artifacts").items()) {
            auto s = subfase_from_name(name);
            if (!s)
                throw PersistError(manifest_path.string() + ": unknown subfase " + name);
            fs::path file = dir / entry.at("file").get<std::string>();
            ordered_json a = parse_file(file);
            try {
                cache[*s] = detail::artifact_from_json(a);
            } catch (const ordered_json::exception& e) {
                throw PersistError("corrupt " + file.string() + ": " + e.what());
            }
        }
        ws.restore_cache(std::move(cache));
        return ws;
    } catch (const ordered_json::exception& e) {
        throw PersistError("corrupt " + manifest_path.string() + ": " + e.what());
    }
}

} // namespace tws::pipeline
