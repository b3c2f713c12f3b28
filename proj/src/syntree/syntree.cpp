#include "tws/syntree.hpp"

#include "tree_json.hpp"

#include <stdexcept>

namespace tws {

namespace {

void dump(const SynTree& t, int depth, std::string& out)
{
    for (int i = 0; i < depth; ++i)
        out += ". ";
    out += t.kind;
    if (t.lexeme)
        out += "(" + *t.lexeme + ")";
    if (t.ann_type)
        out += ": " + *t.ann_type;
    if (t.ann_addr)
        out += " @" + std::to_string(*t.ann_addr);
    out += '\n';
    for (const auto& c : t.children)
        dump(c, depth + 1, out);
}

void walk(const SynTree& t, int depth, std::vector<PreorderEntry>& out)
{
    out.push_back({&t, depth});
    for (const auto& c : t.children)
        walk(c, depth + 1, out);
}

} // namespace

std::string to_indented_text(const SynTree& tree)
{
    std::string out;
    dump(tree, 0, out);
    return out;
}

std::vector<PreorderEntry> preorder(const SynTree& tree)
{
    std::vector<PreorderEntry> out;
    walk(tree, 0, out);
    return out;
}

std::size_t node_count(const SynTree& tree)
{
    std::size_t n = 1;
    for (const auto& c : tree.children)
        n += node_count(c);
    return n;
}

nlohmann::ordered_json tree_to_json_value(const SynTree& t)
{
    nlohmann::ordered_json j;
    j["kind"] = t.kind;
    if (t.lexeme)
        j["lexeme"] = *t.lexeme;
    j["pos"] = {{"line", t.pos.line}, {"col", t.pos.col}};
    if (t.ann_type)
        j["type"] = *t.ann_type;
    if (t.ann_addr)
        j["addr"] = *t.ann_addr;
    auto children = nlohmann::ordered_json::array();
    for (const auto& c : t.children)
        children.push_back(tree_to_json_value(c));
    j["children"] = std::move(children);
    return j;
}

SynTree tree_from_json_value(const nlohmann::ordered_json& j)
{
    if (!j.is_object() || !j.contains("kind") || !j.contains("pos") || !j.contains("children"))
        throw std::invalid_argument("tree node requires kind, pos and children");
    SynTree t;
    t.kind = j.at("kind").get<std::string>();
    if (j.contains("lexeme"))
        t.lexeme = j.at("lexeme").get<std::string>();
    t.pos.line = j.at("pos").at("line").get<int>();
    t.pos.col = j.at("pos").at("col").get<int>();
    if (j.contains("type"))
        t.ann_type = j.at("type").get<std::string>();
    if (j.contains("addr"))
        t.ann_addr = j.at("addr").get<std::int64_t>();
    for (const auto& c : j.at("children"))
        t.children.push_back(tree_from_json_value(c));
    return t;
}

std::string to_json(const SynTree& tree)
{
    return tree_to_json_value(tree).dump();
}

SynTree tree_from_json(std::string_view json)
{
    try {
        return tree_from_json_value(nlohmann::ordered_json::parse(json));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad tree JSON: ") + e.what());
    }
}

} // namespace tws
