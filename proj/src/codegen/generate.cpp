#include "tws/codegen.hpp"

#include <algorithm>
#include <charconv>

namespace tws::codegen {

GenError::GenError(SourcePos pos, const std::string& reason)
    : std::runtime_error(to_string(pos) + ": " + reason), pos_(pos), reason_(reason)
{
}

std::string unquote(std::string_view lexeme)
{
    if (lexeme.size() < 2 || lexeme.front() != '"' || lexeme.back() != '"')
        return std::string(lexeme);
    std::string out;
    std::string_view body = lexeme.substr(1, lexeme.size() - 2);
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c != '\\' || i + 1 == body.size()) {
            out += c;
            continue;
        }
        char e = body[++i];
        switch (e) {
        case 'n':
            out += '\n';
            break;
        case 't':
            out += '\t';
            break;
        default:
            out += e;
            break;
        }
    }
    return out;
}

namespace {

class Generator
{
  public:
    explicit Generator(const GenSpec& spec) : spec_(spec) {}

    SymbolicCode run(const SynTree& root)
    {
        gen(root);
        out_.code.push_back({Opcode::HALT, 0});
        for (const auto& [id, pos] : referenced_) {
            if (!out_.labels.count(id))
                throw GenError(pos, "label L" + std::to_string(id) + " is never placed");
        }
        return std::move(out_);
    }

  private:
    const GenSpec& spec_;
    SymbolicCode out_;
    std::int64_t next_label_ = 1;
    std::map<std::int64_t, SourcePos> referenced_;

    void gen_all(const SynTree& node)
    {
        for (const auto& c : node.children)
            gen(c);
    }

    void gen(const SynTree& node)
    {
        auto tmpl = spec_.templates.find(node.kind);
        if (tmpl == spec_.templates.end()) {
            gen_all(node);
            return;
        }
        std::map<std::string, std::int64_t> labels;
        for (const auto& a : tmpl->second) {
            switch (a.kind) {
            case GenAction::Kind::GenChild:
                if (a.child >= node.children.size())
                    throw GenError(node.pos, node.kind + " has no child " + std::to_string(a.child));
                gen(node.children[a.child]);
                break;
            case GenAction::Kind::GenAll:
                gen_all(node);
                break;
            case GenAction::Kind::FreshLabel:
                labels[a.label] = next_label_++;
                break;
            case GenAction::Kind::PlaceLabel: {
                std::int64_t id = labels.at(a.label);
                if (!out_.labels.emplace(id, out_.code.size()).second)
                    throw GenError(node.pos, "label " + a.label + " placed twice");
                break;
            }
            case GenAction::Kind::Emit:
                out_.code.push_back({a.op, operand(a.operand, node, labels)});
                break;
            }
        }
    }

    const SynTree& addressed(const SynTree& leaf, const SynTree& owner)
    {
        if (!leaf.ann_addr)
            throw GenError(leaf.pos, "node " + leaf.kind + " has no address (in " + owner.kind + ")");
        return leaf;
    }

    std::int64_t operand(const OperandExpr& e, const SynTree& node, const std::map<std::string, std::int64_t>& labels)
    {
        switch (e.kind) {
        case OperandExpr::Kind::None:
            return 0;
        case OperandExpr::Kind::IntConst:
        case OperandExpr::Kind::OpName:
            return e.value;
        case OperandExpr::Kind::LexemeAsInt: {
            std::int64_t v = 0;
            const std::string text = node.lexeme.value_or("");
            auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (text.empty() || ec != std::errc() || end != text.data() + text.size())
                throw GenError(node.pos, "lexeme '" + text + "' is not a decimal integer");
            return v;
        }
        case OperandExpr::Kind::AddrOfSelf:
            return *addressed(node, node).ann_addr;
        case OperandExpr::Kind::AddrOfChild: {
            auto i = static_cast<std::size_t>(e.value);
            if (i >= node.children.size())
                throw GenError(node.pos, node.kind + " has no child " + std::to_string(i));
            return *addressed(node.children[i], node).ann_addr;
        }
        case OperandExpr::Kind::LabelRef: {
            std::int64_t id = labels.at(e.label);
            referenced_.emplace(id, node.pos);
            return id;
        }
        case OperandExpr::Kind::StringOfSelf: {
            if (!node.lexeme)
                throw GenError(node.pos, "node " + node.kind + " has no text for a string operand");
            std::string text = unquote(*node.lexeme);
            auto it = std::find(out_.strings.begin(), out_.strings.end(), text);
            if (it != out_.strings.end())
                return it - out_.strings.begin();
            out_.strings.push_back(std::move(text));
            return static_cast<std::int64_t>(out_.strings.size() - 1);
        }
        }
        return 0;
    }
};

} // namespace

SymbolicCode generate(const GenSpec& spec, const SynTree& decorated)
{
    return Generator(spec).run(decorated);
}

} // namespace tws::codegen
