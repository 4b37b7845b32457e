#include "guirl/principles.hpp"

#include <cctype>
#include <fstream>
#include <unordered_set>

#include "guirl/errors.hpp"

namespace guirl {

struct Applicability::Node {
  enum class Op { always, never, destructive, dialog, action_in, negate, conj, disj };
  Op op = Op::always;
  std::vector<ActionType> types;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

constexpr std::array<std::pair<Channel, std::string_view>, 10> kChannelNames{{
    {Channel::action_type, "action_type"},
    {Channel::target_bound, "target_bound"},
    {Channel::ui_transition, "ui_transition"},
    {Channel::format_validity, "format_validity"},
    {Channel::safety_guard, "safety_guard"},
    {Channel::coherence, "coherence"},
    {Channel::planning, "planning"},
    {Channel::efficiency, "efficiency"},
    {Channel::etiquette, "etiquette"},
    {Channel::consistency, "consistency"},
}};

using NodePtr = std::shared_ptr<const Applicability::Node>;
using Op = Applicability::Node::Op;

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr n = parse_or();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("applicability expression, column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(std::string_view tok) {
    skip_ws();
    if (src_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  std::string ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected an identifier");
    return std::string(src_.substr(start, pos_ - start));
  }

  static NodePtr binary(Op op, NodePtr l, NodePtr r) {
    auto n = std::make_shared<Applicability::Node>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  NodePtr parse_or() {
    NodePtr n = parse_and();
    while (eat("||")) n = binary(Op::disj, n, parse_and());
    return n;
  }

  NodePtr parse_and() {
    NodePtr n = parse_unary();
    while (eat("&&")) n = binary(Op::conj, n, parse_unary());
    return n;
  }

  NodePtr parse_unary() {
    if (eat("!")) return binary(Op::negate, parse_unary(), nullptr);
    if (eat("(")) {
      NodePtr n = parse_or();
      if (!eat(")")) fail("expected ')'");
      return n;
    }
    const std::size_t at = pos_;
    const std::string word = ident();
    auto n = std::make_shared<Applicability::Node>();
    if (word == "always") {
      n->op = Op::always;
    } else if (word == "never") {
      n->op = Op::never;
    } else if (word == "targets_destructive") {
      n->op = Op::destructive;
    } else if (word == "dialog_open") {
      n->op = Op::dialog;
    } else if (word == "action_in") {
      n->op = Op::action_in;
      if (!eat("(")) fail("expected '(' after action_in");
      do {
        const std::string name = ident();
        const auto t = parse_action_type(name);
        if (!t) fail("unknown action type '" + name + "'");
        n->types.push_back(*t);
      } while (eat(","));
      if (!eat(")")) fail("expected ')'");
    } else {
      pos_ = at;
      fail("unknown term '" + word + "'");
    }
    return n;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

bool eval_node(const Applicability::Node& n, const ApplicabilityContext& ctx) {
  switch (n.op) {
    case Op::always: return true;
    case Op::never: return false;
    case Op::destructive: return ctx.targets_destructive;
    case Op::dialog: return ctx.dialog_open;
    case Op::action_in:
      if (!ctx.action) return false;
      for (ActionType t : n.types) {
        if (t == ctx.action->type) return true;
      }
      return false;
    case Op::negate: return !eval_node(*n.lhs, ctx);
    case Op::conj: return eval_node(*n.lhs, ctx) && eval_node(*n.rhs, ctx);
    case Op::disj: return eval_node(*n.lhs, ctx) || eval_node(*n.rhs, ctx);
  }
  return false;
}

}  // namespace

std::string_view channel_name(Channel c) {
  for (const auto& [k, n] : kChannelNames) {
    if (k == c) return n;
  }
  return "action_type";
}

std::optional<Channel> parse_channel(std::string_view name) {
  for (const auto& [k, n] : kChannelNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool is_evp(Channel c) { return static_cast<int>(c) <= static_cast<int>(Channel::safety_guard); }

std::size_t channel_slot(Channel c) {
  const auto i = static_cast<std::size_t>(c);
  return is_evp(c) ? i : i - kEvpChannels.size();
}

std::string_view source_name(PrincipleSource s) { return s == PrincipleSource::human ? "human" : "llm"; }

Applicability Applicability::parse(std::string_view expression) {
  Applicability a;
  a.expression_ = std::string(expression);
  a.root_ = ExprParser(expression).parse();
  return a;
}

bool Applicability::evaluate(const ApplicabilityContext& ctx) const { return eval_node(*root_, ctx); }

PrincipleSet::PrincipleSet(std::vector<Principle> principles) : principles_(std::move(principles)) {
  std::unordered_set<std::string> ids;
  for (const auto& p : principles_) {
    if (p.id.empty()) throw SchemaError("principle id must be nonempty");
    if (!ids.insert(p.id).second) throw SchemaError("duplicate principle id '" + p.id + "'");
  }
}

std::size_t PrincipleSet::human_count() const {
  std::size_t n = 0;
  for (const auto& p : principles_) n += p.source == PrincipleSource::human ? 1 : 0;
  return n;
}

std::size_t PrincipleSet::llm_count() const { return principles_.size() - human_count(); }

const Principle* PrincipleSet::find(std::string_view id) const {
  for (const auto& p : principles_) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

PrincipleSet PrincipleSet::subset(const std::vector<std::string>& ids) const {
  std::vector<Principle> out;
  std::unordered_set<std::string> taken;
  for (const auto& id : ids) {
    if (const Principle* p = find(id); p && taken.insert(id).second) out.push_back(*p);
  }
  return PrincipleSet(std::move(out));
}

PrincipleSet PrincipleSet::applicable(const ApplicabilityContext& ctx) const {
  std::vector<Principle> out;
  for (const auto& p : principles_) {
    if (p.applicability.evaluate(ctx)) out.push_back(p);
  }
  return PrincipleSet(std::move(out));
}

bool PrincipleSet::channel_active(Channel c, const ApplicabilityContext& ctx) const {
  for (const auto& p : principles_) {
    if (p.channel == c && p.applicability.evaluate(ctx)) return true;
  }
  return false;
}

ordered_json PrincipleSet::to_json() const {
  ordered_json arr = ordered_json::array();
  for (const auto& p : principles_) {
    arr.push_back({{"id", p.id},
                   {"source", source_name(p.source)},
                   {"text", p.text},
                   {"channel", channel_name(p.channel)},
                   {"applicability", p.applicability.expression()}});
  }
  return ordered_json{{"principles", std::move(arr)}};
}

PrincipleSet PrincipleSet::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("principles") || !j.at("principles").is_array()) {
    throw SchemaError("principles: expected an object with a 'principles' array");
  }
  std::vector<Principle> out;
  std::size_t i = 0;
  for (const auto& e : j.at("principles")) {
    const std::string where = "principles[" + std::to_string(i++) + "]";
    try {
      Principle p;
      p.id = e.at("id").get<std::string>();
      const auto source = e.at("source").get<std::string>();
      if (source == "human") {
        p.source = PrincipleSource::human;
      } else if (source == "llm") {
        p.source = PrincipleSource::llm;
      } else {
        throw SchemaError("unknown source '" + source + "'");
      }
      p.text = e.at("text").get<std::string>();
      const auto ch = parse_channel(e.at("channel").get<std::string>());
      if (!ch) throw SchemaError("unknown channel '" + e.at("channel").get<std::string>() + "'");
      p.channel = *ch;
      p.applicability = Applicability::parse(e.value("applicability", "always"));
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& ex) {
      throw SchemaError(where + ": " + ex.what());
    } catch (const SchemaError& ex) {
      throw SchemaError(where + ": " + ex.what());
    }
  }
  return PrincipleSet(std::move(out));
}

PrincipleSet PrincipleSet::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open principle catalog '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw LoadError(path + ": not valid JSON");
  return from_json(j);
}

const PrincipleSet& default_principles() {
  static const PrincipleSet set = [] {
    auto make = [](std::string id, PrincipleSource src, Channel ch, std::string text,
                   std::string_view applicability = "always") {
      return Principle{std::move(id), src, std::move(text), ch, Applicability::parse(applicability)};
    };
    const auto H = PrincipleSource::human;
    const auto L = PrincipleSource::llm;
    return PrincipleSet({
        make("EVP_TargetBound", H, Channel::target_bound,
             "Pointer positions stay within the visible viewport and land on the intended element.",
             "action_in(click, long_press, drag, select, type)"),
        make("EVP_SafetyGuard", H, Channel::safety_guard,
             "Destructive commands are only issued after an explicit confirmation."),
        make("EVP_MenuOrder", H, Channel::ui_transition,
             "Follow the order imposed by the menu hierarchy when navigating."),
        make("EVP_UIState", H, Channel::ui_transition,
             "Each action produces the expected change in the interface state."),
        make("EVP_ActionType", H, Channel::action_type,
             "Use the primitive operation that the current step calls for."),
        make("EVP_Format", H, Channel::format_validity,
             "Reply with one <think> block followed by one <answer> block holding a single JSON action."),
        make("LDP_Coherence", L, Channel::coherence,
             "Reasoning leads to the chosen action and refers to what is visible on screen."),
        make("LDP_Completeness", L, Channel::planning,
             "Reasoning keeps the top-level instruction in view and checks preconditions first."),
        make("LDP_Efficiency", L, Channel::efficiency,
             "Prefer a direct route; do not repeat an action that already had no effect."),
        make("LDP_Etiquette", L, Channel::etiquette,
             "Acknowledge confirmation before risky actions and clear blocking pop-ups."),
        make("LDP_Consistency", L, Channel::consistency,
             "Keep the same casing style across the text entered into form fields."),
    });
  }();
  return set;
}

}  // namespace guirl
