#include "guirl/predicate.hpp"

#include <cctype>

#include "guirl/errors.hpp"

namespace guirl {
namespace {

class PredicateParser {
 public:
  explicit PredicateParser(std::string_view src) : src_(src) {}

  std::vector<StatePredicate::Atom> parse() {
    std::vector<StatePredicate::Atom> atoms;
    atoms.push_back(atom());
    while (eat("&&")) atoms.push_back(atom());
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return atoms;
  }

 private:
  using Atom = StatePredicate::Atom;

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("predicate column " + std::to_string(pos_ + 1) + ": " + what);
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

  void expect(std::string_view tok) {
    if (!eat(tok)) fail("expected '" + std::string(tok) + "'");
  }

  std::string ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':') {
        ++pos_;
      } else {
        break;
      }
    }
    if (start == pos_) fail("expected an identifier");
    return std::string(src_.substr(start, pos_ - start));
  }

  std::string quoted() {
    skip_ws();
    if (pos_ >= src_.size() || src_[pos_] != '"') fail("expected a quoted string");
    ++pos_;
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != '"') {
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) ++pos_;
      out.push_back(src_[pos_++]);
    }
    if (pos_ >= src_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  Atom atom() {
    skip_ws();
    const std::size_t at = pos_;
    const std::string head = ident();
    Atom a;
    if (head == "node") {
      expect("(");
      a.subject = ident();
      expect(")");
      expect(".");
      const std::size_t prop_at = pos_;
      const std::string prop = ident();
      if (prop == "open") {
        a.kind = Atom::Kind::open;
      } else if (prop == "visible") {
        a.kind = Atom::Kind::visible;
      } else if (prop == "checked") {
        a.kind = Atom::Kind::checked;
      } else if (prop == "text") {
        a.kind = Atom::Kind::text_equals;
        expect("=");
        a.text = quoted();
      } else {
        pos_ = prop_at;
        fail("unknown node property '" + prop + "'");
      }
    } else if (head == "node_exists") {
      a.kind = Atom::Kind::exists;
      expect("(");
      a.subject = ident();
      expect(")");
    } else if (head == "event_occurred") {
      a.kind = Atom::Kind::event;
      expect("(");
      a.subject = ident();
      expect(")");
    } else {
      pos_ = at;
      fail("unknown predicate term '" + head + "'");
    }
    return a;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

bool event_occurred(const EventLog& log, std::string_view kind) {
  for (const auto& rec : log) {
    for (const auto& e : rec.system_events) {
      if (e == kind) return true;
    }
  }
  return false;
}

StatePredicate StatePredicate::parse(std::string_view source) {
  StatePredicate p;
  p.source_ = std::string(source);
  p.atoms_ = PredicateParser(source).parse();
  return p;
}

StatePredicate::Result StatePredicate::evaluate(const UiTree& tree, const EventLog& log) const {
  Result r{true, {}};
  for (const auto& a : atoms_) {
    bool v = false;
    switch (a.kind) {
      case Atom::Kind::exists:
        v = tree.contains(a.subject);
        break;
      case Atom::Kind::event:
        v = event_occurred(log, a.subject);
        break;
      default: {
        const UiNode* n = tree.find(a.subject);
        if (!n) {
          if (r.error.empty()) r.error = "predicate references missing node '" + a.subject + "'";
          v = false;
          break;
        }
        if (a.kind == Atom::Kind::open) v = n->open;
        if (a.kind == Atom::Kind::visible) v = n->visible;
        if (a.kind == Atom::Kind::checked) v = n->checked;
        if (a.kind == Atom::Kind::text_equals) v = n->text == a.text;
        break;
      }
    }
    r.value = r.value && v;
  }
  return r;
}

std::vector<std::string> StatePredicate::referenced_nodes() const {
  std::vector<std::string> out;
  for (const auto& a : atoms_) {
    if (a.kind != Atom::Kind::event) out.push_back(a.subject);
  }
  return out;
}

}  // namespace guirl
