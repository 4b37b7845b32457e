#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "guirl/event_bus.hpp"
#include "guirl/ui_tree.hpp"

namespace guirl {

// Conjunction of atoms over a UI tree and the event log:
//   node(ID).open | node(ID).visible | node(ID).checked | node(ID).text = "S"
//   node_exists(ID) | event_occurred(KIND)
// joined with '&&'.
class StatePredicate {
 public:
  struct Atom {
    enum class Kind { open, visible, checked, text_equals, exists, event };
    Kind kind = Kind::exists;
    std::string subject;  // node id or event kind
    std::string text;     // for text_equals

    bool operator==(const Atom&) const = default;
  };

  struct Result {
    bool value = false;
    std::string error;  // set when an atom referenced a missing node
  };

  // Throws SchemaError naming the column of the first bad token.
  static StatePredicate parse(std::string_view source);

  // Missing nodes make the predicate false and report an error.
  Result evaluate(const UiTree& tree, const EventLog& log) const;
  bool holds(const UiTree& tree, const EventLog& log) const { return evaluate(tree, log).value; }

  const std::string& source() const { return source_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  // Node ids mentioned by node(...) atoms.
  std::vector<std::string> referenced_nodes() const;

 private:
  std::string source_;
  std::vector<Atom> atoms_;
};

}  // namespace guirl
