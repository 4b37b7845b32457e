#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace guirl {

using ordered_json = nlohmann::ordered_json;

struct Viewport {
  int width = 1;
  int height = 1;

  bool operator==(const Viewport&) const = default;
};

struct Point {
  int x = 0;
  int y = 0;

  bool operator==(const Point&) const = default;
};

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
  bool intersects(const Rect& o) const {
    return w > 0 && h > 0 && o.w > 0 && o.h > 0 && x < o.x + o.w && o.x < x + w && y < o.y + o.h &&
           o.y < y + h;
  }
  Point center() const { return {x + w / 2, y + h / 2}; }

  bool operator==(const Rect&) const = default;
};

enum class NodeKind {
  button,
  menu,
  menu_item,
  text_field,
  dialog,
  label,
  container,
  checkbox,
  list,
  link,
};

std::string_view kind_name(NodeKind kind);
std::optional<NodeKind> parse_kind(std::string_view name);
// Kinds that may carry interactive = true.
bool kind_may_be_interactive(NodeKind kind);

struct UiNode {
  std::string id;
  NodeKind kind = NodeKind::container;
  Rect rect;
  bool visible = true;
  bool interactive = false;
  bool open = false;     // menus and dialogs
  bool checked = false;  // checkboxes, selectable rows
  std::string text;
  std::vector<UiNode> children;
  int z = 0;

  bool operator==(const UiNode&) const = default;
};

// Simulated interface state. Values are immutable once constructed; the
// constructor validates every structural invariant and throws SchemaError.
// App models derive successor states through `modified`.
class UiTree {
 public:
  UiTree(UiNode root, Viewport viewport, std::optional<std::string> focus = std::nullopt);

  const UiNode& root() const { return root_; }
  const Viewport& viewport() const { return viewport_; }
  const std::optional<std::string>& focus() const { return focus_; }

  const UiNode* find(std::string_view id) const;
  // Throws LookupError when the id is unknown.
  const UiNode& at(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  // Parent of `id`, or nullptr for the root or unknown ids.
  const UiNode* parent_of(std::string_view id) const;
  // True when `id` equals `ancestor` or sits anywhere beneath it.
  bool is_descendant_of(std::string_view id, std::string_view ancestor) const;

  // Pre-order (document order) traversal.
  void for_each(const std::function<void(const UiNode&)>& fn) const;

  using Editor = std::function<void(UiNode& root, std::optional<std::string>& focus)>;
  UiTree modified(const Editor& edit) const;

  bool operator==(const UiTree&) const = default;

 private:
  UiNode root_;
  Viewport viewport_;
  std::optional<std::string> focus_;
};

// Mutable lookup for use inside UiTree::modified editors.
UiNode* find_node(UiNode& root, std::string_view id);
// Removes the node `id` (and its subtree). Returns false if absent or root.
bool remove_node(UiNode& root, std::string_view id);

struct ScreenSnapshot {
  static constexpr int kCellSize = 8;

  int cols = 0;
  int rows = 0;
  std::vector<std::string> grid;  // rows x cols cell codes
  int step_index = 0;
  std::string digest;             // digest of the canonical tree serialization

  // Row-major cell codes, base64 encoded; the prompt's screenshot payload.
  std::string encoded() const;

  bool operator==(const ScreenSnapshot&) const = default;
};

char cell_code(NodeKind kind);
constexpr char kBackgroundCell = '.';

std::optional<std::string> hit_test(const UiTree& tree, int x, int y);
bool is_visible_interactive(const UiTree& tree, std::string_view node_id);
ScreenSnapshot render_snapshot(const UiTree& tree, int step_index = 0);

// Order-preserving canonical encoding; the digest input and DOM-snapshot format.
ordered_json tree_to_json(const UiTree& tree);
UiTree tree_from_json(const nlohmann::json& j);
std::string canonical_serialization(const UiTree& tree);
std::string tree_digest(const UiTree& tree);

}  // namespace guirl
