#include "guirl/ui_tree.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include "guirl/errors.hpp"
#include "guirl/util.hpp"

namespace guirl {
namespace {

constexpr std::array<std::pair<NodeKind, std::string_view>, 10> kKindNames{{
    {NodeKind::button, "button"},
    {NodeKind::menu, "menu"},
    {NodeKind::menu_item, "menu_item"},
    {NodeKind::text_field, "text_field"},
    {NodeKind::dialog, "dialog"},
    {NodeKind::label, "label"},
    {NodeKind::container, "container"},
    {NodeKind::checkbox, "checkbox"},
    {NodeKind::list, "list"},
    {NodeKind::link, "link"},
}};

const UiNode* find_in(const UiNode& node, std::string_view id) {
  if (node.id == id) return &node;
  for (const auto& child : node.children) {
    if (const UiNode* hit = find_in(child, id)) return hit;
  }
  return nullptr;
}

const UiNode* parent_in(const UiNode& node, std::string_view id) {
  for (const auto& child : node.children) {
    if (child.id == id) return &node;
    if (const UiNode* hit = parent_in(child, id)) return hit;
  }
  return nullptr;
}

void walk(const UiNode& node, const std::function<void(const UiNode&)>& fn) {
  fn(node);
  for (const auto& child : node.children) walk(child, fn);
}

void validate(const UiNode& root, const Viewport& viewport, const std::optional<std::string>& focus) {
  if (viewport.width < 1 || viewport.height < 1) {
    throw SchemaError("viewport dimensions must be >= 1");
  }
  if (!root.visible) throw SchemaError("root node must be visible");
  std::unordered_set<std::string> seen;
  walk(root, [&](const UiNode& n) {
    if (n.id.empty()) throw SchemaError("node id must be nonempty");
    if (!seen.insert(n.id).second) throw SchemaError("duplicate node id '" + n.id + "'");
    if (n.rect.w < 0 || n.rect.h < 0) throw SchemaError("negative rect size on '" + n.id + "'");
    if (n.interactive && !kind_may_be_interactive(n.kind)) {
      throw SchemaError("node '" + n.id + "' of kind " + std::string(kind_name(n.kind)) +
                        " cannot be interactive");
    }
  });
  if (focus) {
    const UiNode* f = find_in(root, *focus);
    if (!f) throw SchemaError("focus refers to unknown node '" + *focus + "'");
    if (!f->interactive) throw SchemaError("focus node '" + *focus + "' is not interactive");
  }
}

ordered_json node_to_json(const UiNode& n) {
  ordered_json j;
  j["id"] = n.id;
  j["kind"] = kind_name(n.kind);
  j["rect"] = {{"x", n.rect.x}, {"y", n.rect.y}, {"w", n.rect.w}, {"h", n.rect.h}};
  j["visible"] = n.visible;
  j["interactive"] = n.interactive;
  j["open"] = n.open;
  j["checked"] = n.checked;
  j["text"] = n.text;
  j["z"] = n.z;
  ordered_json kids = ordered_json::array();
  for (const auto& c : n.children) kids.push_back(node_to_json(c));
  j["children"] = std::move(kids);
  return j;
}

UiNode node_from_json(const nlohmann::json& j) {
  UiNode n;
  n.id = j.at("id").get<std::string>();
  const auto kind = parse_kind(j.at("kind").get<std::string>());
  if (!kind) throw SchemaError("unknown node kind '" + j.at("kind").get<std::string>() + "'");
  n.kind = *kind;
  const auto& r = j.at("rect");
  n.rect = {r.at("x").get<int>(), r.at("y").get<int>(), r.at("w").get<int>(), r.at("h").get<int>()};
  n.visible = j.value("visible", true);
  n.interactive = j.value("interactive", false);
  n.open = j.value("open", false);
  n.checked = j.value("checked", false);
  n.text = j.value("text", "");
  n.z = j.value("z", 0);
  if (j.contains("children")) {
    for (const auto& c : j.at("children")) n.children.push_back(node_from_json(c));
  }
  return n;
}

}  // namespace

std::string_view kind_name(NodeKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "container";
}

std::optional<NodeKind> parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

bool kind_may_be_interactive(NodeKind kind) {
  return kind != NodeKind::label && kind != NodeKind::container;
}

char cell_code(NodeKind kind) {
  switch (kind) {
    case NodeKind::button: return 'B';
    case NodeKind::menu: return 'M';
    case NodeKind::menu_item: return 'I';
    case NodeKind::text_field: return 'T';
    case NodeKind::dialog: return 'D';
    case NodeKind::label: return 'L';
    case NodeKind::container: return kBackgroundCell;  // transparent
    case NodeKind::checkbox: return 'X';
    case NodeKind::list: return 'S';
    case NodeKind::link: return 'K';
  }
  return kBackgroundCell;
}

UiTree::UiTree(UiNode root, Viewport viewport, std::optional<std::string> focus)
    : root_(std::move(root)), viewport_(viewport), focus_(std::move(focus)) {
  validate(root_, viewport_, focus_);
}

const UiNode* UiTree::find(std::string_view id) const { return find_in(root_, id); }

const UiNode& UiTree::at(std::string_view id) const {
  const UiNode* n = find(id);
  if (!n) throw LookupError("unknown node id '" + std::string(id) + "'");
  return *n;
}

const UiNode* UiTree::parent_of(std::string_view id) const { return parent_in(root_, id); }

bool UiTree::is_descendant_of(std::string_view id, std::string_view ancestor) const {
  const UiNode* a = find(ancestor);
  return a != nullptr && find_in(*a, id) != nullptr;
}

void UiTree::for_each(const std::function<void(const UiNode&)>& fn) const { walk(root_, fn); }

UiTree UiTree::modified(const Editor& edit) const {
  UiNode root = root_;
  std::optional<std::string> focus = focus_;
  edit(root, focus);
  return UiTree(std::move(root), viewport_, std::move(focus));
}

UiNode* find_node(UiNode& root, std::string_view id) {
  return const_cast<UiNode*>(find_in(root, id));
}

bool remove_node(UiNode& root, std::string_view id) {
  for (auto it = root.children.begin(); it != root.children.end(); ++it) {
    if (it->id == id) {
      root.children.erase(it);
      return true;
    }
    if (remove_node(*it, id)) return true;
  }
  return false;
}

std::optional<std::string> hit_test(const UiTree& tree, int x, int y) {
  const Viewport& vp = tree.viewport();
  if (x < 0 || y < 0 || x >= vp.width || y >= vp.height) return std::nullopt;
  const UiNode* best = nullptr;
  // Document order traversal; `>=` makes later nodes win z ties.
  tree.for_each([&](const UiNode& n) {
    if (!n.visible || !n.interactive || !n.rect.contains(x, y)) return;
    if (!best || n.z >= best->z) best = &n;
  });
  if (!best) return std::nullopt;
  return best->id;
}

bool is_visible_interactive(const UiTree& tree, std::string_view node_id) {
  const UiNode& n = tree.at(node_id);
  const Rect screen{0, 0, tree.viewport().width, tree.viewport().height};
  return n.visible && n.interactive && n.rect.intersects(screen);
}

ScreenSnapshot render_snapshot(const UiTree& tree, int step_index) {
  ScreenSnapshot snap;
  const int cell = ScreenSnapshot::kCellSize;
  snap.cols = (tree.viewport().width + cell - 1) / cell;
  snap.rows = (tree.viewport().height + cell - 1) / cell;
  snap.grid.assign(static_cast<std::size_t>(snap.rows),
                   std::string(static_cast<std::size_t>(snap.cols), kBackgroundCell));
  snap.step_index = step_index;

  std::vector<const UiNode*> painted;
  tree.for_each([&](const UiNode& n) {
    if (n.visible && cell_code(n.kind) != kBackgroundCell) painted.push_back(&n);
  });
  std::stable_sort(painted.begin(), painted.end(),
                   [](const UiNode* a, const UiNode* b) { return a->z < b->z; });
  for (const UiNode* n : painted) {
    const char code = cell_code(n->kind);
    for (int r = 0; r < snap.rows; ++r) {
      const int py = r * cell + cell / 2;
      if (py < n->rect.y || py >= n->rect.y + n->rect.h) continue;
      for (int c = 0; c < snap.cols; ++c) {
        if (n->rect.contains(c * cell + cell / 2, py)) {
          snap.grid[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = code;
        }
      }
    }
  }
  snap.digest = tree_digest(tree);
  return snap;
}

std::string ScreenSnapshot::encoded() const {
  std::string cells;
  cells.reserve(static_cast<std::size_t>(rows * cols));
  for (const auto& row : grid) cells += row;
  return base64_encode(cells);
}

ordered_json tree_to_json(const UiTree& tree) {
  ordered_json j;
  j["viewport"] = {{"width", tree.viewport().width}, {"height", tree.viewport().height}};
  j["focus"] = tree.focus() ? ordered_json(*tree.focus()) : ordered_json(nullptr);
  j["root"] = node_to_json(tree.root());
  return j;
}

UiTree tree_from_json(const nlohmann::json& j) {
  try {
    const auto& vp = j.at("viewport");
    std::optional<std::string> focus;
    if (j.contains("focus") && !j.at("focus").is_null()) focus = j.at("focus").get<std::string>();
    return UiTree(node_from_json(j.at("root")),
                  Viewport{vp.at("width").get<int>(), vp.at("height").get<int>()}, focus);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("ui tree: ") + e.what());
  }
}

std::string canonical_serialization(const UiTree& tree) { return tree_to_json(tree).dump(); }

std::string tree_digest(const UiTree& tree) { return digest_hex(canonical_serialization(tree)); }

}  // namespace guirl
