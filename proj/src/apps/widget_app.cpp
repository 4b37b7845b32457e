#include <algorithm>
#include <cctype>
#include <functional>

#include "guirl/app_model.hpp"
#include "guirl/errors.hpp"
#include "guirl/util.hpp"

namespace guirl {
namespace {

void set_visible_rec(UiNode& n, bool visible) {
  n.visible = visible;
  for (auto& c : n.children) set_visible_rec(c, visible);
}

// Highest-z visible open dialog (later in document order wins ties).
const UiNode* top_dialog(const UiNode& root) {
  const UiNode* best = nullptr;
  std::function<void(const UiNode&)> walk = [&](const UiNode& n) {
    if (n.kind == NodeKind::dialog && n.visible && n.open && (!best || n.z >= best->z)) best = &n;
    for (const auto& c : n.children) walk(c);
  };
  walk(root);
  return best;
}

const UiNode* enclosing(const UiTree& tree, std::string_view id, NodeKind kind) {
  for (const UiNode* p = tree.parent_of(id); p; p = tree.parent_of(p->id)) {
    if (p->kind == kind) return p;
  }
  return nullptr;
}

void shift_subtree(UiNode& n, int dy) {
  n.rect.y += dy;
  for (auto& c : n.children) shift_subtree(c, dy);
}

int content_bottom(const UiNode& n) {
  int bottom = n.rect.y + n.rect.h;
  for (const auto& c : n.children) bottom = std::max(bottom, content_bottom(c));
  return bottom;
}

std::optional<std::string> resolve_drop(const UiTree& tree, const Target& to) {
  if (const auto* p = std::get_if<Point>(&to)) return hit_test(tree, p->x, p->y);
  const auto& id = std::get<std::string>(to);
  const UiNode* n = tree.find(id);
  if (!n || !n->visible) return std::nullopt;
  return id;
}

}  // namespace

UiNode& AppContext::node(std::string_view id) {
  UiNode* n = find(id);
  if (!n) throw LookupError("no node '" + std::string(id) + "'");
  return *n;
}

void AppContext::show(std::string_view id, bool visible) { set_visible_rec(node(id), visible); }

void AppContext::set_open(std::string_view id, bool open) {
  UiNode& n = node(id);
  n.open = open;
  set_visible_rec(n, open);
}

UiNode make_node(std::string id, NodeKind kind, Rect rect, std::string text, bool interactive, int z) {
  UiNode n;
  n.id = std::move(id);
  n.kind = kind;
  n.rect = rect;
  n.text = std::move(text);
  n.interactive = interactive;
  n.z = z;
  return n;
}

std::string scroll_anchor_id(std::string_view list_id) { return std::string(list_id) + "_anchor"; }

UiNode make_scroll_list(std::string id, Rect rect, int z) {
  UiNode list = make_node(id, NodeKind::list, rect, {}, true, z);
  list.children.push_back(make_node(scroll_anchor_id(id), NodeKind::container, {rect.x, rect.y, 0, 0}, {}, false, z));
  return list;
}

bool is_scroll_list(const UiNode& n) {
  return n.kind == NodeKind::list && !n.children.empty() && n.children.front().id == scroll_anchor_id(n.id);
}

int scroll_offset(const UiNode& list) { return list.rect.y - list.children.front().rect.y; }

void refresh_scroll_clipping(UiNode& root) {
  if (is_scroll_list(root)) {
    for (std::size_t i = 1; i < root.children.size(); ++i) {
      set_visible_rec(root.children[i], root.visible && root.children[i].rect.intersects(root.rect));
    }
  }
  for (auto& c : root.children) refresh_scroll_clipping(c);
}

std::string slugify(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == ' ' && !out.empty() && out.back() != '_') {
      out.push_back('_');
    }
  }
  return out;
}

void WidgetApp::close_menus(AppContext& cx, std::string_view except) const {
  for (const auto& [trigger, menu] : menu_triggers_) {
    if (menu == except) continue;
    if (UiNode* m = cx.find(menu); m && m->open) cx.set_open(menu, false);
  }
}

void WidgetApp::activate(AppContext& cx, const UiTree& state, const std::string& id, const Action& action) const {
  const UiNode& n = state.at(id);
  if (action.type == ActionType::click || action.type == ActionType::long_press) {
    const bool in_menu = enclosing(state, id, NodeKind::menu) != nullptr || n.kind == NodeKind::menu;
    if (!in_menu && !menu_triggers_.count(id)) close_menus(cx);
  }
  if (on_activate(cx, id, action)) return;

  if (action.type == ActionType::select) {
    const UiNode* list = state.parent_of(id);
    if (!list || list->kind != NodeKind::list) {
      cx.note = "select target '" + id + "' is not a list option";
      return;
    }
    for (const auto& sib : list->children) {
      if (sib.kind != NodeKind::container) cx.node(sib.id).checked = sib.id == id;
    }
    return;
  }
  if (action.type != ActionType::click) {
    cx.note = "long press on '" + id + "' has no effect";
    return;
  }
  if (auto it = menu_triggers_.find(id); it != menu_triggers_.end()) {
    const bool open = cx.node(it->second).open;
    close_menus(cx, it->second);
    cx.set_open(it->second, !open);
    return;
  }
  switch (n.kind) {
    case NodeKind::checkbox: cx.node(id).checked = !n.checked; return;
    case NodeKind::text_field: cx.focus = id; return;
    case NodeKind::menu_item:
      if (const UiNode* menu = enclosing(state, id, NodeKind::menu)) cx.set_open(menu->id, false);
      return;
    default: cx.note = "click on '" + id + "' has no effect"; return;
  }
}

void WidgetApp::scroll(AppContext& cx, const UiTree& state, const Action& action) const {
  std::optional<std::string> container;
  if (action.target) {
    const auto hit = resolve_target(state, *action.target);
    for (const UiNode* p = hit ? &state.at(*hit) : nullptr; p; p = state.parent_of(p->id)) {
      if (is_scroll_list(*p)) {
        container = p->id;
        break;
      }
    }
  } else {
    state.for_each([&](const UiNode& n) {
      if (!container && n.visible && is_scroll_list(n)) container = n.id;
    });
  }
  if (!container) {
    cx.note = "no scroll container at target";
    return;
  }
  Direction dir = *action.direction;
  if (action.type == ActionType::swipe) {
    // Content follows the finger: swiping up reveals what is below.
    if (dir == Direction::up) {
      dir = Direction::down;
    } else if (dir == Direction::down) {
      dir = Direction::up;
    }
  }
  if (dir == Direction::left || dir == Direction::right) {
    cx.note = "horizontal scrolling is not supported by '" + *container + "'";
    return;
  }
  UiNode& list = cx.node(*container);
  const int offset = scroll_offset(list);
  int bottom = list.rect.y + list.rect.h - offset;
  for (const auto& c : list.children) bottom = std::max(bottom, content_bottom(c));
  const int max_offset = std::max(0, bottom + offset - (list.rect.y + list.rect.h));
  const int wanted = offset + (dir == Direction::down ? kScrollStep : -kScrollStep);
  const int next = std::clamp(wanted, 0, max_offset);
  if (next == offset) {
    cx.note = "'" + *container + "' is already scrolled to the limit";
    return;
  }
  for (auto& c : list.children) shift_subtree(c, offset - next);
}

Transition WidgetApp::apply(const UiTree& state, const Action& action) const {
  AppContext cx{state.root(), state.focus(), state.viewport(), {}, false, {}};
  const UiNode* dialog = top_dialog(state.root());
  auto blocked = [&](const std::string& id) { return dialog && !state.is_descendant_of(id, dialog->id); };

  switch (action.type) {
    case ActionType::click:
    case ActionType::long_press:
    case ActionType::select: {
      const auto hit = resolve_target(state, *action.target);
      if (!hit) {
        cx.note = "no visible interactive element at target";
      } else if (blocked(*hit)) {
        cx.note = "'" + *hit + "' is blocked by dialog '" + dialog->id + "'";
      } else {
        activate(cx, state, *hit, action);
      }
      break;
    }
    case ActionType::type: {
      std::optional<std::string> field = action.target ? resolve_target(state, *action.target) : state.focus();
      const UiNode* n = field ? state.find(*field) : nullptr;
      if (!n || n->kind != NodeKind::text_field || !n->visible) {
        cx.note = "no text field to type into";
      } else if (blocked(*field)) {
        cx.note = "'" + *field + "' is blocked by dialog '" + dialog->id + "'";
      } else {
        cx.node(*field).text = action.text;
        cx.focus = *field;
        on_typed(cx, *field);
      }
      break;
    }
    case ActionType::key_press: {
      const std::string& key = *action.key;
      if (on_key(cx, key)) break;
      const std::string k = to_lower(key);
      if (k == "escape" || k == "esc") {
        const UiNode* best = nullptr;
        state.for_each([&](const UiNode& n) {
          if ((n.kind == NodeKind::menu || n.kind == NodeKind::dialog) && n.open && n.visible &&
              (!best || n.z >= best->z)) {
            best = &n;
          }
        });
        if (best) {
          cx.set_open(best->id, false);
        } else {
          cx.note = "nothing to dismiss";
        }
      } else if (k == "tab") {
        std::vector<std::string> fields;
        state.for_each([&](const UiNode& n) {
          if (n.kind == NodeKind::text_field && n.visible && n.interactive && !blocked(n.id)) fields.push_back(n.id);
        });
        if (fields.empty()) {
          cx.note = "no field to focus";
        } else {
          auto it = state.focus() ? std::find(fields.begin(), fields.end(), *state.focus()) : fields.end();
          cx.focus = (it == fields.end() || std::next(it) == fields.end()) ? fields.front() : *std::next(it);
        }
      } else {
        cx.note = "key '" + key + "' has no effect";
      }
      break;
    }
    case ActionType::scroll:
    case ActionType::swipe:
      scroll(cx, state, action);
      break;
    case ActionType::drag: {
      const auto src = resolve_target(state, *action.target);
      const auto dst = resolve_drop(state, *action.to);
      if (!src || !dst) {
        cx.note = "drag source or destination not found";
      } else if (blocked(*src) || blocked(*dst)) {
        cx.note = "drag is blocked by dialog '" + dialog->id + "'";
      } else if (!on_drag(cx, *src, *dst)) {
        cx.note = "cannot drop '" + *src + "' onto '" + *dst + "'";
      }
      break;
    }
  }

  refresh_scroll_clipping(cx.root);
  if (cx.focus) {
    const UiNode* f = find_node(cx.root, *cx.focus);
    if (!f || !f->interactive) cx.focus.reset();
  }
  if (cx.crashed) cx.emit(events::kCrash);
  return Transition{UiTree(std::move(cx.root), cx.viewport, std::move(cx.focus)), std::move(cx.events), cx.crashed,
                    std::move(cx.note)};
}

}  // namespace guirl
