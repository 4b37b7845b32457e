#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guirl/action.hpp"
#include "guirl/evp.hpp"
#include "guirl/ui_tree.hpp"

namespace guirl {

struct Transition {
  UiTree next;
  std::vector<std::string> events;
  bool crashed = false;  // the app reached its faulty terminal state
  std::string note;      // why an action had no effect, if it had none
};

// A scripted application: a deterministic state machine over UI trees.
class AppModel {
 public:
  virtual ~AppModel() = default;
  virtual std::string name() const = 0;
  virtual UiTree initial_state(std::uint64_t seed) const = 0;
  virtual Transition apply(const UiTree& state, const Action& action) const = 0;
  virtual const DestructiveSet& destructive_nodes() const = 0;
};

// Throws LookupError for an unknown model name.
const AppModel& find_app_model(std::string_view name);
bool has_app_model(std::string_view name);
std::vector<std::string> app_model_names();

// Working copy of a state while one action is applied.
struct AppContext {
  UiNode root;
  std::optional<std::string> focus;
  Viewport viewport;
  std::vector<std::string> events;
  bool crashed = false;
  std::string note;

  UiNode* find(std::string_view id) { return find_node(root, id); }
  // Throws LookupError.
  UiNode& node(std::string_view id);
  // Sets `visible` on the node and its whole subtree.
  void show(std::string_view id, bool visible);
  // Opens or closes a menu / dialog, showing or hiding its subtree.
  void set_open(std::string_view id, bool open);
  void emit(std::string_view event) { events.emplace_back(event); }
};

// Shared widget behaviour; concrete apps override the hooks.
//   click on a menu trigger toggles its menu (closing the others), a checkbox
//   toggles, a text field takes focus, a menu item closes its menu;
//   type writes into the target or focused text field; scroll / swipe move a
//   scroll container; Escape closes the topmost menu or dialog; Tab cycles
//   text-field focus; select marks one option of a list.
// An open dialog is modal: pointer actions outside it have no effect.
class WidgetApp : public AppModel {
 public:
  Transition apply(const UiTree& state, const Action& action) const override;
  const DestructiveSet& destructive_nodes() const override { return destructive_; }

  static constexpr int kScrollStep = 240;

 protected:
  // Hooks return true when they fully handled the action.
  virtual bool on_activate(AppContext&, const std::string& /*id*/, const Action&) const { return false; }
  virtual bool on_key(AppContext&, const std::string& /*key*/) const { return false; }
  virtual void on_typed(AppContext&, const std::string& /*field*/) const {}
  virtual bool on_drag(AppContext&, const std::string& /*source*/, const std::string& /*dest*/) const {
    return false;
  }

  std::map<std::string, std::string, std::less<>> menu_triggers_;  // trigger button -> menu
  DestructiveSet destructive_;

 private:
  void activate(AppContext& cx, const UiTree& state, const std::string& id, const Action& action) const;
  void scroll(AppContext& cx, const UiTree& state, const Action& action) const;
  void close_menus(AppContext& cx, std::string_view except = {}) const;
};

// Builders shared by the app models.
UiNode make_node(std::string id, NodeKind kind, Rect rect, std::string text = {}, bool interactive = false,
                 int z = 0);
// Scroll containers are interactive lists whose first child is the
// zero-size anchor "<id>_anchor"; its y is the list's y minus the scroll offset.
UiNode make_scroll_list(std::string id, Rect rect, int z = 0);
std::string scroll_anchor_id(std::string_view list_id);
bool is_scroll_list(const UiNode& n);
int scroll_offset(const UiNode& list);
// Restores the clip rule: direct children of a visible scroll list are visible
// iff they intersect it; children of a hidden list are hidden.
void refresh_scroll_clipping(UiNode& root);
// Lowercase slug for node ids: letters and digits, spaces become '_'.
std::string slugify(std::string_view text);

}  // namespace guirl
