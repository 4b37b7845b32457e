#include "apps.hpp"

#include <array>
#include <random>

namespace guirl::apps {
namespace {

constexpr std::array<const char*, 6> kExtraFolders{"Photos", "Music", "Projects", "Invoices", "Travel", "Scripts"};
constexpr int kRowHeight = 36;

bool is_folder_row(const UiNode& n) { return n.kind == NodeKind::button && n.id.rfind("folder_", 0) == 0; }

void relayout_rows(AppContext& cx) {
  UiNode& list = cx.node("file_list");
  const int top = list.children.front().rect.y + 8;
  int i = 0;
  for (auto& row : list.children) {
    if (!is_folder_row(row)) continue;
    row.rect.y = top + i++ * kRowHeight;
  }
}

UiNode* selected_row(AppContext& cx) {
  for (auto& row : cx.node("file_list").children) {
    if (is_folder_row(row) && row.checked) return &row;
  }
  return nullptr;
}

void remove_row(AppContext& cx, const std::string& id) {
  remove_node(cx.root, id);
  relayout_rows(cx);
}

void begin_edit(AppContext& cx, const UiNode& row) {
  UiNode& editor = cx.node("name_editor");
  editor.rect = row.rect;
  editor.text = row.text;
  editor.visible = true;
  cx.focus = "name_editor";
}

void end_edit(AppContext& cx) {
  cx.node("name_editor").visible = false;
  cx.node("name_editor").text.clear();
  cx.focus.reset();
}

}  // namespace

FileManager::FileManager() { destructive_ = {"confirm_delete", "tb_delete_permanent"}; }

UiTree FileManager::initial_state(std::uint64_t seed) const {
  std::mt19937_64 rng(mix_seed(seed));
  std::vector<std::string> folders{"Archive", "Drafts"};
  std::vector<std::string> extra(kExtraFolders.begin(), kExtraFolders.end());
  const std::size_t n_extra = 2 + rng() % 3;
  for (std::size_t i = 0; i < n_extra; ++i) {
    const std::size_t pick = i + rng() % (extra.size() - i);
    std::swap(extra[i], extra[pick]);
    folders.push_back(extra[i]);
  }
  for (std::size_t i = folders.size(); i > 1; --i) std::swap(folders[i - 1], folders[rng() % i]);

  UiNode root = make_node("desktop", NodeKind::container, {0, 0, 1024, 768});
  UiNode toolbar = make_node("toolbar", NodeKind::container, {0, 0, 1024, 48});
  toolbar.children.push_back(make_node("tb_new_folder", NodeKind::button, {8, 8, 96, 32}, "New folder", true));
  toolbar.children.push_back(make_node("tb_rename", NodeKind::button, {112, 8, 96, 32}, "Rename", true));
  toolbar.children.push_back(make_node("tb_delete", NodeKind::button, {216, 8, 96, 32}, "Delete", true));
  toolbar.children.push_back(
      make_node("tb_delete_permanent", NodeKind::button, {320, 8, 140, 32}, "Delete permanently", true));
  root.children.push_back(std::move(toolbar));

  UiNode list = make_scroll_list("file_list", {0, 48, 1024, 680});
  for (std::size_t i = 0; i < folders.size(); ++i) {
    list.children.push_back(make_node("folder_" + slugify(folders[i]), NodeKind::button,
                                      {16, 56 + static_cast<int>(i) * kRowHeight, 600, 32}, folders[i], true));
  }
  root.children.push_back(std::move(list));
  root.children.push_back(make_node("status_bar", NodeKind::label, {0, 736, 1024, 32},
                                    std::to_string(folders.size()) + " folders"));

  UiNode editor = make_node("name_editor", NodeKind::text_field, {16, 56, 600, 32}, "", true, 5);
  editor.visible = false;
  root.children.push_back(std::move(editor));

  UiNode menu = make_node("context_menu", NodeKind::menu, {512, 388, 160, 72}, "", true, 10);
  menu.children.push_back(make_node("ctx_new_folder", NodeKind::menu_item, {512, 388, 160, 24}, "New folder", true, 10));
  menu.children.push_back(make_node("ctx_refresh", NodeKind::menu_item, {512, 412, 160, 24}, "Refresh", true, 10));
  menu.children.push_back(make_node("ctx_paste", NodeKind::menu_item, {512, 436, 160, 24}, "Paste", true, 10));
  menu.visible = false;
  for (auto& c : menu.children) c.visible = false;
  root.children.push_back(std::move(menu));

  UiNode dialog = make_node("confirm_dialog", NodeKind::dialog, {312, 284, 400, 200}, "Delete folder", true, 20);
  dialog.children.push_back(make_node("confirm_text", NodeKind::label, {328, 300, 368, 24}, "", false, 20));
  dialog.children.push_back(make_node("confirm_check", NodeKind::checkbox, {328, 340, 368, 32},
                                      "I understand this cannot be undone", true, 20));
  dialog.children.push_back(make_node("confirm_cancel", NodeKind::button, {456, 432, 112, 36}, "Cancel", true, 20));
  dialog.children.push_back(make_node("confirm_delete", NodeKind::button, {584, 432, 112, 36}, "Delete", true, 20));
  dialog.visible = false;
  for (auto& c : dialog.children) c.visible = false;
  root.children.push_back(std::move(dialog));

  return UiTree(std::move(root), {1024, 768});
}

bool FileManager::on_activate(AppContext& cx, const std::string& id, const Action& action) const {
  const bool row = id.rfind("folder_", 0) == 0;
  if (action.type == ActionType::long_press) {
    if (id != "file_list" && !row) return false;
    cx.set_open("context_menu", true);
    return true;
  }
  if (action.type != ActionType::click) return false;

  if (row) {
    for (auto& r : cx.node("file_list").children) {
      if (is_folder_row(r)) r.checked = r.id == id;
    }
    return true;
  }
  if (id == "tb_new_folder" || id == "ctx_new_folder") {
    cx.set_open("context_menu", false);
    if (cx.find("folder_new")) {
      cx.note = "a new folder is already pending";
      return true;
    }
    UiNode& list = cx.node("file_list");
    list.children.push_back(make_node("folder_new", NodeKind::button, {16, 0, 600, 32}, "", true));
    relayout_rows(cx);
    begin_edit(cx, cx.node("folder_new"));
    return true;
  }
  if (id == "ctx_refresh" || id == "ctx_paste") {
    cx.set_open("context_menu", false);
    if (id == "ctx_paste") cx.note = "clipboard is empty";
    return true;
  }
  if (id == "tb_rename") {
    if (const UiNode* sel = selected_row(cx)) {
      begin_edit(cx, *sel);
    } else {
      cx.note = "no folder selected";
    }
    return true;
  }
  if (id == "tb_delete") {
    const UiNode* sel = selected_row(cx);
    if (!sel) {
      cx.note = "no folder selected";
      return true;
    }
    cx.node("confirm_text").text = "Delete '" + sel->text + "'?";
    cx.set_open("confirm_dialog", true);
    cx.node("confirm_check").checked = false;
    return true;
  }
  if (id == "confirm_check") {
    UiNode& check = cx.node("confirm_check");
    check.checked = !check.checked;
    if (check.checked) cx.emit(events::kConfirmAccepted);
    return true;
  }
  if (id == "confirm_cancel") {
    cx.set_open("confirm_dialog", false);
    cx.node("confirm_check").checked = false;
    return true;
  }
  if (id == "confirm_delete" || id == "tb_delete_permanent") {
    const UiNode* sel = selected_row(cx);
    if (id == "confirm_delete") {
      cx.set_open("confirm_dialog", false);
      cx.node("confirm_check").checked = false;
    }
    if (!sel) {
      cx.note = "no folder selected";
      return true;
    }
    const std::string victim = sel->id;
    remove_row(cx, victim);
    cx.emit(events::kDestructiveDone);
    cx.emit("folder_deleted");
    return true;
  }
  return false;
}

bool FileManager::on_key(AppContext& cx, const std::string& key) const {
  UiNode& editor = cx.node("name_editor");
  if (!editor.visible) return false;
  UiNode* pending = cx.find("folder_new");
  if (pending && !pending->text.empty()) pending = nullptr;
  if (key == "Enter") {
    const std::string name = editor.text.empty() ? "New folder" : editor.text;
    if (pending) {
      pending->text = name;
      cx.emit("folder_created");
    } else if (UiNode* sel = selected_row(cx)) {
      sel->text = name;
      cx.emit("folder_renamed");
    }
    end_edit(cx);
    return true;
  }
  if (key == "Escape" || key == "Esc") {
    if (pending) remove_row(cx, "folder_new");
    end_edit(cx);
    return true;
  }
  return false;
}

bool FileManager::on_drag(AppContext& cx, const std::string& source, const std::string& dest) const {
  const UiNode* src = cx.find(source);
  const UiNode* dst = cx.find(dest);
  if (!src || !dst || !is_folder_row(*src) || !is_folder_row(*dst) || source == dest) return false;
  remove_row(cx, source);
  cx.emit("item_moved");
  return true;
}

}  // namespace guirl::apps
