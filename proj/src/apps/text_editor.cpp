#include "apps.hpp"

#include <array>

namespace guirl::apps {
namespace {

constexpr std::array<const char*, 4> kDocuments{
    "Quarterly report draft",
    "Meeting notes, March",
    "Release checklist",
    "Budget summary",
};

}  // namespace

TextEditor::TextEditor() {
  menu_triggers_ = {{"file_menu_button", "file_menu"}, {"edit_menu_button", "edit_menu"}};
  destructive_ = {"menu_discard", "edit_clear"};
}

UiTree TextEditor::initial_state(std::uint64_t seed) const {
  const std::string doc = kDocuments[mix_seed(seed) % kDocuments.size()];

  UiNode root = make_node("desktop", NodeKind::container, {0, 0, 1280, 800});
  UiNode window = make_node("editor_window", NodeKind::container, {376, 232, 600, 440}, doc + " - Editor");
  window.children.push_back(make_node("editor_title", NodeKind::label, {376, 232, 600, 20}, doc + " - Editor"));

  UiNode menubar = make_node("menubar", NodeKind::container, {376, 252, 600, 24});
  menubar.children.push_back(make_node("file_menu_button", NodeKind::button, {384, 253, 56, 24}, "File", true));
  menubar.children.push_back(make_node("edit_menu_button", NodeKind::button, {440, 253, 56, 24}, "Edit", true));
  menubar.children.push_back(make_node("view_menu_button", NodeKind::button, {496, 253, 56, 24}, "View", true));
  window.children.push_back(std::move(menubar));

  window.children.push_back(make_node("document", NodeKind::text_field, {384, 284, 584, 380}, doc, true));
  root.children.push_back(std::move(window));

  UiNode file_menu = make_node("file_menu", NodeKind::menu, {384, 277, 200, 120}, "File", true, 10);
  const std::array<std::pair<const char*, const char*>, 5> file_items{{
      {"menu_new", "New"},
      {"menu_open", "Open..."},
      {"menu_export_pdf", "Export as PDF..."},
      {"menu_export_epub", "Export as EPUB..."},
      {"menu_discard", "Discard changes"},
  }};
  for (std::size_t i = 0; i < file_items.size(); ++i) {
    file_menu.children.push_back(make_node(file_items[i].first, NodeKind::menu_item,
                                           {384, 277 + static_cast<int>(i) * 24, 200, 24}, file_items[i].second,
                                           true, 10));
  }
  UiNode edit_menu = make_node("edit_menu", NodeKind::menu, {440, 277, 200, 48}, "Edit", true, 10);
  edit_menu.children.push_back(make_node("edit_undo", NodeKind::menu_item, {440, 277, 200, 24}, "Undo", true, 10));
  edit_menu.children.push_back(
      make_node("edit_clear", NodeKind::menu_item, {440, 301, 200, 24}, "Clear document", true, 10));
  for (UiNode* m : {&file_menu, &edit_menu}) {
    m->visible = false;
    for (auto& c : m->children) c.visible = false;
  }
  root.children.push_back(std::move(file_menu));
  root.children.push_back(std::move(edit_menu));

  UiNode dialog = make_node("save_dialog", NodeKind::dialog, {440, 300, 400, 200}, "Export as PDF", true, 20);
  dialog.children.push_back(make_node("save_title", NodeKind::label, {456, 312, 368, 24}, "Export as PDF", false, 20));
  dialog.children.push_back(make_node("filename_field", NodeKind::text_field, {456, 352, 368, 32},
                                      slugify(doc) + ".pdf", true, 20));
  dialog.children.push_back(make_node("save_dialog_cancel", NodeKind::button, {600, 448, 104, 36}, "Cancel", true, 20));
  dialog.children.push_back(make_node("save_dialog_save", NodeKind::button, {720, 448, 104, 36}, "Save", true, 20));
  dialog.visible = false;
  for (auto& c : dialog.children) c.visible = false;
  root.children.push_back(std::move(dialog));

  UiNode toast = make_node("export_toast", NodeKind::label, {900, 720, 360, 40}, "", false, 30);
  toast.visible = false;
  root.children.push_back(std::move(toast));

  return UiTree(std::move(root), {1280, 800});
}

bool TextEditor::on_activate(AppContext& cx, const std::string& id, const Action& action) const {
  if (action.type != ActionType::click) return false;
  if (id == "menu_export_pdf") {
    cx.set_open("file_menu", false);
    cx.set_open("save_dialog", true);
    cx.focus = "filename_field";
    return true;
  }
  if (id == "menu_export_epub") {
    cx.set_open("file_menu", false);
    cx.crashed = true;
    cx.note = "the EPUB exporter crashed";
    return true;
  }
  if (id == "menu_discard" || id == "edit_clear") {
    cx.set_open(id == "menu_discard" ? "file_menu" : "edit_menu", false);
    cx.node("document").text.clear();
    cx.emit(events::kDestructiveDone);
    cx.emit("document_cleared");
    return true;
  }
  if (id == "save_dialog_save") {
    const std::string name = cx.node("filename_field").text;
    if (name.empty()) {
      cx.note = "cannot save without a file name";
      return true;
    }
    cx.set_open("save_dialog", false);
    UiNode& toast = cx.node("export_toast");
    toast.text = "Exported " + name;
    toast.visible = true;
    cx.focus.reset();
    cx.emit("file_created");
    return true;
  }
  if (id == "save_dialog_cancel") {
    cx.set_open("save_dialog", false);
    cx.focus.reset();
    return true;
  }
  return false;
}

bool TextEditor::on_key(AppContext& cx, const std::string& key) const {
  if (key == "Enter" && cx.node("save_dialog").open) {
    return on_activate(cx, "save_dialog_save", click_on("save_dialog_save"));
  }
  return false;
}

}  // namespace guirl::apps
