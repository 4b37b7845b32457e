#include "apps.hpp"

#include <array>
#include <random>

namespace guirl::apps {
namespace {

constexpr std::array<const char*, 10> kContacts{"Blake", "Casey", "Dana",   "Emery",  "Finley",
                                                 "Gray",  "Harper", "Jordan", "Morgan", "Quinn"};
constexpr int kRowHeight = 80;

bool is_conversation(const UiNode& n) { return n.kind == NodeKind::button && n.id.rfind("conv_", 0) == 0; }

void relayout(AppContext& cx) {
  UiNode& list = cx.node("conv_list");
  const int top = list.children.front().rect.y;
  int i = 0;
  for (auto& row : list.children) {
    if (is_conversation(row)) row.rect.y = top + i++ * kRowHeight;
  }
}

UiNode* marked_conversation(AppContext& cx) {
  for (auto& row : cx.node("conv_list").children) {
    if (is_conversation(row) && row.checked) return &row;
  }
  return nullptr;
}

void send(AppContext& cx) {
  UiNode& compose = cx.node("compose");
  if (compose.text.empty()) {
    cx.note = "nothing to send";
    return;
  }
  UiNode& messages = cx.node("thread_messages");
  const int n = static_cast<int>(messages.children.size());
  messages.children.push_back(make_node("msg_" + std::to_string(n + 1), NodeKind::label,
                                        {112, messages.rect.y + 8 + n * 48, 292, 40}, compose.text, false, 1));
  compose.text.clear();
  cx.emit("message_sent");
}

}  // namespace

Messaging::Messaging() { destructive_ = {"conv_menu_delete"}; }

UiTree Messaging::initial_state(std::uint64_t seed) const {
  std::mt19937_64 rng(mix_seed(seed));
  std::vector<std::string> names(kContacts.begin(), kContacts.end());
  for (std::size_t i = names.size(); i > 1; --i) std::swap(names[i - 1], names[rng() % i]);
  names.resize(5 + rng() % 6);
  names.insert(names.begin() + static_cast<std::ptrdiff_t>(rng() % 6), "Alex");

  UiNode root = make_node("screen", NodeKind::container, {0, 0, 412, 915});
  root.children.push_back(make_node("status_bar", NodeKind::label, {0, 0, 412, 32}, "12:00"));
  root.children.push_back(make_node("inbox_title", NodeKind::label, {16, 40, 380, 40}, "Messages"));

  UiNode list = make_scroll_list("conv_list", {0, 88, 412, 827});
  for (std::size_t i = 0; i < names.size(); ++i) {
    list.children.push_back(make_node("conv_" + slugify(names[i]), NodeKind::button,
                                      {0, 88 + static_cast<int>(i) * kRowHeight, 412, 76}, names[i], true));
  }
  root.children.push_back(std::move(list));

  UiNode thread = make_node("thread", NodeKind::container, {0, 32, 412, 883}, "", false, 1);
  thread.children.push_back(make_node("thread_back", NodeKind::button, {8, 40, 48, 48}, "Back", true, 1));
  thread.children.push_back(make_node("thread_title", NodeKind::label, {64, 40, 332, 48}, "", false, 1));
  thread.children.push_back(make_node("thread_messages", NodeKind::container, {0, 96, 412, 728}, "", false, 1));
  thread.children.push_back(make_node("compose", NodeKind::text_field, {8, 840, 320, 56}, "", true, 1));
  thread.children.push_back(make_node("send", NodeKind::button, {336, 840, 68, 56}, "Send", true, 1));
  thread.visible = false;
  for (auto& c : thread.children) c.visible = false;
  root.children.push_back(std::move(thread));

  UiNode menu = make_node("conv_menu", NodeKind::menu, {56, 400, 300, 96}, "", true, 10);
  menu.children.push_back(
      make_node("conv_menu_delete", NodeKind::menu_item, {56, 400, 300, 48}, "Delete conversation", true, 10));
  menu.children.push_back(make_node("conv_menu_mute", NodeKind::menu_item, {56, 448, 300, 48}, "Mute", true, 10));
  menu.visible = false;
  for (auto& c : menu.children) c.visible = false;
  root.children.push_back(std::move(menu));

  UiTree tree(std::move(root), {412, 915});
  return tree.modified([](UiNode& r, std::optional<std::string>&) { refresh_scroll_clipping(r); });
}

bool Messaging::on_activate(AppContext& cx, const std::string& id, const Action& action) const {
  const bool row = id.rfind("conv_", 0) == 0 && id != "conv_list" && id.rfind("conv_menu", 0) != 0;
  if (action.type == ActionType::long_press) {
    if (!row) return false;
    for (auto& r : cx.node("conv_list").children) {
      if (is_conversation(r)) r.checked = r.id == id;
    }
    cx.set_open("conv_menu", true);
    return true;
  }
  if (action.type != ActionType::click) return false;

  if (row) {
    const std::string name = cx.node(id).text;
    cx.show("conv_list", false);
    cx.show("thread", true);
    cx.node("thread_title").text = name;
    cx.node("thread_messages").children.clear();
    cx.node("compose").text.clear();
    cx.emit("thread_opened");
    return true;
  }
  if (id == "thread_back") {
    cx.show("thread", false);
    cx.show("conv_list", true);
    cx.focus.reset();
    return true;
  }
  if (id == "send") {
    send(cx);
    return true;
  }
  if (id == "conv_menu_delete") {
    cx.set_open("conv_menu", false);
    if (UiNode* victim = marked_conversation(cx)) {
      const std::string vid = victim->id;
      remove_node(cx.root, vid);
      relayout(cx);
      cx.emit(events::kDestructiveDone);
      cx.emit("conversation_deleted");
    }
    return true;
  }
  if (id == "conv_menu_mute") {
    cx.set_open("conv_menu", false);
    if (marked_conversation(cx)) cx.emit("conversation_muted");
    return true;
  }
  return false;
}

bool Messaging::on_key(AppContext& cx, const std::string& key) const {
  if (key == "Enter" && cx.focus == std::optional<std::string>("compose")) {
    send(cx);
    return true;
  }
  if (key == "Back" && cx.node("thread").visible) {
    cx.show("thread", false);
    cx.show("conv_list", true);
    cx.focus.reset();
    return true;
  }
  return false;
}

}  // namespace guirl::apps
