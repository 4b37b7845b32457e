#include "apps.hpp"

#include <array>

namespace guirl::apps {
namespace {

constexpr std::array<int, 3> kSubmitOffsets{0, 24, 48};

}  // namespace

WebForm::WebForm() = default;

UiTree WebForm::initial_state(std::uint64_t seed) const {
  const int dy = kSubmitOffsets[mix_seed(seed) % kSubmitOffsets.size()];

  UiNode root = make_node("page", NodeKind::container, {0, 0, 1280, 800});
  UiNode nav = make_node("nav", NodeKind::container, {0, 0, 1280, 56});
  nav.children.push_back(make_node("nav_home", NodeKind::link, {40, 16, 80, 24}, "Home", true));
  nav.children.push_back(make_node("nav_login", NodeKind::link, {136, 16, 80, 24}, "Log in", true));
  nav.children.push_back(make_node("nav_help", NodeKind::link, {232, 16, 80, 24}, "Help", true));
  root.children.push_back(std::move(nav));

  UiNode form = make_scroll_list("form_scroll", {40, 64, 800, 520});
  form.children.push_back(make_node("form_title", NodeKind::label, {56, 72, 768, 32}, "Create your account"));
  const std::array<std::tuple<const char*, const char*, int>, 3> fields{{
      {"first_name", "First name", 120},
      {"last_name", "Last name", 192},
      {"email", "Email", 264},
  }};
  for (const auto& [id, label, y] : fields) {
    form.children.push_back(make_node(std::string(id) + "_label", NodeKind::label, {56, y, 200, 24}, label));
    form.children.push_back(make_node(id, NodeKind::text_field, {264, y - 4, 400, 32}, "", true));
  }
  form.children.push_back(make_node("country_label", NodeKind::label, {56, 320, 200, 24}, "Country"));
  UiNode countries = make_node("country_list", NodeKind::list, {264, 320, 400, 72}, "", true);
  const std::array<std::pair<const char*, const char*>, 3> options{{
      {"opt_us", "United States"}, {"opt_ca", "Canada"}, {"opt_de", "Germany"}}};
  for (std::size_t i = 0; i < options.size(); ++i) {
    countries.children.push_back(make_node(options[i].first, NodeKind::menu_item,
                                           {264, 320 + static_cast<int>(i) * 24, 400, 24}, options[i].second, true));
  }
  form.children.push_back(std::move(countries));
  form.children.push_back(
      make_node("terms", NodeKind::checkbox, {56, 420, 600, 28}, "I accept the terms of service", true));
  form.children.push_back(
      make_node("newsletter", NodeKind::checkbox, {56, 460, 600, 28}, "Send me the newsletter", true));
  form.children.push_back(make_node("privacy_link", NodeKind::link, {56, 500, 200, 24}, "Privacy policy", true));
  form.children.push_back(make_node("submit", NodeKind::button, {56, 640 + dy, 160, 40}, "Create account", true));
  root.children.push_back(std::move(form));

  UiNode ok = make_node("success_banner", NodeKind::label, {880, 96, 360, 48}, "Account created", false, 5);
  ok.visible = false;
  root.children.push_back(std::move(ok));
  UiNode err = make_node("error_banner", NodeKind::label, {880, 96, 360, 48}, "", false, 5);
  err.visible = false;
  root.children.push_back(std::move(err));

  UiTree tree(std::move(root), {1280, 800});
  return tree.modified([](UiNode& r, std::optional<std::string>&) { refresh_scroll_clipping(r); });
}

bool WebForm::on_activate(AppContext& cx, const std::string& id, const Action& action) const {
  if (action.type != ActionType::click || id != "submit") return false;
  const bool complete = !cx.node("first_name").text.empty() && !cx.node("last_name").text.empty() &&
                        cx.node("terms").checked;
  if (complete) {
    cx.node("error_banner").visible = false;
    cx.node("success_banner").visible = true;
    cx.emit("form_submitted");
  } else {
    UiNode& err = cx.node("error_banner");
    err.text = cx.node("terms").checked ? "Please fill in your name" : "Please accept the terms";
    err.visible = true;
    cx.emit("form_error");
  }
  return true;
}

bool WebForm::on_key(AppContext& cx, const std::string& key) const {
  if (key != "Enter") return false;
  const UiNode& submit = cx.node("submit");
  if (!submit.visible) {
    cx.note = "submit button is not on screen";
    return true;
  }
  return on_activate(cx, "submit", click_on("submit"));
}

}  // namespace guirl::apps
