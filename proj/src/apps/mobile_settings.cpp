#include "apps.hpp"

#include <array>
#include <random>

namespace guirl::apps {
namespace {

constexpr std::array<std::pair<const char*, const char*>, 5> kOtherRows{{
    {"row_display", "Display"},
    {"row_sound", "Sound"},
    {"row_battery", "Battery"},
    {"row_storage", "Storage"},
    {"row_about", "About phone"},
}};

void show_page(AppContext& cx, bool network) {
  cx.show("settings_home", !network);
  cx.show("network_page", network);
}

}  // namespace

MobileSettings::MobileSettings() = default;

UiTree MobileSettings::initial_state(std::uint64_t seed) const {
  std::mt19937_64 rng(mix_seed(seed));
  std::vector<std::pair<const char*, const char*>> rows(kOtherRows.begin(), kOtherRows.end());
  for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng() % i]);
  rows.insert(rows.begin(), {"row_network", "Network & internet"});

  UiNode root = make_node("screen", NodeKind::container, {0, 0, 412, 915});
  root.children.push_back(make_node("status_bar", NodeKind::label, {0, 0, 412, 32}, "12:00"));

  UiNode home = make_node("settings_home", NodeKind::container, {0, 32, 412, 883});
  home.children.push_back(make_node("home_title", NodeKind::label, {16, 48, 380, 48}, "Settings"));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    home.children.push_back(make_node(rows[i].first, NodeKind::button,
                                      {0, 112 + static_cast<int>(i) * 72, 412, 72}, rows[i].second, true));
  }
  root.children.push_back(std::move(home));

  UiNode page = make_node("network_page", NodeKind::container, {0, 32, 412, 883}, "", false, 1);
  page.children.push_back(make_node("back_button", NodeKind::button, {8, 48, 48, 48}, "Back", true, 1));
  page.children.push_back(make_node("net_title", NodeKind::label, {64, 48, 332, 48}, "Network & internet", false, 1));
  page.children.push_back(make_node("wifi_toggle", NodeKind::checkbox, {16, 120, 380, 64}, "Wi-Fi", true, 1));
  page.children.push_back(
      make_node("airplane_toggle", NodeKind::checkbox, {16, 192, 380, 64}, "Airplane mode", true, 1));
  UiNode data = make_node("mobile_data", NodeKind::checkbox, {16, 264, 380, 64}, "Mobile data", true, 1);
  data.checked = true;
  page.children.push_back(std::move(data));
  page.visible = false;
  for (auto& c : page.children) c.visible = false;
  root.children.push_back(std::move(page));

  return UiTree(std::move(root), {412, 915});
}

bool MobileSettings::on_activate(AppContext& cx, const std::string& id, const Action& action) const {
  if (action.type != ActionType::click) return false;
  if (id == "row_network") {
    show_page(cx, true);
    return true;
  }
  if (id == "back_button") {
    show_page(cx, false);
    return true;
  }
  if (id == "wifi_toggle") {
    UiNode& wifi = cx.node("wifi_toggle");
    wifi.checked = !wifi.checked;
    if (wifi.checked) cx.node("airplane_toggle").checked = false;
    cx.emit(wifi.checked ? "wifi_on" : "wifi_off");
    return true;
  }
  if (id == "airplane_toggle") {
    UiNode& plane = cx.node("airplane_toggle");
    plane.checked = !plane.checked;
    if (plane.checked) {
      cx.node("wifi_toggle").checked = false;
      cx.node("mobile_data").checked = false;
    }
    cx.emit(plane.checked ? "airplane_on" : "airplane_off");
    return true;
  }
  if (id.rfind("row_", 0) == 0) {
    cx.note = "page '" + id + "' is not modeled";
    return true;
  }
  return false;
}

bool MobileSettings::on_key(AppContext& cx, const std::string& key) const {
  if (key != "Back" && key != "Escape") return false;
  if (cx.node("network_page").visible) {
    show_page(cx, false);
  } else {
    cx.note = "already on the home page";
  }
  return true;
}

}  // namespace guirl::apps
