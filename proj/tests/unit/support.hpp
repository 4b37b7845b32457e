#pragma once

// Hand-rolled generators and independent reference implementations shared by
// the unit suites and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "guirl/action.hpp"
#include "guirl/reward.hpp"
#include "guirl/ui_tree.hpp"

namespace testsupport {

using namespace guirl;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t bits() { return rng_(); }
  int int_in(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double unit() { return static_cast<double>(rng_() >> 11) * (1.0 / 9007199254740992.0); }
  double real_in(double lo, double hi) { return lo + (hi - lo) * unit(); }
  bool chance(double p) { return unit() < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[rng_() % v.size()];
  }

  std::string word(int min_len = 1, int max_len = 8) {
    static const std::string letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-";
    std::string s;
    const int n = int_in(min_len, max_len);
    for (int i = 0; i < n; ++i) s += letters[rng_() % letters.size()];
    return s;
  }

  std::string bytes(int max_len) {
    std::string s;
    const int n = int_in(0, max_len);
    for (int i = 0; i < n; ++i) s += static_cast<char>(rng_() & 0xff);
    return s;
  }

 private:
  std::mt19937_64 rng_;
};

inline const std::vector<NodeKind>& all_kinds() {
  static const std::vector<NodeKind> k{NodeKind::button, NodeKind::menu,      NodeKind::menu_item, NodeKind::text_field,
                                       NodeKind::dialog, NodeKind::label,     NodeKind::container, NodeKind::checkbox,
                                       NodeKind::list,   NodeKind::link};
  return k;
}

inline const std::vector<ActionType>& all_action_types() {
  static const std::vector<ActionType> t{ActionType::click, ActionType::type,  ActionType::scroll, ActionType::key_press,
                                         ActionType::swipe, ActionType::drag,  ActionType::select, ActionType::long_press};
  return t;
}

inline UiNode random_node(Gen& g, const std::string& id, const Viewport& vp, int depth) {
  UiNode n;
  n.id = id;
  n.kind = g.pick(all_kinds());
  n.rect = {g.int_in(-50, vp.width), g.int_in(-50, vp.height), g.int_in(0, vp.width / 2), g.int_in(0, vp.height / 2)};
  n.visible = g.chance(0.8);
  n.interactive = kind_may_be_interactive(n.kind) && g.chance(0.7);
  n.open = (n.kind == NodeKind::menu || n.kind == NodeKind::dialog) && g.chance(0.5);
  n.checked = g.chance(0.2);
  n.text = g.chance(0.6) ? g.word(1, 12) : "";
  n.z = g.int_in(0, 4);
  if (depth < 2) {
    const int kids = g.int_in(0, 3);
    for (int i = 0; i < kids; ++i) n.children.push_back(random_node(g, id + "_" + std::to_string(i), vp, depth + 1));
  }
  return n;
}

inline UiTree random_tree(Gen& g) {
  const Viewport vp{g.int_in(200, 1920), g.int_in(200, 1080)};
  UiNode root;
  root.id = "root";
  root.kind = NodeKind::container;
  root.rect = {0, 0, vp.width, vp.height};
  const int n = g.int_in(0, 8);
  for (int i = 0; i < n; ++i) root.children.push_back(random_node(g, "n" + std::to_string(i), vp, 0));
  return UiTree(root, vp);
}

inline std::vector<std::string> node_ids(const UiTree& t) {
  std::vector<std::string> ids;
  t.for_each([&](const UiNode& n) { ids.push_back(n.id); });
  return ids;
}

inline Target random_target(Gen& g, const std::vector<std::string>& ids, const Viewport& vp) {
  if (!ids.empty() && g.chance(0.4)) return Target{g.pick(ids)};
  return Target{Point{g.int_in(-20, vp.width + 20), g.int_in(-20, vp.height + 20)}};
}

// Any schema-valid action; element ids are drawn from `ids` when given.
inline Action random_action(Gen& g, const std::vector<std::string>& ids = {}, Viewport vp = {1280, 800}) {
  static const std::vector<std::string> keys{"Enter", "Escape", "Tab", "Back", "Esc", "a", "F5"};
  Action a;
  a.type = g.pick(all_action_types());
  switch (a.type) {
    case ActionType::click:
    case ActionType::select:
    case ActionType::long_press: a.target = random_target(g, ids, vp); break;
    case ActionType::type:
      a.text = g.word(1, 16);
      if (g.chance(0.7)) a.target = random_target(g, ids, vp);
      break;
    case ActionType::scroll:
    case ActionType::swipe:
      a.direction = static_cast<Direction>(g.int_in(0, 3));
      if (g.chance(0.5)) a.target = random_target(g, ids, vp);
      break;
    case ActionType::key_press: a.key = g.pick(keys); break;
    case ActionType::drag:
      a.target = random_target(g, ids, vp);
      a.to = random_target(g, ids, vp);
      break;
  }
  return a;
}

// Reference r_target = max(0, 1 - (|dx|/W + |dy|/H)/2), computed by walking
// the Manhattan path one pixel at a time in long double.
inline double oracle_target_bound(Point p, Point gold, Viewport vp) {
  long double steps_x = 0, steps_y = 0;
  for (int x = std::min(p.x, gold.x); x < std::max(p.x, gold.x); ++x) steps_x += 1;
  for (int y = std::min(p.y, gold.y); y < std::max(p.y, gold.y); ++y) steps_y += 1;
  const long double delta = (steps_x / vp.width + steps_y / vp.height) / 2;
  const long double r = 1 - delta;
  return static_cast<double>(r < 0 ? 0 : r);
}

// Naive left fold, index by index.
inline double oracle_fold(const std::vector<double>& xs) {
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) acc = acc + xs[i];
  return acc;
}

// Random on-grid step totals, as produced by step_reward.
inline std::vector<double> random_step_totals(Gen& g, int max_len = 40) {
  std::vector<double> out;
  const int n = g.int_in(0, max_len);
  for (int i = 0; i < n; ++i) out.push_back(quantize_reward(g.real_in(-3.0, 6.0)));
  return out;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("guirl_" + tag + "_" + std::to_string(std::random_device{}()) + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::size_t count_lines(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) n += line.empty() ? 0 : 1;
  return n;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace testsupport
