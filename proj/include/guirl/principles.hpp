#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guirl/action.hpp"

namespace guirl {

// The ten reward channels: five environment-verifiable, five critique-derived.
enum class Channel {
  action_type,
  target_bound,
  ui_transition,
  format_validity,
  safety_guard,
  coherence,
  planning,
  efficiency,
  etiquette,
  consistency,
};

inline constexpr std::array<Channel, 5> kEvpChannels{Channel::action_type, Channel::target_bound,
                                                     Channel::ui_transition, Channel::format_validity,
                                                     Channel::safety_guard};
inline constexpr std::array<Channel, 5> kLdpChannels{Channel::coherence, Channel::planning,
                                                     Channel::efficiency, Channel::etiquette,
                                                     Channel::consistency};

std::string_view channel_name(Channel c);
std::optional<Channel> parse_channel(std::string_view name);
bool is_evp(Channel c);
// Position of the channel inside kEvpChannels or kLdpChannels.
std::size_t channel_slot(Channel c);

enum class PrincipleSource { human, llm };

std::string_view source_name(PrincipleSource s);

// Facts a principle's applicability expression may test.
struct ApplicabilityContext {
  const Action* action = nullptr;  // null when the turn was malformed
  bool targets_destructive = false;
  bool dialog_open = false;
};

// Boolean expression over ApplicabilityContext:
//   expr := or ; or := and ('||' and)* ; and := unary ('&&' unary)*
//   unary := '!' unary | '(' expr ')' | 'always' | 'never'
//          | 'targets_destructive' | 'dialog_open' | 'action_in(' name (',' name)* ')'
class Applicability {
 public:
  // Throws SchemaError with the column of the offending token.
  static Applicability parse(std::string_view expression);
  static Applicability always() { return parse("always"); }

  bool evaluate(const ApplicabilityContext& ctx) const;
  const std::string& expression() const { return expression_; }

  struct Node;

 private:
  std::string expression_;
  std::shared_ptr<const Node> root_;
};

struct Principle {
  std::string id;
  PrincipleSource source = PrincipleSource::human;
  std::string text;
  Channel channel = Channel::action_type;
  Applicability applicability = Applicability::always();
};

// P = human-defined principles ∪ LLM-derived principles. Immutable once built.
class PrincipleSet {
 public:
  PrincipleSet() = default;
  // Throws SchemaError on duplicate ids.
  explicit PrincipleSet(std::vector<Principle> principles);

  const std::vector<Principle>& principles() const { return principles_; }
  std::size_t size() const { return principles_.size(); }
  bool empty() const { return principles_.empty(); }
  std::size_t human_count() const;
  std::size_t llm_count() const;

  const Principle* find(std::string_view id) const;
  // Principles whose id is listed, in the order of `ids`; unknown ids skipped.
  PrincipleSet subset(const std::vector<std::string>& ids) const;
  PrincipleSet applicable(const ApplicabilityContext& ctx) const;

  // A channel contributes only when some principle mapped to it applies.
  bool channel_active(Channel c, const ApplicabilityContext& ctx) const;

  ordered_json to_json() const;
  static PrincipleSet from_json(const nlohmann::json& j);
  static PrincipleSet load_file(const std::string& path);

 private:
  std::vector<Principle> principles_;
};

// Built-in catalog covering all ten channels.
const PrincipleSet& default_principles();

}  // namespace guirl
