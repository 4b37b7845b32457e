#include <memory>

#include "apps.hpp"
#include "guirl/errors.hpp"

namespace guirl {
namespace {

const std::vector<std::unique_ptr<AppModel>>& registry() {
  static const auto models = [] {
    std::vector<std::unique_ptr<AppModel>> m;
    m.push_back(std::make_unique<apps::TextEditor>());
    m.push_back(std::make_unique<apps::FileManager>());
    m.push_back(std::make_unique<apps::WebForm>());
    m.push_back(std::make_unique<apps::MobileSettings>());
    m.push_back(std::make_unique<apps::Messaging>());
    return m;
  }();
  return models;
}

}  // namespace

const AppModel& find_app_model(std::string_view name) {
  for (const auto& m : registry()) {
    if (m->name() == name) return *m;
  }
  throw LookupError("unknown app model '" + std::string(name) + "'");
}

bool has_app_model(std::string_view name) {
  for (const auto& m : registry()) {
    if (m->name() == name) return true;
  }
  return false;
}

std::vector<std::string> app_model_names() {
  std::vector<std::string> out;
  for (const auto& m : registry()) out.push_back(m->name());
  return out;
}

}  // namespace guirl
