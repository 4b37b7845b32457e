#pragma once

#include "guirl/app_model.hpp"
#include "guirl/event_bus.hpp"
#include "guirl/util.hpp"

namespace guirl::apps {

inline Action click_on(std::string id) {
  Action a;
  a.target = Target{std::move(id)};
  return a;
}

// Desktop editor with a File menu, a PDF export dialog and a crashing EPUB exporter.
class TextEditor final : public WidgetApp {
 public:
  TextEditor();
  std::string name() const override { return "text_editor"; }
  UiTree initial_state(std::uint64_t seed) const override;

 protected:
  bool on_activate(AppContext& cx, const std::string& id, const Action& action) const override;
  bool on_key(AppContext& cx, const std::string& key) const override;
};

// Desktop file manager: folder rows, context menu, rename, guarded delete.
class FileManager final : public WidgetApp {
 public:
  FileManager();
  std::string name() const override { return "file_manager"; }
  UiTree initial_state(std::uint64_t seed) const override;

 protected:
  bool on_activate(AppContext& cx, const std::string& id, const Action& action) const override;
  bool on_key(AppContext& cx, const std::string& key) const override;
  bool on_drag(AppContext& cx, const std::string& source, const std::string& dest) const override;
};

// Web registration form inside a scrolling page.
class WebForm final : public WidgetApp {
 public:
  WebForm();
  std::string name() const override { return "web_form"; }
  UiTree initial_state(std::uint64_t seed) const override;

 protected:
  bool on_activate(AppContext& cx, const std::string& id, const Action& action) const override;
  bool on_key(AppContext& cx, const std::string& key) const override;
};

// Phone settings with a network page of toggles.
class MobileSettings final : public WidgetApp {
 public:
  MobileSettings();
  std::string name() const override { return "mobile_settings"; }
  UiTree initial_state(std::uint64_t seed) const override;

 protected:
  bool on_activate(AppContext& cx, const std::string& id, const Action& action) const override;
  bool on_key(AppContext& cx, const std::string& key) const override;
};

// Phone messaging app: conversation list, thread view, compose box.
class Messaging final : public WidgetApp {
 public:
  Messaging();
  std::string name() const override { return "messaging"; }
  UiTree initial_state(std::uint64_t seed) const override;

 protected:
  bool on_activate(AppContext& cx, const std::string& id, const Action& action) const override;
  bool on_key(AppContext& cx, const std::string& key) const override;
};

}  // namespace guirl::apps
