#include "genclient/prompts.hpp"

#include <array>

#include "core/errors.hpp"

namespace vp {

namespace {

constexpr std::array<PromptTemplate, 7> kTemplates{{
    {TemplateId::kAttributes,
     "What are the distinct visual characteristics to identify a {class-name} video action?", 1},
    {TemplateId::kDescription, "How {class-name} action is performed visually?", 1},
    {TemplateId::kHierarchy,
     "Divide the list of {class-names} into parent and child classes. Such that actions that are "
     "visually similar to each other are in the same group. If the action is not similar to any "
     "other action in the list, assign it to others.",
     1},
    {TemplateId::kCaptionAugment,
     "Given a caption: {input caption}, generate a visually similar captions.", 1},
    {TemplateId::kVideoDescription, "describe the activity in the video", 1},
    {TemplateId::kBasePrompt, "a photo of a {class-name}", 1},
    {TemplateId::kContextPrompt, "a photo of a {parent} i.e., {class-name}", 1},
}};

constexpr std::array<std::string_view, 7> kNames{
    "attributes", "description", "hierarchy", "caption_augment",
    "video_desc", "base_prompt", "context_prompt"};

}  // namespace

const PromptTemplate& prompt_template(TemplateId id) {
  return kTemplates[static_cast<std::size_t>(id)];
}

std::string_view template_name(TemplateId id) { return kNames[static_cast<std::size_t>(id)]; }

TemplateId template_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<TemplateId>(i);
  }
  throw Error(ErrorCode::kInvalidInput, "unknown template: " + std::string(name));
}

const std::vector<TemplateId>& all_templates() {
  static const std::vector<TemplateId> ids = [] {
    std::vector<TemplateId> v;
    for (const auto& t : kTemplates) v.push_back(t.id);
    return v;
  }();
  return ids;
}

std::vector<std::string> placeholders(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    const std::size_t close = text.find('}', pos);
    if (close == std::string_view::npos) break;
    out.emplace_back(text.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return out;
}

std::string render(std::string_view text, const Bindings& bindings) {
  std::string out;
  out.reserve(text.size() + 32);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    const std::size_t close = text.find('}', open);
    if (close == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const std::string name(text.substr(open + 1, close - open - 1));
    auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw Error(ErrorCode::kUnboundPlaceholder, "unbound placeholder {" + name + "}", name);
    }
    out.append(it->second);
    pos = close + 1;
  }
  return out;
}

std::string render_prompt(TemplateId id, const Bindings& bindings) {
  return render(prompt_template(id).text, bindings);
}

}  // namespace vp
