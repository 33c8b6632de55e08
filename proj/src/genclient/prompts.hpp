#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vp {

enum class TemplateId {
  kAttributes,
  kDescription,
  kHierarchy,
  kCaptionAugment,
  kVideoDescription,
  kBasePrompt,
  kContextPrompt,
};

struct PromptTemplate {
  TemplateId id;
  std::string_view text;
  int version;
};

using Bindings = std::map<std::string, std::string>;

const PromptTemplate& prompt_template(TemplateId id);
std::string_view template_name(TemplateId id);
// Throws kInvalidInput for an unknown name.
TemplateId template_from_name(std::string_view name);
const std::vector<TemplateId>& all_templates();

// Placeholder names ({class-name}, ...) appearing in the template, in order.
std::vector<std::string> placeholders(std::string_view text);

// Substitutes every {placeholder}. Extra bindings are ignored; a placeholder
// without a binding throws kUnboundPlaceholder.
std::string render(std::string_view text, const Bindings& bindings);
std::string render_prompt(TemplateId id, const Bindings& bindings);

}  // namespace vp
