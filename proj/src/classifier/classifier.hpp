#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "classifier/embedder.hpp"
#include "core/types.hpp"

namespace vp {

enum class Component { kBase, kContext, kAttributes, kDescription };
using ComponentSet = std::set<Component>;

std::string_view component_name(Component c);
Component component_from_name(std::string_view name);
// "base,attributes,description" -> set. Throws kConfig on unknown names or
// an empty list.
ComponentSet parse_components(std::string_view csv);
std::vector<std::string> component_names(const ComponentSet& set);

// "a photo of a {class}". Throws kInvalidInput on an empty name.
std::string base_prompt(const std::string& class_name);
// "a photo of a {parent} i.e., {class}".
std::string context_prompt(const std::string& class_name, const std::string& parent);

// Attribute list as one comma-separated text.
std::string join_attributes(const std::vector<std::string>& attributes);

// The texts whose embeddings are averaged into one class row.
struct ClassTexts {
  std::vector<std::string> texts;
  std::vector<Component> sources;       // parallel to texts
  std::optional<std::string> context;   // parent used by the context prompt
  bool fell_back = false;               // every requested component was unavailable
};

// Base prompt, context prompt (replacing the base prompt when the parent is
// known and not "other"), the comma-joined attribute list, and the
// description. Unavailable descriptors drop their component; when nothing
// is left the base prompt is used and `fell_back` is set. The parent comes
// from `hierarchy` when given, else from the descriptor set.
ClassTexts class_texts(const std::string& class_name, const DescriptorSet* descriptors,
                       const HierarchyMap* hierarchy, const ComponentSet& components);

struct ClassRepresentation {
  Embedding vector;
  ClassTexts texts;
};

ClassRepresentation build_class_representation(const std::string& class_name,
                                               const DescriptorSet* descriptors,
                                               const HierarchyMap* hierarchy,
                                               const ComponentSet& components,
                                               TextEmbedder& embedder);

// Enriched class rows, aligned with `classes` by index.
struct ClassifierMatrix {
  std::vector<ClassEntry> classes;
  Matrix rows;
  ComponentSet components;
  std::vector<std::string> fallbacks;          // classes that fell back to the base prompt
  std::map<std::string, std::string> contexts; // class -> parent used
  std::string embedder_id;

  std::size_t size() const noexcept { return classes.size(); }
  std::size_t dim() const noexcept { return rows.cols(); }
};

struct BuildOptions {
  std::size_t batch_size = 64;
  std::size_t workers = 1;
};

// Throws kInvalidInput on an empty class list, kConfig on empty components,
// kEmbedder on embedder failure.
ClassifierMatrix build_classifier(const std::vector<std::string>& classes,
                                  const std::map<std::string, DescriptorSet>& descriptors,
                                  const HierarchyMap* hierarchy, const ComponentSet& components,
                                  TextEmbedder& embedder, const BuildOptions& options = {});

// renorm_mean over the caption and its generated paraphrases.
Embedding build_caption_representation(const std::string& caption,
                                       const std::vector<std::string>& generated,
                                       TextEmbedder& embedder);

// A classifier directory is an embedding store (ids = class names) plus
// classifier.json with components, fallbacks, contexts and embedder id.
void write_classifier(const ClassifierMatrix& m, const std::filesystem::path& dir);
ClassifierMatrix read_classifier(const std::filesystem::path& dir);

}  // namespace vp
