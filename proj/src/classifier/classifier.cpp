#include "classifier/classifier.hpp"

#include <algorithm>
#include <unordered_map>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/text.hpp"
#include "genclient/prompts.hpp"
#include "store/fs.hpp"
#include "store/store.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vp {

namespace {

constexpr const char* kClassifierMeta = "classifier.json";

}  // namespace

std::string_view component_name(Component c) {
  switch (c) {
    case Component::kBase: return "base";
    case Component::kContext: return "context";
    case Component::kAttributes: return "attributes";
    case Component::kDescription: return "description";
  }
  return "base";
}

Component component_from_name(std::string_view name) {
  const std::string n = to_lower(trim(name));
  if (n == "base") return Component::kBase;
  if (n == "context") return Component::kContext;
  if (n == "attributes") return Component::kAttributes;
  if (n == "description") return Component::kDescription;
  throw Error(ErrorCode::kConfig, "unknown classifier component: " + std::string(name), "components");
}

ComponentSet parse_components(std::string_view csv) {
  ComponentSet out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string piece = trim(csv.substr(start, comma == std::string_view::npos ? csv.npos : comma - start));
    if (!piece.empty()) out.insert(component_from_name(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw Error(ErrorCode::kConfig, "no classifier components given", "components");
  return out;
}

std::vector<std::string> component_names(const ComponentSet& set) {
  std::vector<std::string> out;
  for (auto c : set) out.emplace_back(component_name(c));
  return out;
}

std::string base_prompt(const std::string& class_name) {
  if (trim(class_name).empty()) throw Error(ErrorCode::kInvalidInput, "InvalidClassName: empty class name");
  return render_prompt(TemplateId::kBasePrompt, {{"class-name", class_name}});
}

std::string context_prompt(const std::string& class_name, const std::string& parent) {
  return render_prompt(TemplateId::kContextPrompt, {{"class-name", class_name}, {"parent", parent}});
}

std::string join_attributes(const std::vector<std::string>& attributes) { return join(attributes, ", "); }

ClassTexts class_texts(const std::string& class_name, const DescriptorSet* descriptors,
                       const HierarchyMap* hierarchy, const ComponentSet& components) {
  if (components.empty()) throw Error(ErrorCode::kConfig, "no classifier components given", "components");
  ClassTexts out;
  auto add = [&out](std::string text, Component source) {
    out.texts.push_back(std::move(text));
    out.sources.push_back(source);
  };

  std::optional<std::string> parent;
  if (hierarchy) parent = hierarchy->parent_of(class_name);
  else if (descriptors) parent = descriptors->parent_context;
  const bool usable_parent = parent && !parent->empty() && *parent != kOtherParent;

  if (components.contains(Component::kContext) && usable_parent) {
    add(context_prompt(class_name, *parent), Component::kContext);
    out.context = *parent;
  } else if (components.contains(Component::kContext) || components.contains(Component::kBase)) {
    add(base_prompt(class_name), Component::kBase);
  }
  if (components.contains(Component::kAttributes) && descriptors && descriptors->attributes &&
      !descriptors->attributes->empty()) {
    add(join_attributes(*descriptors->attributes), Component::kAttributes);
  }
  if (components.contains(Component::kDescription) && descriptors && descriptors->description &&
      !descriptors->description->empty()) {
    add(*descriptors->description, Component::kDescription);
  }
  if (out.texts.empty()) {
    add(base_prompt(class_name), Component::kBase);
    out.fell_back = true;
  }
  return out;
}

ClassRepresentation build_class_representation(const std::string& class_name,
                                               const DescriptorSet* descriptors,
                                               const HierarchyMap* hierarchy,
                                               const ComponentSet& components,
                                               TextEmbedder& embedder) {
  ClassTexts texts = class_texts(class_name, descriptors, hierarchy, components);
  const Matrix m = embedder.embed(texts.texts);
  std::vector<Embedding> rows;
  rows.reserve(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(m.embedding(i));
  return {renorm_mean(rows), std::move(texts)};
}

ClassifierMatrix build_classifier(const std::vector<std::string>& classes,
                                  const std::map<std::string, DescriptorSet>& descriptors,
                                  const HierarchyMap* hierarchy, const ComponentSet& components,
                                  TextEmbedder& embedder, const BuildOptions& options) {
  if (classes.empty()) throw Error(ErrorCode::kInvalidInput, "classifier needs at least one class");
  ClassifierMatrix out;
  out.classes = make_class_list(classes);
  out.components = components;
  out.embedder_id = embedder.id();

  std::vector<ClassTexts> per_class;
  per_class.reserve(classes.size());
  std::vector<std::string> unique_texts;
  std::unordered_map<std::string, std::size_t> text_index;
  for (const auto& name : classes) {
    auto it = descriptors.find(name);
    per_class.push_back(class_texts(name, it == descriptors.end() ? nullptr : &it->second,
                                    hierarchy, components));
    for (const auto& t : per_class.back().texts) {
      if (text_index.emplace(t, unique_texts.size()).second) unique_texts.push_back(t);
    }
  }

  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  const std::size_t n_batches = (unique_texts.size() + batch - 1) / batch;
  std::vector<Matrix> batches(n_batches);
  const std::size_t workers = embedder.concurrent() ? options.workers : 1;
  parallel_for(n_batches, workers, [&](std::size_t b) {
    const std::size_t start = b * batch;
    const std::size_t len = std::min(batch, unique_texts.size() - start);
    batches[b] = embedder.embed(std::span(unique_texts).subspan(start, len));
  });
  const std::size_t dim = batches.front().cols();
  auto text_row = [&](std::size_t t) { return batches[t / batch].row(t % batch); };

  std::vector<Embedding> rows(classes.size());
  parallel_for(classes.size(), options.workers, [&](std::size_t c) {
    std::vector<Embedding> parts;
    for (const auto& t : per_class[c].texts) {
      auto r = text_row(text_index.at(t));
      parts.emplace_back(std::vector<float>(r.begin(), r.end()));
    }
    rows[c] = renorm_mean(parts);
  });

  out.rows = Matrix::from_rows(rows);
  if (out.rows.cols() != dim) throw Error(ErrorCode::kEmbedder, "embedder returned inconsistent dims");
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (per_class[c].fell_back) out.fallbacks.push_back(classes[c]);
    if (per_class[c].context) out.contexts.emplace(classes[c], *per_class[c].context);
  }
  return out;
}

Embedding build_caption_representation(const std::string& caption,
                                       const std::vector<std::string>& generated,
                                       TextEmbedder& embedder) {
  if (trim(caption).empty()) throw Error(ErrorCode::kInvalidInput, "empty caption");
  std::vector<std::string> texts{caption};
  texts.insert(texts.end(), generated.begin(), generated.end());
  const Matrix m = embedder.embed(texts);
  std::vector<Embedding> rows;
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(m.embedding(i));
  return renorm_mean(rows);
}

void write_classifier(const ClassifierMatrix& m, const fs::path& dir) {
  std::vector<std::string> ids;
  for (const auto& c : m.classes) ids.push_back(c.name);
  write_store(dir, ids, m.rows);
  const json meta{{"components", component_names(m.components)},
                  {"fallbacks", m.fallbacks},
                  {"contexts", m.contexts},
                  {"embedder", m.embedder_id}};
  write_file_atomic(dir / kClassifierMeta, meta.dump(2) + "\n");
}

ClassifierMatrix read_classifier(const fs::path& dir) {
  EmbeddingStore store = read_store(dir);
  ClassifierMatrix m;
  m.classes = make_class_list(store.ids());
  m.rows = store.matrix();
  const fs::path meta_path = dir / kClassifierMeta;
  if (fs::exists(meta_path)) {
    try {
      const json meta = json::parse(read_file(meta_path));
      for (const auto& c : meta.value("components", std::vector<std::string>{})) {
        m.components.insert(component_from_name(c));
      }
      m.fallbacks = meta.value("fallbacks", std::vector<std::string>{});
      m.contexts = meta.value("contexts", std::map<std::string, std::string>{});
      m.embedder_id = meta.value("embedder", std::string());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchema, "bad classifier.json: " + std::string(e.what()), "classifier.json");
    }
  }
  return m;
}

}  // namespace vp
