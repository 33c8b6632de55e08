#include "genclient/generate.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "core/errors.hpp"
#include "core/text.hpp"

namespace vp {

namespace {

std::string clean_phrase(std::string_view raw) {
  std::string s = strip_list_marker(raw);
  while (!s.empty() && (s.back() == '.' || s.back() == ';')) s.pop_back();
  return trim(s);
}

bool is_other_parent(std::string_view parent) {
  const std::string k = match_key(parent);
  return k == "other" || k == "others";
}

// Assigns (parent, child) pairs to dataset classes.
class HierarchyBuilder {
 public:
  explicit HierarchyBuilder(const std::vector<std::string>& classes) : classes_(classes) {
    for (const auto& c : classes) by_key_.emplace(match_key(c), c);
    map_.parents[kOtherParent];
  }

  void add_parent(const std::string& parent) {
    if (is_other_parent(parent)) return;
    map_.parents[parent];
  }

  void assign(const std::string& raw_parent, const std::string& raw_child) {
    const std::string parent = is_other_parent(raw_parent) ? kOtherParent : raw_parent;
    auto it = by_key_.find(match_key(raw_child));
    if (it == by_key_.end()) {
      unmatched_.push_back(raw_child);
      return;
    }
    const std::string& cls = it->second;
    if (auto prev = assigned_.find(cls); prev != assigned_.end()) {
      throw Error(ErrorCode::kDuplicateAssignment,
                  "class '" + cls + "' assigned to both '" + prev->second + "' and '" + parent + "'",
                  cls);
    }
    assigned_.emplace(cls, parent);
    map_.parents[parent].push_back(cls);
  }

  HierarchyMap finish(HierarchyDiagnostics* diagnostics) {
    std::vector<std::string> defaulted;
    for (const auto& c : classes_) {
      if (!assigned_.contains(c)) {
        map_.parents[kOtherParent].push_back(c);
        defaulted.push_back(c);
      }
    }
    // Parents that ended up with no dataset class carry no information.
    std::erase_if(map_.parents, [](const auto& kv) {
      return kv.second.empty() && kv.first != kOtherParent;
    });
    if (diagnostics) {
      diagnostics->unmatched = std::move(unmatched_);
      diagnostics->defaulted = std::move(defaulted);
    }
    return std::move(map_);
  }

 private:
  const std::vector<std::string>& classes_;
  std::unordered_map<std::string, std::string> by_key_;
  std::unordered_map<std::string, std::string> assigned_;
  std::vector<std::string> unmatched_;
  HierarchyMap map_;
};

}  // namespace

std::vector<std::string> parse_attributes(std::string_view response) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& line : split_lines(response)) {
    const std::string t = trim(line);
    if (t.empty() || t.back() == ':') continue;
    std::size_t start = 0;
    while (start <= t.size()) {
      const std::size_t comma = t.find(',', start);
      const std::string piece =
          clean_phrase(std::string_view(t).substr(start, comma == std::string::npos ? t.npos : comma - start));
      if (!piece.empty() && seen.insert(piece).second) out.push_back(piece);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

DescriptorSet generate_descriptor_set(const std::string& class_name, GenClient& client,
                                      const HierarchyMap* hierarchy) {
  if (trim(class_name).empty()) throw Error(ErrorCode::kInvalidInput, "empty class name");
  DescriptorSet set;
  set.class_name = class_name;
  set.provenance = {std::string(backend_kind_name(client.backend().kind())),
                    client.backend().model_name(), client.config().temperature,
                    prompt_template(TemplateId::kAttributes).version};
  const Bindings bindings{{"class-name", class_name}};

  try {
    auto attrs = parse_attributes(client.complete(TemplateId::kAttributes, bindings));
    if (!attrs.empty()) set.attributes = std::move(attrs);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyResponse) throw;
  }
  try {
    set.description = client.complete(TemplateId::kDescription, bindings);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyResponse) throw;
  }
  if (hierarchy) {
    if (auto parent = hierarchy->parent_of(class_name); parent && *parent != kOtherParent) {
      set.parent_context = *parent;
    }
  }
  return set;
}

std::string generate_hierarchy(const std::vector<std::string>& classes, GenClient& client) {
  if (classes.empty()) throw Error(ErrorCode::kInvalidInput, "hierarchy needs at least one class");
  return client.complete(TemplateId::kHierarchy, {{"class-names", join(classes, ", ")}});
}

HierarchyMap parse_hierarchy(std::string_view response, const std::vector<std::string>& classes,
                             HierarchyDiagnostics* diagnostics) {
  HierarchyBuilder builder(classes);
  for (const auto& line : split_lines(response)) {
    const std::string t = trim(line);
    const std::size_t colon = t.find(':');
    if (t.empty() || colon == std::string::npos) continue;
    std::string parent = clean_phrase(std::string_view(t).substr(0, colon));
    if (parent.empty()) continue;
    builder.add_parent(parent);
    const std::string body = t.substr(colon + 1);
    std::size_t start = 0;
    while (start <= body.size()) {
      const std::size_t comma = body.find(',', start);
      const std::string child = clean_phrase(
          std::string_view(body).substr(start, comma == std::string::npos ? body.npos : comma - start));
      if (!child.empty()) builder.assign(parent, child);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return builder.finish(diagnostics);
}

HierarchyMap normalize_hierarchy(const HierarchyMap& raw, const std::vector<std::string>& classes,
                                 HierarchyDiagnostics* diagnostics) {
  HierarchyBuilder builder(classes);
  for (const auto& [parent, members] : raw.parents) {
    builder.add_parent(parent);
    for (const auto& m : members) builder.assign(parent, m);
  }
  return builder.finish(diagnostics);
}

void check_hierarchy(const HierarchyMap& h, const std::vector<std::string>& classes) {
  if (!h.parents.contains(kOtherParent)) {
    throw Error(ErrorCode::kSchema, "hierarchy has no 'other' parent", ".parents.other");
  }
  std::unordered_map<std::string, int> count;
  for (const auto& [parent, members] : h.parents) {
    for (const auto& m : members) ++count[m];
  }
  for (const auto& c : classes) {
    auto it = count.find(c);
    if (it == count.end() || it->second != 1) {
      throw Error(ErrorCode::kSchema,
                  "class '" + c + "' appears " + std::to_string(it == count.end() ? 0 : it->second) +
                      " times in the hierarchy",
                  ".parents");
    }
  }
}

AugmentedCaption augment_caption(const std::string& caption, GenClient& client, int n) {
  if (trim(caption).empty()) throw Error(ErrorCode::kInvalidInput, "empty caption");
  if (n < 0) throw Error(ErrorCode::kInvalidInput, "negative caption count");
  AugmentedCaption out;
  std::set<std::string> seen;
  const int max_draws = n + std::max(0, client.config().max_retries);
  for (int sample = 0; sample < max_draws && static_cast<int>(out.captions.size()) < n; ++sample) {
    std::string text;
    for (const auto& line : split_lines(client.complete(TemplateId::kCaptionAugment,
                                                        {{"input caption", caption}}, sample))) {
      text = clean_phrase(line);
      if (!text.empty()) break;
    }
    if (!text.empty() && seen.insert(text).second) out.captions.push_back(std::move(text));
  }
  if (static_cast<int>(out.captions.size()) < n) {
    out.padded = true;
    const std::string fill = out.captions.empty() ? caption : out.captions.back();
    out.captions.resize(static_cast<std::size_t>(n), fill);
  }
  return out;
}

std::vector<std::string> generate_video_descriptions(const std::string& video_id, GenClient& client,
                                                     int n, double temperature) {
  if (video_id.empty()) throw Error(ErrorCode::kInvalidInput, "empty video id");
  if (n < 1) throw Error(ErrorCode::kInvalidInput, "description count must be >= 1");
  if (!client.backend().accepts_video()) {
    throw Error(ErrorCode::kConfig,
                "video descriptions need a fixture_file, mock, or multimodal chat_http backend",
                "video_llm.kind");
  }
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(client.complete(TemplateId::kVideoDescription, {{kVideoIdBinding, video_id}}, i,
                                  temperature));
  }
  return out;
}

}  // namespace vp
