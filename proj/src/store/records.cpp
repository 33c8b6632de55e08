#include "store/records.hpp"

#include <fstream>

#include "core/errors.hpp"
#include "core/text.hpp"
#include "store/fs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vp {

namespace {

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, where + ": invalid JSON: " + e.what());
  }
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kSchema, path + ": " + what, path);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing field");
  return *it;
}

std::string get_string(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) schema_error(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> get_string_list(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected a list of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) schema_error(path + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::strict); }

}  // namespace

json descriptors_to_json(const DescriptorDocument& doc) {
  json classes = json::object();
  for (const auto& [name, set] : doc.classes) {
    json c = json::object();
    c["attributes"] = set.attributes ? json(*set.attributes) : json(nullptr);
    c["description"] = set.description ? json(*set.description) : json(nullptr);
    c["parent"] = set.parent_context ? json(*set.parent_context) : json(nullptr);
    classes[name] = std::move(c);
  }
  return json{{"model", doc.model},
              {"temperature", doc.temperature},
              {"backend", doc.backend},
              {"template_version", doc.template_version},
              {"classes", std::move(classes)}};
}

DescriptorDocument descriptors_from_json(const json& j) {
  if (!j.is_object()) schema_error(".", "expected an object");
  DescriptorDocument doc;
  doc.model = get_string(j, "model", "");
  const json& t = require(j, "temperature", "");
  if (!t.is_number()) schema_error(".temperature", "expected a number");
  doc.temperature = t.get<double>();
  if (auto it = j.find("backend"); it != j.end()) {
    if (!it->is_string()) schema_error(".backend", "expected a string");
    doc.backend = it->get<std::string>();
  }
  if (auto it = j.find("template_version"); it != j.end()) {
    if (!it->is_number_integer()) schema_error(".template_version", "expected an integer");
    doc.template_version = it->get<int>();
  }
  const json& classes = require(j, "classes", "");
  if (!classes.is_object()) schema_error(".classes", "expected an object");
  for (const auto& [name, c] : classes.items()) {
    const std::string path = ".classes." + name;
    if (!c.is_object()) schema_error(path, "expected an object");
    DescriptorSet set;
    set.class_name = name;
    set.provenance = {doc.backend, doc.model, doc.temperature, doc.template_version};
    if (auto it = c.find("attributes"); it != c.end() && !it->is_null()) {
      auto attrs = get_string_list(*it, path + ".attributes");
      for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (attrs[i].empty() || trim(attrs[i]) != attrs[i]) {
          schema_error(path + ".attributes[" + std::to_string(i) + "]",
                       "attributes must be nonempty trimmed strings");
        }
      }
      set.attributes = std::move(attrs);
    }
    if (auto it = c.find("description"); it != c.end() && !it->is_null()) {
      if (!it->is_string()) schema_error(path + ".description", "expected a string");
      if (it->get<std::string>().empty()) schema_error(path + ".description", "empty description");
      set.description = it->get<std::string>();
    }
    if (auto it = c.find("parent"); it != c.end() && !it->is_null()) {
      if (!it->is_string()) schema_error(path + ".parent", "expected a string");
      set.parent_context = it->get<std::string>();
    }
    doc.classes.emplace(name, std::move(set));
  }
  return doc;
}

DescriptorDocument read_descriptors(const fs::path& path) {
  return descriptors_from_json(parse_json(read_file(path), path.string()));
}

void write_descriptors(const DescriptorDocument& doc, const fs::path& path) {
  write_file_atomic(path, descriptors_to_json(doc).dump(2) + "\n");
}

json hierarchy_to_json(const HierarchyMap& h) {
  json parents = json::object();
  for (const auto& [parent, members] : h.parents) parents[parent] = members;
  return json{{"parents", std::move(parents)}};
}

HierarchyMap hierarchy_from_json(const json& j) {
  const json& parents = require(j, "parents", "");
  if (!parents.is_object()) schema_error(".parents", "expected an object");
  HierarchyMap h;
  for (const auto& [parent, members] : parents.items()) {
    h.parents[parent] = get_string_list(members, ".parents." + parent);
  }
  return h;
}

HierarchyMap read_hierarchy_json(const fs::path& path) {
  return hierarchy_from_json(parse_json(read_file(path), path.string()));
}

void write_hierarchy_json(const HierarchyMap& h, const fs::path& path) {
  write_file_atomic(path, hierarchy_to_json(h).dump(2) + "\n");
}

std::vector<json> read_jsonl(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<json> rows;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    rows.push_back(parse_json(line, path.string() + ":" + std::to_string(line_no)));
  }
  return rows;
}

void write_jsonl(const std::vector<json>& rows, const fs::path& path) {
  std::string out;
  for (const auto& r : rows) {
    out += dump_line(r);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<VideoDescriptions> read_video_descriptions(const fs::path& path) {
  std::vector<VideoDescriptions> out;
  const auto rows = read_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string p = "[" + std::to_string(i) + "]";
    out.push_back({get_string(rows[i], "video_id", p),
                   get_string_list(require(rows[i], "descriptions", p), p + ".descriptions")});
  }
  return out;
}

void write_video_descriptions(const std::vector<VideoDescriptions>& rows, const fs::path& path) {
  std::vector<json> out;
  for (const auto& r : rows) out.push_back({{"video_id", r.video_id}, {"descriptions", r.descriptions}});
  write_jsonl(out, path);
}

std::vector<CaptionRecord> read_captions(const fs::path& path) {
  std::vector<CaptionRecord> out;
  const auto rows = read_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string p = "[" + std::to_string(i) + "]";
    CaptionRecord r{get_string(rows[i], "id", p), get_string(rows[i], "caption", p), {}};
    if (auto it = rows[i].find("generated"); it != rows[i].end() && !it->is_null()) {
      r.generated = get_string_list(*it, p + ".generated");
    }
    if (auto it = rows[i].find("padded"); it != rows[i].end() && it->is_boolean()) r.padded = it->get<bool>();
    out.push_back(std::move(r));
  }
  return out;
}

void write_captions(const std::vector<CaptionRecord>& rows, const fs::path& path) {
  std::vector<json> out;
  for (const auto& r : rows) {
    out.push_back({{"id", r.id}, {"caption", r.caption}, {"generated", r.generated}, {"padded", r.padded}});
  }
  write_jsonl(out, path);
}

std::vector<LabelRecord> read_labels(const fs::path& path) {
  std::vector<LabelRecord> out;
  const auto rows = read_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string p = "[" + std::to_string(i) + "]";
    out.push_back({get_string(rows[i], "video_id", p), get_string(rows[i], "label", p)});
  }
  return out;
}

std::vector<PredictionRecord> read_predictions(const fs::path& path) {
  std::vector<PredictionRecord> out;
  const auto rows = read_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string p = "[" + std::to_string(i) + "]";
    PredictionRecord r;
    r.video_id = get_string(rows[i], "video_id", p);
    r.predicted = get_string(rows[i], "predicted", p);
    const json& s = require(rows[i], "score", p);
    if (!s.is_number()) schema_error(p + ".score", "expected a number");
    r.score = s.get<double>();
    if (auto it = rows[i].find("label"); it != rows[i].end() && it->is_string()) {
      r.label = it->get<std::string>();
    }
    if (auto it = rows[i].find("ranked"); it != rows[i].end() && it->is_array()) {
      for (const auto& e : *it) r.ranked.emplace_back(e.at(0).get<std::string>(), e.at(1).get<double>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_predictions(const std::vector<PredictionRecord>& rows, const fs::path& path) {
  std::vector<json> out;
  for (const auto& r : rows) {
    json j{{"video_id", r.video_id}, {"predicted", r.predicted}, {"score", r.score}};
    if (r.label) j["label"] = *r.label;
    if (!r.ranked.empty()) {
      json ranked = json::array();
      for (const auto& [c, s] : r.ranked) ranked.push_back(json::array({c, s}));
      j["ranked"] = std::move(ranked);
    }
    out.push_back(std::move(j));
  }
  write_jsonl(out, path);
}

std::vector<FusionRecord> read_fusion_records(const fs::path& path) {
  std::vector<FusionRecord> out;
  const auto rows = read_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string p = "[" + std::to_string(i) + "]";
    FusionRecord r;
    r.video_id = get_string(rows[i], "video_id", p);
    r.beta2_used = require(rows[i], "beta2_used", p).get<double>();
    r.descriptions_kept = require(rows[i], "descriptions_kept", p).get<std::vector<std::size_t>>();
    out.push_back(std::move(r));
  }
  return out;
}

void write_fusion_records(const std::vector<FusionRecord>& rows, const fs::path& path) {
  std::vector<json> out;
  for (const auto& r : rows) {
    out.push_back({{"video_id", r.video_id},
                   {"beta2_used", r.beta2_used},
                   {"descriptions_kept", r.descriptions_kept}});
  }
  write_jsonl(out, path);
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> out;
  for (const auto& line : split_lines(read_file(path))) {
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace vp
