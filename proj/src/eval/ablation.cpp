#include "eval/ablation.hpp"

#include <sstream>

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/text.hpp"
#include "eval/eval.hpp"
#include "fusion/fusion.hpp"

using nlohmann::json;

namespace vp {

namespace {

std::string components_label(const ComponentSet& set) { return join(component_names(set), "+"); }

template <typename T>
std::vector<T> axis_or(const std::optional<std::vector<T>>& axis, T fallback) {
  if (!axis) return {fallback};
  if (axis->empty()) throw Error(ErrorCode::kEmptyGrid, "ablation axis has no values");
  return *axis;
}

template <typename T>
std::vector<T> parse_axis(const json& axes, const char* key) {
  const json& v = axes.at(key);
  if (!v.is_array()) throw Error(ErrorCode::kConfig, "ablation axis must be an array", std::string("axes.") + key);
  return v.get<std::vector<T>>();
}

}  // namespace

std::string_view aggregate_name(DescriptionAggregate a) {
  return a == DescriptionAggregate::kMean ? "mean" : "per_description";
}

DescriptionAggregate aggregate_from_name(std::string_view name) {
  if (name == "mean") return DescriptionAggregate::kMean;
  if (name == "per_description") return DescriptionAggregate::kPerDescription;
  throw Error(ErrorCode::kConfig, "unknown description aggregate: " + std::string(name), "aggregate");
}

void apply_beta2_setting(const std::string& setting, FusionConfig& config) {
  if (setting == "cosine") {
    config.beta2_mode = Beta2Mode::kCosine;
    config.clamp_negative = true;
  } else if (setting == "cosine-raw") {
    config.beta2_mode = Beta2Mode::kCosine;
    config.clamp_negative = false;
  } else if (setting.starts_with("fixed:")) {
    config.beta2_mode = Beta2Mode::kFixed;
    try {
      std::size_t used = 0;
      config.fixed_beta2 = std::stod(setting.substr(6), &used);
      if (used != setting.size() - 6) throw std::invalid_argument(setting);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, "bad fixed beta2 setting: " + setting, "beta2");
    }
  } else {
    throw Error(ErrorCode::kConfig, "unknown beta2 setting: " + setting, "beta2");
  }
}

AblationAxes ablation_axes_from_json(const json& axes) {
  if (!axes.is_object()) throw Error(ErrorCode::kConfig, "ablation axes must be an object", "axes");
  AblationAxes out;
  try {
    for (const auto& [key, value] : axes.items()) {
      if (key == "components") {
        std::vector<ComponentSet> sets;
        for (const auto& v : parse_axis<json>(axes, "components")) {
          if (v.is_string()) sets.push_back(parse_components(v.get<std::string>()));
          else sets.push_back(parse_components(join(v.get<std::vector<std::string>>(), ",")));
        }
        out.components = std::move(sets);
      } else if (key == "filtering") {
        out.filtering = parse_axis<bool>(axes, "filtering");
      } else if (key == "filter_k") {
        out.filter_k = parse_axis<std::size_t>(axes, "filter_k");
      } else if (key == "beta2") {
        out.beta2 = parse_axis<std::string>(axes, "beta2");
      } else if (key == "descriptions") {
        out.descriptions = parse_axis<std::string>(axes, "descriptions");
      } else if (key == "aggregate") {
        std::vector<DescriptionAggregate> a;
        for (const auto& s : parse_axis<std::string>(axes, "aggregate")) a.push_back(aggregate_from_name(s));
        out.aggregate = std::move(a);
      } else {
        throw Error(ErrorCode::kConfig, "unknown ablation axis: " + key, "axes." + key);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "bad ablation axes: " + std::string(e.what()), "axes");
  }
  return out;
}

std::vector<std::string> ablation_axis_names() {
  return {"components", "filtering", "filter_k", "beta2", "descriptions", "aggregate"};
}

std::vector<AblationCell> run_ablation(const AblationAxes& axes, const AblationDataset& dataset,
                                       TextEmbedder& embedder, const FusionConfig& base,
                                       const ComponentSet& base_components,
                                       const std::string& base_descriptions, std::size_t workers) {
  if (!axes.components && !axes.filtering && !axes.filter_k && !axes.beta2 && !axes.descriptions &&
      !axes.aggregate) {
    throw Error(ErrorCode::kEmptyGrid, "ablation grid has no axes");
  }
  const auto components = axis_or(axes.components, base_components);
  const auto filtering = axis_or(axes.filtering, base.filtering_enabled);
  const auto filter_k = axis_or(axes.filter_k, base.filter_k);
  const std::string base_beta2 =
      base.beta2_mode == Beta2Mode::kFixed ? "fixed:" + std::to_string(base.fixed_beta2)
                                           : (base.clamp_negative ? "cosine" : "cosine-raw");
  const auto beta2s = axis_or(axes.beta2, base_beta2);
  const auto sources = axis_or(axes.descriptions, base_descriptions);
  const auto aggregates = axis_or(axes.aggregate, base.aggregate);

  // Classifiers depend only on the component axis.
  std::vector<std::optional<ClassifierMatrix>> classifiers(components.size());
  std::vector<std::string> classifier_errors(components.size());
  for (std::size_t i = 0; i < components.size(); ++i) {
    try {
      classifiers[i] = build_classifier(dataset.classes, dataset.descriptors,
                                        dataset.hierarchy ? &*dataset.hierarchy : nullptr, components[i],
                                        embedder, {64, workers});
    } catch (const std::exception& e) {
      classifier_errors[i] = e.what();
    }
  }

  std::vector<AblationCell> cells;
  for (std::size_t ci = 0; ci < components.size(); ++ci)
    for (bool filt : filtering)
      for (std::size_t k : filter_k)
        for (const auto& b2 : beta2s)
          for (const auto& src : sources)
            for (auto agg : aggregates) {
              AblationCell cell;
              cell.point = {{"components", components_label(components[ci])},
                            {"filtering", filt ? "on" : "off"},
                            {"filter_k", std::to_string(k)},
                            {"beta2", b2},
                            {"descriptions", src},
                            {"aggregate", std::string(aggregate_name(agg))}};
              try {
                if (!classifiers[ci]) throw Error(ErrorCode::kEmbedder, classifier_errors[ci]);
                FusionConfig cfg = base;
                cfg.filtering_enabled = filt;
                cfg.filter_k = k;
                cfg.aggregate = agg;
                apply_beta2_setting(b2, cfg);
                cfg.validate();
                const std::map<std::string, std::vector<Embedding>>* descs = nullptr;
                if (src != "none") {
                  auto it = dataset.description_sources.find(src);
                  if (it == dataset.description_sources.end()) {
                    throw Error(ErrorCode::kConfig, "unknown description source: " + src, "descriptions");
                  }
                  descs = &it->second;
                }
                std::vector<EnhancedVisual> fused(dataset.videos.size());
                parallel_for(dataset.videos.size(), workers, [&](std::size_t i) {
                  const std::string& id = dataset.videos.ids()[i];
                  std::span<const Embedding> d;
                  if (descs) {
                    if (auto it = descs->find(id); it != descs->end()) d = it->second;
                  }
                  fused[i] = fuse_video(id, dataset.videos.embedding(i), d, cfg);
                });
                const auto preds = classify_all(fused, *classifiers[ci], 0, workers);
                cell.top1_accuracy = top1_accuracy(preds, dataset.labels);
              } catch (const std::exception& e) {
                cell.error = e.what();
                if (cell.error.empty()) cell.error = "failed";
              }
              cells.push_back(std::move(cell));
            }
  return cells;
}

std::string ablation_csv(const std::vector<AblationCell>& cells) {
  std::ostringstream os;
  const auto names = ablation_axis_names();
  for (const auto& n : names) os << csv_field(n) << ',';
  os << "top1_accuracy,status,error\r\n";
  for (const auto& c : cells) {
    for (const auto& n : names) os << csv_field(c.point.at(n)) << ',';
    if (c.top1_accuracy) {
      std::ostringstream v;
      v.precision(17);
      v << *c.top1_accuracy;
      os << v.str();
    }
    os << ',' << (c.failed() ? "failed" : "ok") << ',' << csv_field(c.error) << "\r\n";
  }
  return os.str();
}

json ablation_json(const std::vector<AblationCell>& cells) {
  json rows = json::array();
  for (const auto& c : cells) {
    json row{{"point", c.point}, {"status", c.failed() ? "failed" : "ok"}};
    row["top1_accuracy"] = c.top1_accuracy ? json(*c.top1_accuracy) : json(nullptr);
    if (c.failed()) row["error"] = c.error;
    rows.push_back(std::move(row));
  }
  return {{"axes", ablation_axis_names()}, {"cells", rows}};
}

}  // namespace vp
