#include "pipeline/commands.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <set>
#include <unordered_map>

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "eval/ablation.hpp"
#include "eval/eval.hpp"
#include "explain/explain.hpp"
#include "fusion/fusion.hpp"
#include "genclient/client.hpp"
#include "genclient/generate.hpp"
#include "genclient/prompts.hpp"
#include "store/fs.hpp"
#include "store/records.hpp"
#include "store/store.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace vp {

namespace {

constexpr const char* kEngineVersion = "1.0.0";

// Per-run state shared by the command implementations.
class RunContext {
 public:
  explicit RunContext(const RunConfig& config) : config_(config) {}

  const RunConfig& config() const { return config_; }
  const fs::path& out() const { return config_.out; }

  GenClient& text_client() { return client(text_, config_.text_llm, "text_llm"); }
  GenClient& video_client() { return client(video_, config_.video_llm, "video_llm"); }

  TextEmbedder& embedder() {
    if (!embedder_) embedder_ = make_embedder(config_.embedder);
    return *embedder_;
  }

  // A required input: the configured path, else `fallback` under the output
  // directory. Throws kConfig naming the role when neither exists.
  fs::path require(const std::string& role, const char* fallback = nullptr) const {
    if (auto p = optional(role, fallback)) return *p;
    const auto given = config_.path(role);
    throw Error(ErrorCode::kConfig,
                given ? "input not found for --" + role + ": " + given->string()
                      : "missing required input --" + role,
                role);
  }

  std::optional<fs::path> optional(const std::string& role, const char* fallback = nullptr) const {
    if (auto p = config_.path(role)) {
      if (!fs::exists(*p)) {
        throw Error(ErrorCode::kConfig, "input not found for --" + role + ": " + p->string(), role);
      }
      return *p;
    }
    if (fallback && fs::exists(out() / fallback)) return out() / fallback;
    return std::nullopt;
  }

  std::string arg(const std::string& key) const {
    auto it = config_.args.find(key);
    if (it == config_.args.end() || it->second.empty()) {
      throw Error(ErrorCode::kConfig, "missing required argument --" + key, key);
    }
    return it->second;
  }

  void artifact(const fs::path& p) { artifacts_.push_back(p.string()); }
  json artifacts() const { return artifacts_; }

  json stats() const {
    std::size_t calls = 0, hits = 0;
    for (const auto* c : {text_.get(), video_.get()}) {
      if (c) {
        calls += c->backend_calls();
        hits += c->cache_hits();
      }
    }
    return {{"backend_calls", calls},
            {"cache_hits", hits},
            {"cache_misses", cache_ ? cache_->misses() : 0}};
  }

 private:
  GenClient& client(std::unique_ptr<GenClient>& slot, const BackendConfig& cfg, const char* field) {
    if (!slot) {
      cfg.validate(field);
      if (!cache_) cache_ = std::make_shared<DiskCache>(config_.cache_path());
      slot = std::make_unique<GenClient>(make_backend(cfg), cfg, cache_);
    }
    return *slot;
  }

  const RunConfig& config_;
  std::shared_ptr<DiskCache> cache_;
  std::unique_ptr<GenClient> text_;
  std::unique_ptr<GenClient> video_;
  std::shared_ptr<TextEmbedder> embedder_;
  std::vector<std::string> artifacts_;
};

std::vector<std::string> read_classes(const fs::path& path) {
  auto classes = read_lines(path);
  if (classes.empty()) throw Error(ErrorCode::kInvalidInput, "class list is empty: " + path.string(), "classes");
  make_class_list(classes);
  return classes;
}

// JSON hierarchies are re-validated against the classes; text files use the
// "parent: child, child" form of a generated response.
HierarchyMap load_hierarchy(const fs::path& path, const std::vector<std::string>& classes,
                            HierarchyDiagnostics* diagnostics = nullptr) {
  HierarchyMap h = path.extension() == ".json"
                       ? normalize_hierarchy(read_hierarchy_json(path), classes, diagnostics)
                       : parse_hierarchy(read_file(path), classes, diagnostics);
  check_hierarchy(h, classes);
  return h;
}

std::map<std::string, std::string> load_labels(const fs::path& path) {
  std::map<std::string, std::string> out;
  for (auto& r : read_labels(path)) {
    if (!out.emplace(r.video_id, r.label).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate label for video " + r.video_id, r.video_id);
    }
  }
  return out;
}

// Embeds distinct texts once, in batches; parallel when the embedder allows.
std::unordered_map<std::string, Embedding> embed_texts(TextEmbedder& embedder,
                                                       const std::vector<std::string>& texts,
                                                       std::size_t workers) {
  std::vector<std::string> unique;
  std::set<std::string> seen;
  for (const auto& t : texts) {
    if (seen.insert(t).second) unique.push_back(t);
  }
  constexpr std::size_t kBatch = 64;
  const std::size_t n_batches = (unique.size() + kBatch - 1) / kBatch;
  std::vector<Matrix> batches(n_batches);
  parallel_for(n_batches, embedder.concurrent() ? workers : 1, [&](std::size_t b) {
    const std::size_t start = b * kBatch;
    batches[b] = embedder.embed(std::span(unique).subspan(start, std::min(kBatch, unique.size() - start)));
  });
  std::unordered_map<std::string, Embedding> out;
  for (std::size_t i = 0; i < unique.size(); ++i) out.emplace(unique[i], batches[i / kBatch].embedding(i % kBatch));
  return out;
}

void check_embedder_dim(TextEmbedder& embedder, std::size_t dim, const char* what) {
  if (embedder.dim() != dim) {
    throw Error(ErrorCode::kDimMismatch, "embedder dim " + std::to_string(embedder.dim()) + " differs from " +
                                             what + " dim " + std::to_string(dim));
  }
}

// Video descriptions embedded per video id.
std::map<std::string, std::vector<Embedding>> embed_descriptions(const std::vector<VideoDescriptions>& rows,
                                                                 TextEmbedder& embedder, std::size_t workers) {
  std::vector<std::string> texts;
  for (const auto& r : rows) texts.insert(texts.end(), r.descriptions.begin(), r.descriptions.end());
  const auto embedded = embed_texts(embedder, texts, workers);
  std::map<std::string, std::vector<Embedding>> out;
  for (const auto& r : rows) {
    auto& slot = out[r.video_id];
    for (const auto& d : r.descriptions) slot.push_back(embedded.at(d));
  }
  return out;
}

// Fused vectors when available, else the raw video embeddings.
EmbeddingStore query_vectors(const RunContext& ctx) {
  if (auto fused = ctx.optional("fused", "fused")) return read_store(*fused);
  if (auto videos = ctx.optional("videos")) return read_store(*videos);
  throw Error(ErrorCode::kConfig, "missing required input --fused (or --videos)", "fused");
}

void write_json_file(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

json eval_config_snapshot(const RunConfig& c) {
  return {{"mode", run_mode_name(c.mode)},
          {"components", component_names(c.components)},
          {"fusion", fusion_config_to_json(c.fusion)},
          {"n_desc", c.n_desc},
          {"n_captions", c.n_captions}};
}

json cmd_descriptors_gen(RunContext& ctx) {
  const auto classes = read_classes(ctx.require("classes"));
  std::optional<HierarchyMap> hierarchy;
  if (auto p = ctx.optional("hierarchy")) hierarchy = load_hierarchy(*p, classes);
  GenClient& client = ctx.text_client();
  std::vector<DescriptorSet> sets(classes.size());
  parallel_for(classes.size(), ctx.config().workers, [&](std::size_t i) {
    sets[i] = generate_descriptor_set(classes[i], client, hierarchy ? &*hierarchy : nullptr);
  });
  DescriptorDocument doc;
  doc.model = client.backend().model_name();
  doc.temperature = client.config().temperature;
  doc.backend = std::string(backend_kind_name(client.backend().kind()));
  doc.template_version = prompt_template(TemplateId::kAttributes).version;
  std::size_t no_attr = 0, no_desc = 0;
  for (auto& s : sets) {
    no_attr += s.attributes ? 0 : 1;
    no_desc += s.description ? 0 : 1;
    doc.classes.emplace(s.class_name, std::move(s));
  }
  const fs::path path = ctx.out() / "descriptors.json";
  write_descriptors(doc, path);
  ctx.artifact(path);
  return {{"classes", classes.size()}, {"missing_attributes", no_attr}, {"missing_descriptions", no_desc}};
}

json cmd_hierarchy_gen(RunContext& ctx) {
  const auto classes = read_classes(ctx.require("classes"));
  std::string response;
  if (auto from = ctx.optional("from")) response = read_file(*from);
  else response = generate_hierarchy(classes, ctx.text_client());
  HierarchyDiagnostics diag;
  const HierarchyMap h = parse_hierarchy(response, classes, &diag);
  check_hierarchy(h, classes);
  const fs::path raw = ctx.out() / "hierarchy_raw.txt";
  const fs::path path = ctx.out() / "hierarchy.json";
  write_file_atomic(raw, response);
  write_hierarchy_json(h, path);
  ctx.artifact(raw);
  ctx.artifact(path);
  return {{"classes", classes.size()},
          {"parents", h.parents.size()},
          {"unmatched", diag.unmatched},
          {"defaulted", diag.defaulted}};
}

json cmd_videodesc_gen(RunContext& ctx) {
  const EmbeddingStore videos = read_store(ctx.require("videos"));
  GenClient& client = ctx.video_client();
  const auto& ids = videos.ids();
  std::vector<VideoDescriptions> rows(ids.size());
  parallel_for(ids.size(), ctx.config().workers, [&](std::size_t i) {
    rows[i] = {ids[i], generate_video_descriptions(ids[i], client, ctx.config().n_desc,
                                                   ctx.config().video_llm.temperature)};
  });
  const fs::path path = ctx.out() / "video_descriptions.jsonl";
  write_video_descriptions(rows, path);
  ctx.artifact(path);
  return {{"videos", ids.size()}, {"descriptions_per_video", ctx.config().n_desc}};
}

json cmd_classifier_build(RunContext& ctx) {
  const auto classes = read_classes(ctx.require("classes"));
  std::map<std::string, DescriptorSet> descriptors;
  if (auto p = ctx.optional("descriptors", "descriptors.json")) descriptors = read_descriptors(*p).classes;
  std::optional<HierarchyMap> hierarchy;
  if (auto p = ctx.optional("hierarchy")) hierarchy = load_hierarchy(*p, classes);
  const ClassifierMatrix m = build_classifier(classes, descriptors, hierarchy ? &*hierarchy : nullptr,
                                              ctx.config().components, ctx.embedder(),
                                              {64, ctx.config().workers});
  const fs::path dir = ctx.out() / "classifier";
  write_classifier(m, dir);
  ctx.artifact(dir);
  return {{"classes", m.size()},
          {"dim", m.dim()},
          {"components", component_names(m.components)},
          {"fallbacks", m.fallbacks.size()},
          {"contexts", m.contexts.size()}};
}

json cmd_fuse(RunContext& ctx) {
  const EmbeddingStore videos = read_store(ctx.require("videos"));
  FusionConfig cfg = ctx.config().fusion;
  if (ctx.config().mode != RunMode::kAction) cfg.filtering_enabled = false;

  std::map<std::string, std::vector<Embedding>> descs;
  if (auto p = ctx.optional("descriptions", "video_descriptions.jsonl")) {
    const auto rows = read_video_descriptions(*p);
    if (!rows.empty()) {
      check_embedder_dim(ctx.embedder(), videos.dim(), "video");
      descs = embed_descriptions(rows, ctx.embedder(), ctx.config().workers);
    }
  }

  const auto& ids = videos.ids();
  std::vector<EnhancedVisual> fused(ids.size());
  parallel_for(ids.size(), ctx.config().workers, [&](std::size_t i) {
    std::span<const Embedding> d;
    if (auto it = descs.find(ids[i]); it != descs.end()) d = it->second;
    fused[i] = fuse_video(ids[i], videos.embedding(i), d, cfg);
  });

  std::vector<Embedding> vectors;
  std::vector<FusionRecord> records;
  double beta_sum = 0.0;
  std::size_t with_desc = 0;
  for (auto& f : fused) {
    records.push_back({f.video_id, f.beta2_used, f.descriptions_kept});
    beta_sum += f.beta2_used;
    with_desc += f.descriptions_kept.empty() ? 0 : 1;
    vectors.push_back(std::move(f.vector));
  }
  const fs::path dir = ctx.out() / "fused";
  write_store(dir, ids, vectors);
  write_fusion_records(records, dir / "fusion.jsonl");
  ctx.artifact(dir);
  return {{"videos", ids.size()},
          {"videos_with_descriptions", with_desc},
          {"filtering", cfg.filtering_enabled},
          {"mean_beta2", ids.empty() ? 0.0 : beta_sum / static_cast<double>(ids.size())}};
}

json cmd_classify(RunContext& ctx) {
  const ClassifierMatrix classifier = read_classifier(ctx.require("classifier", "classifier"));
  const EmbeddingStore vectors = query_vectors(ctx);
  std::optional<std::map<std::string, std::string>> labels;
  if (auto p = ctx.optional("labels")) labels = load_labels(*p);

  std::vector<Prediction> preds(vectors.size());
  parallel_for(vectors.size(), ctx.config().workers, [&](std::size_t i) {
    preds[i] = classify(vectors.ids()[i], vectors.row(i), classifier, ctx.config().top_m);
  });

  std::vector<PredictionRecord> records;
  for (const auto& p : preds) {
    PredictionRecord r{p.video_id, p.predicted_class, p.score, std::nullopt, p.ranked};
    if (labels) {
      if (auto it = labels->find(p.video_id); it != labels->end()) r.label = it->second;
    }
    records.push_back(std::move(r));
  }
  EvalReport report;
  if (labels) report.metrics["top1_accuracy"] = top1_accuracy(preds, *labels);
  for (const auto& r : records) {
    json row{{"video_id", r.video_id}, {"predicted", r.predicted}};
    if (r.label) {
      row["label"] = *r.label;
      row["correct"] = *r.label == r.predicted;
    }
    report.records.push_back(std::move(row));
  }
  report.config = eval_config_snapshot(ctx.config());
  report.config["classifier_components"] = component_names(classifier.components);
  report.config["videos"] = vectors.size();
  report.config["classes"] = classifier.size();

  const fs::path pred_path = ctx.out() / "predictions.jsonl";
  const fs::path metrics_path = ctx.out() / "metrics.json";
  write_predictions(records, pred_path);
  write_json_file(metrics_path, report.to_json());
  ctx.artifact(pred_path);
  ctx.artifact(metrics_path);
  return {{"videos", vectors.size()}, {"metrics", report.metrics}};
}

json cmd_retrieve(RunContext& ctx) {
  const EmbeddingStore videos = query_vectors(ctx);
  auto captions = read_captions(ctx.require("captions"));
  if (captions.empty()) throw Error(ErrorCode::kInvalidInput, "no captions", "captions");
  const int n = ctx.config().n_captions;
  if (n > 0 && std::ranges::any_of(captions, [](const auto& c) { return c.generated.empty(); })) {
    GenClient& client = ctx.text_client();
    parallel_for(captions.size(), ctx.config().workers, [&](std::size_t i) {
      if (!captions[i].generated.empty()) return;
      auto aug = augment_caption(captions[i].caption, client, n);
      captions[i].generated = std::move(aug.captions);
      captions[i].padded = aug.padded;
    });
  }
  if (n == 0) {
    for (auto& c : captions) c.generated.clear();
  }

  TextEmbedder& embedder = ctx.embedder();
  check_embedder_dim(embedder, videos.dim(), "video");
  std::vector<std::string> texts;
  for (const auto& c : captions) {
    texts.push_back(c.caption);
    texts.insert(texts.end(), c.generated.begin(), c.generated.end());
  }
  const auto embedded = embed_texts(embedder, texts, ctx.config().workers);
  std::vector<std::string> caption_ids;
  std::vector<Embedding> caption_vecs;
  for (const auto& c : captions) {
    std::vector<Embedding> parts{embedded.at(c.caption)};
    for (const auto& g : c.generated) parts.push_back(embedded.at(g));
    caption_ids.push_back(c.id);
    caption_vecs.push_back(renorm_mean(parts));
  }

  const fs::path cap_dir = ctx.out() / "captions";
  write_store(cap_dir, caption_ids, caption_vecs);
  const EmbeddingStore gallery_text = read_store(cap_dir);

  // Caption ids name their video; both directions use that pairing.
  std::map<std::string, std::string> truth;
  for (const auto& id : caption_ids) {
    if (!videos.contains(id)) throw Error(ErrorCode::kUnknownId, "caption id names no video: " + id, id);
    truth.emplace(id, id);
  }
  std::vector<std::string> query_ids;
  std::vector<Embedding> query_vecs;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    if (truth.contains(videos.ids()[i])) {
      query_ids.push_back(videos.ids()[i]);
      query_vecs.push_back(videos.embedding(i));
    }
  }
  const EmbeddingStore video_queries(StoreManifest{kStoreVersion, videos.dim(), query_ids.size(), kStoreDtype,
                                                   false, query_ids},
                                     Matrix::from_rows(query_vecs));
  const std::size_t ks[] = {1, 5};
  const auto v2t = recall_at_k(video_queries, gallery_text, truth, ks, ctx.config().workers);
  const auto t2v = recall_at_k(gallery_text, videos, truth, ks, ctx.config().workers);

  EvalReport report;
  report.metrics = {{"v2t_r1", v2t.at(1)}, {"v2t_r5", v2t.at(5)}, {"t2v_r1", t2v.at(1)}, {"t2v_r5", t2v.at(5)}};
  report.config = eval_config_snapshot(ctx.config());
  report.config["queries"] = caption_ids.size();
  report.config["gallery_videos"] = videos.size();
  report.config["padded_captions"] =
      std::ranges::count_if(captions, [](const auto& c) { return c.padded; });

  const fs::path aug_path = ctx.out() / "captions_augmented.jsonl";
  const fs::path metrics_path = ctx.out() / "metrics.json";
  write_captions(captions, aug_path);
  write_json_file(metrics_path, report.to_json());
  ctx.artifact(aug_path);
  ctx.artifact(cap_dir);
  ctx.artifact(metrics_path);
  return {{"queries", caption_ids.size()}, {"metrics", report.metrics}};
}

json cmd_time_eval(RunContext& ctx) {
  const EmbeddingStore videos = query_vectors(ctx);
  TimeConsistency tc;
  std::size_t n = 0;
  if (auto pairs = ctx.optional("pairs")) {
    // {"video_id", "attractor", "distractor"} caption texts.
    const auto rows = read_jsonl(*pairs);
    std::vector<std::string> ids, attractors, distractors;
    try {
      for (const auto& r : rows) {
        ids.push_back(r.at("video_id").get<std::string>());
        attractors.push_back(r.at("attractor").get<std::string>());
        distractors.push_back(r.at("distractor").get<std::string>());
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchema, "bad pairs record: " + std::string(e.what()), "pairs");
    }
    TextEmbedder& embedder = ctx.embedder();
    check_embedder_dim(embedder, videos.dim(), "video");
    std::vector<std::string> texts = attractors;
    texts.insert(texts.end(), distractors.begin(), distractors.end());
    const auto embedded = embed_texts(embedder, texts, ctx.config().workers);
    Matrix v(ids.size(), videos.dim()), a(ids.size(), videos.dim()), d(ids.size(), videos.dim());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::ranges::copy(videos.row(ids[i]), v.row(i).begin());
      std::ranges::copy(embedded.at(attractors[i]).values(), a.row(i).begin());
      std::ranges::copy(embedded.at(distractors[i]).values(), d.row(i).begin());
    }
    tc = time_consistency(v, a, d);
    n = ids.size();
  } else {
    const EmbeddingStore attractors = read_store(ctx.require("attractors"));
    const EmbeddingStore distractors = read_store(ctx.require("distractors"));
    tc = time_consistency(videos, attractors, distractors, attractors.ids());
    n = attractors.size();
  }
  EvalReport report;
  report.metrics["time_consistency"] = tc.score();
  report.config = eval_config_snapshot(ctx.config());
  report.config["triples"] = n;
  report.config["counts"] = {{"wins", tc.wins}, {"ties", tc.ties}, {"losses", tc.losses}};
  report.config["definition"] = "win 1, tie 0.5, loss 0 on cos(video, attractor) vs cos(video, distractor)";
  const fs::path metrics_path = ctx.out() / "metrics.json";
  write_json_file(metrics_path, report.to_json());
  ctx.artifact(metrics_path);
  return {{"triples", n}, {"metrics", report.metrics}};
}

json cmd_explain(RunContext& ctx) {
  const std::string video_id = ctx.arg("video");
  const std::string class_name = ctx.arg("class");
  const EmbeddingStore vectors = query_vectors(ctx);
  const Embedding video = vectors.embedding(video_id);
  const DescriptorDocument doc = read_descriptors(ctx.require("descriptors", "descriptors.json"));
  auto it = doc.classes.find(class_name);
  if (it == doc.classes.end() || !it->second.attributes || it->second.attributes->empty()) {
    throw Error(ErrorCode::kInvalidInput, "no attributes for class " + class_name, "class");
  }
  TextEmbedder& embedder = ctx.embedder();
  check_embedder_dim(embedder, video.dim(), "video");

  AttributionReport report;
  report.video_id = video_id;
  report.class_name = class_name;
  report.entries = attribute_contributions(video, *it->second.attributes, embedder);
  if (auto p = ctx.optional("classifier", "classifier")) {
    const Prediction pred = classify(video_id, video.values(), read_classifier(*p));
    report.predicted_class = pred.predicted_class;
    report.predicted_score = pred.score;
  }
  for (auto fmt : {ReportFormat::kMarkdown, ReportFormat::kCsv, ReportFormat::kSvgBar}) {
    const fs::path path = ctx.out() / report_file_name(report, fmt);
    emit_report(report, fmt, path);
    ctx.artifact(path);
  }
  json top = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(3, report.entries.size()); ++i) {
    top.push_back({report.entries[i].attribute, report.entries[i].score});
  }
  return {{"attributes", report.entries.size()}, {"top", top}};
}

json cmd_ablate(RunContext& ctx) {
  const fs::path grid_path = ctx.require("grid");
  json grid;
  try {
    grid = json::parse(read_file(grid_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "grid is not valid JSON: " + std::string(e.what()), "grid");
  }
  if (!grid.is_object() || !grid.contains("axes")) throw Error(ErrorCode::kEmptyGrid, "grid has no axes", "axes");
  const AblationAxes axes = ablation_axes_from_json(grid.at("axes"));
  if (!grid.contains("dataset") || !grid.at("dataset").is_object()) {
    throw Error(ErrorCode::kConfig, "grid has no dataset section", "dataset");
  }
  const json& ds = grid.at("dataset");
  const fs::path base = grid_path.parent_path();
  auto ds_path = [&](const char* key, bool required) -> std::optional<fs::path> {
    if (!ds.contains(key) || ds.at(key).is_null()) {
      if (required) throw Error(ErrorCode::kConfig, std::string("grid dataset lacks ") + key, std::string("dataset.") + key);
      return std::nullopt;
    }
    fs::path p = ds.at(key).get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!fs::exists(p)) throw Error(ErrorCode::kConfig, "input not found: " + p.string(), std::string("dataset.") + key);
    return p;
  };

  AblationDataset data;
  data.videos = read_store(*ds_path("videos", true));
  data.labels = load_labels(*ds_path("labels", true));
  data.classes = read_classes(*ds_path("classes", true));
  if (auto p = ds_path("descriptors", false)) data.descriptors = read_descriptors(*p).classes;
  if (auto p = ds_path("hierarchy", false)) data.hierarchy = load_hierarchy(*p, data.classes);
  std::string base_source = "none";
  if (ds.contains("descriptions")) {
    const json& sources = ds.at("descriptions");
    if (!sources.is_object()) throw Error(ErrorCode::kConfig, "dataset.descriptions must map names to files", "dataset.descriptions");
    for (const auto& [name, value] : sources.items()) {
      if (name == "none" || value.is_null()) continue;
      fs::path p = value.get<std::string>();
      if (p.is_relative()) p = base / p;
      check_embedder_dim(ctx.embedder(), data.videos.dim(), "video");
      data.description_sources[name] = embed_descriptions(read_video_descriptions(p), ctx.embedder(), ctx.config().workers);
      if (base_source == "none") base_source = name;
    }
  }
  const auto cells = run_ablation(axes, data, ctx.embedder(), ctx.config().fusion, ctx.config().components,
                                  base_source, ctx.config().workers);
  const fs::path csv_path = ctx.out() / "ablation.csv";
  const fs::path json_path = ctx.out() / "ablation.json";
  write_file_atomic(csv_path, ablation_csv(cells));
  write_json_file(json_path, ablation_json(cells));
  ctx.artifact(csv_path);
  ctx.artifact(json_path);
  const auto failed = std::ranges::count_if(cells, [](const auto& c) { return c.failed(); });
  return {{"cells", cells.size()}, {"failed", failed}};
}

using CommandFn = json (*)(RunContext&);

const std::map<std::string, CommandFn>& command_table() {
  static const std::map<std::string, CommandFn> table{
      {"descriptors gen", cmd_descriptors_gen}, {"hierarchy gen", cmd_hierarchy_gen},
      {"videodesc gen", cmd_videodesc_gen},     {"classifier build", cmd_classifier_build},
      {"fuse", cmd_fuse},                       {"classify", cmd_classify},
      {"retrieve", cmd_retrieve},               {"time-eval", cmd_time_eval},
      {"explain", cmd_explain},                 {"ablate", cmd_ablate},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : command_table()) n.push_back(k);
    return n;
  }();
  return names;
}

json run_command(const std::string& command, const RunConfig& config) {
  auto it = command_table().find(command);
  if (it == command_table().end()) throw Error(ErrorCode::kConfig, "unknown command: " + command, "command");
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + config.out.string() + ": " + ec.message(), "out");

  RunContext ctx(config);
  json summary = it->second(ctx);
  summary["command"] = command;
  summary["artifacts"] = ctx.artifacts();

  json templates = json::object();
  for (auto id : all_templates()) templates[std::string(template_name(id))] = prompt_template(id).version;
  const json run{{"engine_version", kEngineVersion},
                 {"command", command},
                 {"config", config.to_json()},
                 {"templates", templates},
                 {"cache", ctx.stats()},
                 {"artifacts", ctx.artifacts()}};
  std::string slug = command;
  std::ranges::replace(slug, ' ', '-');
  write_json_file(config.out / "run.json", run);
  write_json_file(config.out / "runs" / (slug + ".json"), run);
  summary["cache"] = ctx.stats();
  return summary;
}

json execute(const std::string& command, const json& options, EnvLookup env) {
  return run_command(command, resolve_config(options, env));
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return is_backend_failure(err->code()) ? 2 : 1;
  return 1;
}

json error_json(const std::exception& e) {
  json err{{"code", "InternalError"}, {"message", e.what()}};
  if (const auto* v = dynamic_cast<const Error*>(&e)) {
    err["code"] = std::string(error_code_name(v->code()));
    if (!v->field().empty()) err["field"] = v->field();
  }
  return {{"error", err}, {"exit_code", exit_code_for(e)}};
}

}  // namespace vp
