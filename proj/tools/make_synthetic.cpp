// Writes the bundled synthetic fixture: a class list, a video store whose
// vectors sit near the mock embeddings of each class's enriched prompts,
// labels, per-video descriptions and a config pointing at all of them.
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "classifier/classifier.hpp"
#include "classifier/embedder.hpp"
#include "core/errors.hpp"
#include "core/random.hpp"
#include "genclient/client.hpp"
#include "genclient/generate.hpp"
#include "store/fs.hpp"
#include "store/records.hpp"
#include "store/store.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic evaluation fixture", "make_synthetic"};
  std::string out = "data/synthetic";
  std::size_t dim = 64, per_class = 10;
  std::uint64_t seed = 7;
  double base_weight = 0.35, noise = 0.22;
  app.add_option("--out", out, "output directory");
  app.add_option("--dim", dim, "embedding dimension");
  app.add_option("--per-class", per_class, "videos per class");
  app.add_option("--seed", seed, "noise seed");
  app.add_option("--base-weight", base_weight, "weight of the base prompt direction");
  app.add_option("--noise", noise, "per-coordinate noise scale");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::string> classes{"archery",    "juggling balls", "rope climbing", "surfing",
                                         "tai chi",    "pole vault",     "yo yo",         "knitting"};
  try {
    const fs::path dir(out);
    fs::create_directories(dir);
    vp::MockTextEmbedder embedder(dim, 0);
    vp::BackendConfig backend_cfg;
    vp::GenClient client(std::make_shared<vp::MockBackend>(), backend_cfg);

    std::mt19937_64 rng(seed);
    std::vector<std::string> ids;
    std::vector<vp::Embedding> videos;
    std::vector<json> labels;
    std::vector<vp::VideoDescriptions> descriptions;
    for (const auto& cls : classes) {
      const vp::DescriptorSet set = vp::generate_descriptor_set(cls, client, nullptr);
      const vp::Embedding base = embedder.embed_one(vp::base_prompt(cls));
      const vp::Embedding attrs = embedder.embed_one(vp::join_attributes(*set.attributes));
      const vp::Embedding desc = embedder.embed_one(*set.description);
      for (std::size_t k = 0; k < per_class; ++k) {
        const std::string id = "vid_" + std::string(3 - std::to_string(ids.size()).size(), '0') +
                               std::to_string(ids.size());
        std::vector<float> v(dim);
        for (std::size_t i = 0; i < dim; ++i) {
          v[i] = static_cast<float>(base_weight * base[i] + attrs[i] + desc[i] + noise * vp::uniform_pm1(rng));
        }
        ids.push_back(id);
        videos.push_back(vp::normalize(v));
        labels.push_back({{"video_id", id}, {"label", cls}});
        // One description restates the class description; the rest are clip-specific.
        std::vector<std::string> texts;
        for (int i = 0; i < 9; ++i) texts.push_back("a clip " + id + " shot " + std::to_string(i));
        texts.insert(texts.begin() + static_cast<std::ptrdiff_t>(k % 10), *set.description);
        descriptions.push_back({id, texts});
      }
    }

    std::string class_text;
    for (const auto& c : classes) class_text += c + "\n";
    vp::write_file_atomic(dir / "classes.txt", class_text);
    vp::write_store(dir / "videos", ids, videos);
    vp::write_jsonl(labels, dir / "labels.jsonl");
    vp::write_video_descriptions(descriptions, dir / "video_descriptions.jsonl");
    const json config{{"mode", "action"},
                      {"text_llm", {{"kind", "mock"}}},
                      {"video_llm", {{"kind", "mock"}}},
                      {"embedder", {{"kind", "mock"}, {"dim", dim}, {"seed", 0}}},
                      {"components", "base,attributes,description"},
                      {"dataset",
                       {{"classes", "classes.txt"},
                        {"videos", "videos"},
                        {"labels", "labels.jsonl"},
                        {"descriptions", "video_descriptions.jsonl"}}}};
    vp::write_file_atomic(dir / "config.json", config.dump(2) + "\n");
    std::printf("wrote %zu videos, %zu classes to %s\n", ids.size(), classes.size(), dir.c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "make_synthetic: %s\n", e.what());
    return 1;
  }
  return 0;
}
