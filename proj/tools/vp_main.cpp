// vp: command-line front end. Flags become a JSON options object handed to
// vp_run; errors are printed to stderr as JSON.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "videoprompter/videoprompter.h"

using nlohmann::json;

namespace {

struct Flag {
  const char* name;   // CLI flag without dashes
  const char* key;    // options key
  const char* help;
};

// Path and string valued options shared by the subcommands.
const Flag kStringFlags[] = {
    {"config", "config", "JSON configuration file"},
    {"out", "out", "output directory"},
    {"cache-dir", "cache_dir", "completion cache directory"},
    {"mode", "mode", "action | retrieval | time"},
    {"classes", "classes", "class list, one name per line"},
    {"videos", "videos", "video embedding store"},
    {"labels", "labels", "labels JSONL"},
    {"descriptors", "descriptors", "descriptors JSON"},
    {"hierarchy", "hierarchy", "hierarchy JSON or text"},
    {"from", "from", "hierarchy response text to parse instead of querying the LLM"},
    {"classifier", "classifier", "classifier directory"},
    {"fused", "fused", "fused video store"},
    {"descriptions", "descriptions", "video descriptions JSONL"},
    {"captions", "captions", "captions JSONL"},
    {"attractors", "attractors", "attractor caption store"},
    {"distractors", "distractors", "distractor caption store"},
    {"pairs", "pairs", "attractor/distractor caption texts JSONL"},
    {"grid", "grid", "ablation grid JSON"},
    {"components", "components", "classifier components, comma separated"},
    {"video", "video", "video id"},
    {"class", "class", "class name"},
};

void print_error(const std::string& code, const std::string& message, int exit_code) {
  const json err{{"error", {{"code", code}, {"message", message}}}, {"exit_code", exit_code}};
  std::cerr << err.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot video understanding with language-enriched embeddings", "vp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(vp_version()));

  std::vector<std::string> string_values(std::size(kStringFlags));
  for (std::size_t i = 0; i < std::size(kStringFlags); ++i) {
    app.add_option(std::string("--") + kStringFlags[i].name, string_values[i], kStringFlags[i].help);
  }
  long long workers = 0;
  bool mock = false;
  int n_desc = 0, n_captions = 0, top_m = 0;
  long long filter_k = 0;
  bool no_filter = false;
  std::string beta2, aggregate;
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--mock", mock, "use hermetic mock backends");
  app.add_option("--n-desc", n_desc, "descriptions per video")->check(CLI::PositiveNumber);
  app.add_option("--n-captions", n_captions, "paraphrases per caption")->check(CLI::NonNegativeNumber);
  app.add_option("--top-m", top_m, "ranked classes per prediction")->check(CLI::NonNegativeNumber);
  app.add_option("--filter-k", filter_k, "descriptions kept per video")->check(CLI::PositiveNumber);
  app.add_flag("--no-filter", no_filter, "fuse all descriptions");
  app.add_option("--beta2", beta2, "cosine | cosine-raw | fixed:<value>");
  app.add_option("--aggregate", aggregate, "mean | per_description");

  struct Command {
    const char* group;
    const char* action;
    const char* help;
  };
  const Command commands[] = {
      {"descriptors", "gen", "generate class attributes and descriptions"},
      {"hierarchy", "gen", "group classes under high-level contexts"},
      {"videodesc", "gen", "generate textual descriptions of videos"},
      {"classifier", "build", "embed enriched class representations"},
      {"fuse", nullptr, "fuse video embeddings with their descriptions"},
      {"classify", nullptr, "zero-shot action recognition"},
      {"retrieve", nullptr, "text-video retrieval"},
      {"time-eval", nullptr, "time-consistency evaluation"},
      {"explain", nullptr, "per-attribute similarity report"},
      {"ablate", nullptr, "run an ablation grid"},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.group, c.action ? "" : c.help);
    sub->fallthrough();
    if (c.action) {
      sub->require_subcommand(1);
      sub->add_subcommand(c.action, c.help)->fallthrough();
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what(), 1);
    return 1;
  }

  std::string command;
  for (auto* sub : app.get_subcommands()) {
    command = sub->get_name();
    for (auto* action : sub->get_subcommands()) command += " " + action->get_name();
  }

  json options = json::object();
  for (std::size_t i = 0; i < std::size(kStringFlags); ++i) {
    if (app.count(std::string("--") + kStringFlags[i].name) > 0) options[kStringFlags[i].key] = string_values[i];
  }
  if (app.count("--workers")) options["workers"] = workers;
  if (mock) options["mock"] = true;
  if (app.count("--n-desc")) options["n_desc"] = n_desc;
  if (app.count("--n-captions")) options["n_captions"] = n_captions;
  if (app.count("--top-m")) options["top_m"] = top_m;
  json fusion = json::object();
  if (app.count("--filter-k")) fusion["filter_k"] = filter_k;
  if (no_filter) fusion["filtering"] = false;
  if (!beta2.empty()) fusion["beta2"] = beta2;
  if (!aggregate.empty()) fusion["aggregate"] = aggregate;
  if (!fusion.empty()) options["fusion"] = fusion;

  vp_context* ctx = vp_context_create();
  const vp_status status = vp_run(ctx, command.c_str(), options.dump().c_str());
  int code = 0;
  if (status == VP_OK) {
    std::cout << vp_last_result_json(ctx) << std::endl;
  } else {
    std::cerr << vp_last_error_json() << std::endl;
    code = vp_status_exit_code(status);
  }
  vp_context_destroy(ctx);
  return code;
}
