// Command-line driver: ingest | synthesize | translate | stats | evaluate.
//
// Exit codes: 0 success, 1 completed-with-flags (e.g. records dropped or
// left unvetted by the translation stage), 2 invalid input or configuration.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "kgqa/config.hpp"
#include "kgqa/eval.hpp"
#include "kgqa/graph_io.hpp"
#include "kgqa/http_chat.hpp"
#include "kgqa/log.hpp"
#include "kgqa/normalize.hpp"
#include "kgqa/prompts.hpp"
#include "kgqa/question_gen.hpp"
#include "kgqa/record.hpp"
#include "kgqa/stats.hpp"
#include "kgqa/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace kgqa;

struct CommonArgs {
  std::string config_path;
  std::string log_level = "info";
  long long seed = -1;
  int workers = 0;
  bool offline = false;
  bool strict_filter = false;
  int quota_ambiguous = -1;
  int quota_non_ambiguous = -1;
  std::string out_dir;
};

PipelineConfig effective_config(const CommonArgs& args) {
  if (args.config_path.empty())
    throw ConfigError("--config is required for this command");
  PipelineConfig c = load_config(args.config_path);
  if (args.seed >= 0) c.synthesis.seed = static_cast<std::uint64_t>(args.seed);
  if (args.workers > 0) c.workers = args.workers;
  if (args.offline) c.client.mode = "offline";
  if (args.strict_filter) c.strict_filter = true;
  if (args.quota_ambiguous >= 0) c.quota.ambiguous = args.quota_ambiguous;
  if (args.quota_non_ambiguous >= 0)
    c.quota.non_ambiguous = args.quota_non_ambiguous;
  if (!args.out_dir.empty()) c.out_dir = args.out_dir;
  return c;
}

std::unique_ptr<ChatClient> make_client(const ClientConfig& c) {
  if (c.mode == "stub")
    return std::make_unique<StubChatClient>(
        StubChatClient::read_stub_file(c.stub_path));
  if (c.mode == "http") {
    HttpChatConfig hc;
    hc.base_url = c.base_url;
    hc.path = c.path;
    hc.model = c.model;
    hc.auth_env = c.auth_env;
    hc.timeout_s = c.timeout_s;
    hc.max_retries = c.max_retries;
    return std::make_unique<HttpChatClient>(hc);
  }
  return nullptr;  // offline
}

void write_effective_config(const PipelineConfig& c) {
  write_file_atomic((fs::path(c.out_dir) / "config.effective.json").string(),
                    config_to_json(c).dump(2) + "\n");
}

int cmd_ingest(const CommonArgs& args, const std::string& save_dir) {
  PipelineConfig c = effective_config(args);
  KnowledgeGraph g = load_graph(c.graph);
  if (!save_dir.empty()) {
    const fs::path dir(save_dir);
    save_graph(g, GraphPaths{(dir / "schema.json").string(),
                             (dir / "entities.jsonl").string(),
                             (dir / "triples.jsonl").string(),
                             (dir / "attributes.jsonl").string(),
                             (dir / "ambiguity.jsonl").string()});
  }
  std::cout << "entities=" << g.entities().size()
            << " triples=" << g.triples().size()
            << " surfaces=" << g.ambiguity().size() << "\n";
  return 0;
}

int cmd_synthesize(const CommonArgs& args) {
  PipelineConfig c = effective_config(args);
  KnowledgeGraph g = load_graph(c.graph);
  std::unique_ptr<ChatClient> client = make_client(c.client);
  PromptKit kit;
  std::unique_ptr<LlmEntitySelector> selector;
  if (client && !c.prompts_dir.empty()) {
    kit = PromptKit::load(c.prompts_dir);
    selector = std::make_unique<LlmEntitySelector>(*client, kit);
  }
  SynthesisOutcome outcome =
      synthesize_dataset(g, c.synthesis, c.quota, selector.get(), c.workers);
  const fs::path out(c.out_dir);
  write_records_jsonl((out / "records.jsonl").string(), outcome.records);
  write_file_atomic((out / "stats.json").string(),
                    stats_to_json(outcome.stats).dump(2) + "\n");
  write_file_atomic((out / "stats.txt").string(),
                    stats_to_text(outcome.stats));
  write_effective_config(c);
  log(LogLevel::Info, "synthesized " + std::to_string(outcome.records.size()) +
                          " records over " +
                          std::to_string(outcome.ordinals_tried) +
                          " sampling ordinals");
  std::cout << stats_to_text(outcome.stats);
  return 0;
}

int cmd_translate(const CommonArgs& args, const std::string& records_path) {
  PipelineConfig c = effective_config(args);
  KnowledgeGraph g = load_graph(c.graph);
  const fs::path out(c.out_dir);
  const std::string in_path =
      records_path.empty() ? (out / "records.jsonl").string() : records_path;
  std::vector<QARecord> records = read_records_jsonl(in_path);
  if (records.empty()) throw EmptyInput(in_path + ": no records");

  PromptKit kit;
  const bool have_kit = !c.prompts_dir.empty();
  if (have_kit) kit = PromptKit::load(c.prompts_dir);
  std::unique_ptr<ChatClient> client = make_client(c.client);

  TranslationOptions options;
  options.offline = c.client.mode == "offline";
  options.strict = c.strict_filter;
  options.retries = c.client.max_retries;
  options.parallelism = c.client.parallelism;
  StageSummary summary = run_translation_stage(
      records, g, client.get(), have_kit ? &kit : nullptr, options);

  write_records_jsonl((out / "records.jsonl").string(), records);
  write_file_atomic((out / "translate.summary.json").string(),
                    summary.to_json().dump(2) + "\n");
  write_effective_config(c);
  std::cout << "total=" << summary.total << " llm=" << summary.llm
            << " templated=" << summary.templated
            << " invalid_plan=" << summary.invalid_plan
            << " invalid_qa=" << summary.invalid_qa
            << " unvetted=" << summary.unvetted
            << " dropped=" << summary.dropped << "\n";
  return summary.flagged() ? 1 : 0;
}

int cmd_stats(const std::string& records_path, const std::string& out_json) {
  std::vector<QARecord> records = read_records_jsonl(records_path);
  DatasetStats stats = compute_dataset_stats(records);
  if (!out_json.empty())
    write_file_atomic(out_json, stats_to_json(stats).dump(2) + "\n");
  std::cout << stats_to_text(stats);
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& records_path,
                 const std::string& predictions_path, bool lenient,
                 bool use_matcher) {
  PipelineConfig c = effective_config(args);
  KnowledgeGraph g = load_graph(c.graph);
  std::vector<QARecord> records = read_records_jsonl(records_path);
  if (records.empty()) throw EmptyInput(records_path + ": no gold records");
  std::vector<Prediction> predictions =
      read_predictions_jsonl(predictions_path);
  if (predictions.empty())
    throw EmptyInput(predictions_path + ": no predictions");

  Normalizer norm(g);
  EvalOptions options;
  options.score.ignore_spurious_branches = lenient;
  std::unique_ptr<ChatClient> client;
  PromptKit kit;
  if (use_matcher && c.client.mode != "offline") {
    client = make_client(c.client);
    if (!c.prompts_dir.empty()) kit = PromptKit::load(c.prompts_dir);
    options.score.align.matcher = client.get();
    options.score.align.kit = &kit;
  }
  EvalReport report = evaluate_all(records, predictions, g, norm, options);

  const fs::path out(c.out_dir);
  write_file_atomic((out / "report.json").string(),
                    report_to_json(report).dump(2) + "\n");
  write_file_atomic((out / "report.txt").string(), report_to_text(report));
  std::cout << report_to_text(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knowledge-graph QA synthesis and evaluation"};
  app.require_subcommand(1);

  CommonArgs args;
  app.add_option("--log-level", args.log_level,
                 "debug|info|warn|error (default info)");

  auto add_common = [&](CLI::App* cmd, bool with_synthesis_flags) {
    cmd->add_option("--config", args.config_path, "pipeline config JSON");
    cmd->add_option("--out", args.out_dir, "output directory override");
    cmd->add_option("--workers", args.workers, "worker thread override");
    if (with_synthesis_flags) {
      cmd->add_option("--seed", args.seed, "synthesis seed override");
      cmd->add_option("--quota-ambiguous", args.quota_ambiguous,
                      "ambiguous record quota override");
      cmd->add_option("--quota-nonambiguous", args.quota_non_ambiguous,
                      "non-ambiguous record quota override");
    }
  };

  CLI::App* ingest = app.add_subcommand("ingest", "load and validate a graph");
  std::string save_dir;
  add_common(ingest, false);
  ingest->add_option("--save", save_dir, "write a canonical copy here");

  CLI::App* synthesize =
      app.add_subcommand("synthesize", "sample and execute question plans");
  add_common(synthesize, true);

  CLI::App* translate = app.add_subcommand(
      "translate", "turn plans into questions and vet them");
  std::string records_path;
  add_common(translate, false);
  translate->add_option("--records", records_path,
                        "records JSONL (default <out>/records.jsonl)");
  translate->add_flag("--offline", args.offline,
                      "force template questions, no chat client");
  translate->add_flag("--strict-filter", args.strict_filter,
                      "drop invalid records instead of flagging them");

  CLI::App* stats =
      app.add_subcommand("stats", "recompute dataset statistics");
  std::string stats_records, stats_out;
  stats->add_option("--records", stats_records, "records JSONL")->required();
  stats->add_option("--out", stats_out, "also write stats JSON here");

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score predictions against gold records");
  std::string gold_path, predictions_path;
  bool lenient = false, use_matcher = false;
  add_common(evaluate, false);
  evaluate->add_option("--records", gold_path, "gold records JSONL")
      ->required();
  evaluate->add_option("--predictions", predictions_path, "predictions JSONL")
      ->required();
  evaluate->add_flag("--lenient", lenient,
                     "ignore predicted branches that align to no gold branch");
  evaluate->add_flag("--match-branches", use_matcher,
                     "use the configured chat client for leftover alignment");

  CLI11_PARSE(app, argc, argv);

  try {
    kgqa::set_log_level(kgqa::parse_log_level(args.log_level));
    if (ingest->parsed()) return cmd_ingest(args, save_dir);
    if (synthesize->parsed()) return cmd_synthesize(args);
    if (translate->parsed()) return cmd_translate(args, records_path);
    if (stats->parsed()) return cmd_stats(stats_records, stats_out);
    if (evaluate->parsed())
      return cmd_evaluate(args, gold_path, predictions_path, lenient,
                          use_matcher);
  } catch (const kgqa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
