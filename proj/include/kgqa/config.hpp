#pragma once

// Pipeline configuration: one JSON file driving ingestion, synthesis, the
// chat-backed stages, and output locations.  Unknown keys are rejected so a
// typo fails fast instead of silently using a default.

#include <map>
#include <string>

#include <json.hpp>

#include "kgqa/errors.hpp"
#include "kgqa/graph_io.hpp"
#include "kgqa/sampler.hpp"
#include "kgqa/synth.hpp"
#include "kgqa/util.hpp"

namespace kgqa {

struct ClientConfig {
  std::string mode = "offline";  // offline | stub | http
  std::string stub_path;
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string auth_env = "KGQA_API_KEY";
  int timeout_s = 60;
  int max_retries = 3;
  int parallelism = 4;
};

struct PipelineConfig {
  GraphPaths graph;
  SynthesisConfig synthesis;
  SynthesisQuota quota{8, 8, {}};
  ClientConfig client;
  std::string prompts_dir;
  std::string out_dir = "out";
  bool strict_filter = false;
  int workers = 1;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> known,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace detail

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown_keys(j,
                              {"graph", "synthesis", "client", "prompts_dir",
                               "out_dir", "strict_filter", "workers"},
                              "config");
  PipelineConfig c;

  if (!j.contains("graph") || !j["graph"].is_object())
    throw ConfigError("config.graph: required object with the graph paths");
  const auto& gj = j["graph"];
  detail::reject_unknown_keys(
      gj, {"schema", "entities", "triples", "attributes", "ambiguity"},
      "config.graph");
  for (const char* k : {"schema", "entities", "triples"})
    if (!gj.contains(k) || !gj[k].is_string())
      throw ConfigError(std::string("config.graph.") + k +
                        ": required string path");
  c.graph.schema = gj["schema"].get<std::string>();
  c.graph.entities = gj["entities"].get<std::string>();
  c.graph.triples = gj["triples"].get<std::string>();
  c.graph.attributes = gj.value("attributes", std::string{});
  c.graph.ambiguity = gj.value("ambiguity", std::string{});

  if (j.contains("synthesis")) {
    const auto& sj = j["synthesis"];
    detail::reject_unknown_keys(
        sj,
        {"seed", "min_steps", "max_steps", "op_weights", "candidate_pool",
         "max_attempts_per_plan", "max_answer_size", "quota"},
        "config.synthesis");
    c.synthesis.seed = sj.value("seed", c.synthesis.seed);
    c.synthesis.min_steps = sj.value("min_steps", c.synthesis.min_steps);
    c.synthesis.max_steps = sj.value("max_steps", c.synthesis.max_steps);
    c.synthesis.candidate_pool =
        sj.value("candidate_pool", c.synthesis.candidate_pool);
    c.synthesis.max_attempts_per_plan =
        sj.value("max_attempts_per_plan", c.synthesis.max_attempts_per_plan);
    c.synthesis.max_answer_size =
        sj.value("max_answer_size", c.synthesis.max_answer_size);
    if (c.synthesis.min_steps < 2 ||
        c.synthesis.max_steps < c.synthesis.min_steps)
      throw ConfigError("config.synthesis: need 2 <= min_steps <= max_steps");
    if (sj.contains("op_weights")) {
      if (!sj["op_weights"].is_object())
        throw ConfigError("config.synthesis.op_weights: expected an object");
      for (auto it = sj["op_weights"].begin(); it != sj["op_weights"].end();
           ++it) {
        const double w = it.value().get<double>();
        if (w < 0.0)
          throw ConfigError("config.synthesis.op_weights." + it.key() +
                            ": negative weight");
        c.synthesis.op_weights[it.key()] = w;
      }
    }
    if (sj.contains("quota")) {
      const auto& qj = sj["quota"];
      detail::reject_unknown_keys(
          qj, {"ambiguous", "non_ambiguous", "per_domain"},
          "config.synthesis.quota");
      c.quota.ambiguous = qj.value("ambiguous", c.quota.ambiguous);
      c.quota.non_ambiguous = qj.value("non_ambiguous", c.quota.non_ambiguous);
      if (qj.contains("per_domain"))
        for (auto it = qj["per_domain"].begin(); it != qj["per_domain"].end();
             ++it)
          c.quota.per_domain[it.key()] = it.value().get<int>();
    }
  }

  if (j.contains("client")) {
    const auto& cj = j["client"];
    detail::reject_unknown_keys(cj,
                                {"mode", "stub_path", "base_url", "path",
                                 "model", "auth_env", "timeout_s",
                                 "max_retries", "parallelism"},
                                "config.client");
    c.client.mode = cj.value("mode", c.client.mode);
    if (c.client.mode != "offline" && c.client.mode != "stub" &&
        c.client.mode != "http")
      throw ConfigError("config.client.mode: expected offline|stub|http, got '" +
                        c.client.mode + "'");
    c.client.stub_path = cj.value("stub_path", c.client.stub_path);
    c.client.base_url = cj.value("base_url", c.client.base_url);
    c.client.path = cj.value("path", c.client.path);
    c.client.model = cj.value("model", c.client.model);
    c.client.auth_env = cj.value("auth_env", c.client.auth_env);
    c.client.timeout_s = cj.value("timeout_s", c.client.timeout_s);
    c.client.max_retries = cj.value("max_retries", c.client.max_retries);
    c.client.parallelism = cj.value("parallelism", c.client.parallelism);
    if (c.client.mode == "stub" && c.client.stub_path.empty())
      throw ConfigError("config.client.stub_path: required in stub mode");
    if (c.client.mode == "http" && c.client.base_url.empty())
      throw ConfigError("config.client.base_url: required in http mode");
  }

  c.prompts_dir = j.value("prompts_dir", c.prompts_dir);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.strict_filter = j.value("strict_filter", c.strict_filter);
  c.workers = j.value("workers", c.workers);
  if (c.workers < 1) throw ConfigError("config.workers: must be >= 1");
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return config_from_json(j);
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json sj{{"seed", c.synthesis.seed},
                    {"min_steps", c.synthesis.min_steps},
                    {"max_steps", c.synthesis.max_steps},
                    {"candidate_pool", c.synthesis.candidate_pool},
                    {"max_attempts_per_plan", c.synthesis.max_attempts_per_plan},
                    {"max_answer_size", c.synthesis.max_answer_size},
                    {"quota",
                     {{"ambiguous", c.quota.ambiguous},
                      {"non_ambiguous", c.quota.non_ambiguous},
                      {"per_domain", c.quota.per_domain}}}};
  if (!c.synthesis.op_weights.empty()) sj["op_weights"] = c.synthesis.op_weights;
  nlohmann::json cj{{"mode", c.client.mode},
                    {"timeout_s", c.client.timeout_s},
                    {"max_retries", c.client.max_retries},
                    {"parallelism", c.client.parallelism}};
  if (!c.client.stub_path.empty()) cj["stub_path"] = c.client.stub_path;
  if (!c.client.base_url.empty()) {
    cj["base_url"] = c.client.base_url;
    cj["path"] = c.client.path;
    cj["model"] = c.client.model;
    cj["auth_env"] = c.client.auth_env;
  }
  nlohmann::json gj{{"schema", c.graph.schema},
                    {"entities", c.graph.entities},
                    {"triples", c.graph.triples}};
  if (!c.graph.attributes.empty()) gj["attributes"] = c.graph.attributes;
  if (!c.graph.ambiguity.empty()) gj["ambiguity"] = c.graph.ambiguity;
  return {{"graph", gj},           {"synthesis", sj},
          {"client", cj},          {"prompts_dir", c.prompts_dir},
          {"out_dir", c.out_dir},  {"strict_filter", c.strict_filter},
          {"workers", c.workers}};
}

}  // namespace kgqa
