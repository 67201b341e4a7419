#pragma once

// HTTP chat-completion backend speaking the common
// POST {base_url}{path} {"model", "messages": [...]} protocol.  Kept in its
// own header because httplib is heavy to compile; only the CLI includes it.

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "kgqa/chat.hpp"
#include "kgqa/log.hpp"

namespace kgqa {

struct HttpChatConfig {
  std::string base_url;  // e.g. "https://api.example.com"
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string auth_env = "KGQA_API_KEY";  // env var holding the bearer token
  double timeout_s = 60.0;
  int max_retries = 3;
  // JSON pointer to the assistant text within the response body.
  std::string content_pointer = "/choices/0/message/content";
};

class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(HttpChatConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty())
      throw ConfigError("http chat client requires base_url");
  }

  std::string complete(const ChatRequest& request) override {
    calls_.fetch_add(1);
    nlohmann::json body{
        {"model", config_.model},
        {"messages",
         {{{"role", "system"}, {"content", request.system}},
          {{"role", "user"}, {"content", request.user}}}}};
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0)
        std::this_thread::sleep_for(
            std::chrono::milliseconds(250 * (1 << (attempt - 1))));
      try {
        return post_once(payload);
      } catch (const ClientError& e) {
        last_error = e.what();
        log(LogLevel::Warn, "chat call '" + request.key + "' attempt " +
                                std::to_string(attempt + 1) + " failed: " +
                                last_error);
      }
    }
    throw ClientError("chat call '" + request.key + "' failed after " +
                      std::to_string(config_.max_retries + 1) +
                      " attempts: " + last_error);
  }

 private:
  std::string post_once(const std::string& payload) {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(config_.timeout_s * 1000)));
    client.set_read_timeout(
        std::chrono::milliseconds(static_cast<int>(config_.timeout_s * 1000)));
    httplib::Headers headers;
    if (const char* token = std::getenv(config_.auth_env.c_str());
        token && *token)
      headers.emplace("Authorization", std::string("Bearer ") + token);

    auto result = client.Post(config_.path, headers, payload,
                              "application/json");
    if (!result)
      throw ClientError("transport error: " +
                        httplib::to_string(result.error()));
    if (result->status < 200 || result->status >= 300)
      throw ClientError("http status " + std::to_string(result->status));

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ClientError(std::string("response is not JSON: ") + e.what());
    }
    const auto pointer = nlohmann::json::json_pointer(config_.content_pointer);
    if (!j.contains(pointer) || !j[pointer].is_string())
      throw ClientError("response lacks text at " + config_.content_pointer);
    return j[pointer].get<std::string>();
  }

  HttpChatConfig config_;
};

}  // namespace kgqa
