#pragma once

// Chat-completion client interface.  Library stages depend only on this
// interface; concrete backends are an HTTP adapter (http_chat.hpp), a stub
// replaying canned responses from a JSONL fixture (tests and offline
// smoke runs), and an always-failing offline client.

#include <atomic>
#include <map>
#include <string>

#include <json.hpp>

#include "kgqa/errors.hpp"
#include "kgqa/util.hpp"

namespace kgqa {

struct ChatRequest {
  // Lookup key of the form "<op>:<id>", e.g. "translate:q000001"; stubs use
  // it to select a canned response.
  std::string key;
  std::string system;
  std::string user;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Returns the assistant message text; throws ClientError on transport or
  // protocol failure.
  virtual std::string complete(const ChatRequest& request) = 0;
  int calls() const { return calls_.load(); }

 protected:
  std::atomic<int> calls_{0};
};

// Replays canned responses.  Lookup order: exact key, then "<op>:*".
class StubChatClient : public ChatClient {
 public:
  explicit StubChatClient(std::map<std::string, std::string> responses)
      : responses_(std::move(responses)) {}

  StubChatClient(
      std::initializer_list<std::map<std::string, std::string>::value_type>
          responses)
      : responses_(responses) {}

  // Fixture format: one {"key": ..., "response": ...} object per line.
  static StubChatClient from_file(const std::string& path) {
    return StubChatClient(read_stub_file(path));
  }

  static std::map<std::string, std::string> read_stub_file(
      const std::string& path) {
    std::map<std::string, std::string> responses;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(read_file(path))) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": " +
                         e.what());
      }
      if (!j.is_object() || !j.contains("key") || !j.contains("response"))
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": expected {\"key\", \"response\"}");
      responses[j["key"].get<std::string>()] =
          j["response"].get<std::string>();
    }
    return responses;
  }

  std::string complete(const ChatRequest& request) override {
    calls_.fetch_add(1);
    if (auto it = responses_.find(request.key); it != responses_.end())
      return it->second;
    const auto colon = request.key.find(':');
    if (colon != std::string::npos) {
      const std::string fallback = request.key.substr(0, colon + 1) + "*";
      if (auto it = responses_.find(fallback); it != responses_.end())
        return it->second;
    }
    throw ClientError("no stub response for key '" + request.key + "'");
  }

 private:
  std::map<std::string, std::string> responses_;
};

class OfflineChatClient : public ChatClient {
 public:
  std::string complete(const ChatRequest& request) override {
    calls_.fetch_add(1);
    throw ClientError("offline mode: refusing chat call '" + request.key +
                      "'");
  }
};

}  // namespace kgqa
