#pragma once

#include <memory>
#include <string>
#include <vector>

#include "farrkit/errors.hpp"

namespace farrkit {

enum class Role { System, User, Assistant };

std::string to_string(Role r);
Role role_from_string(const std::string& s);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct EndpointConfig {
    std::string base_url;     // e.g. http://127.0.0.1:8080/v1
    std::string model_id;
    std::string api_key_env;  // env var *name*; empty = no auth header
    double temperature = 0.0;
    int max_tokens = 1024;
    double timeout_s = 60.0;
    int max_retries = 3;
    int max_inflight = 4;
    std::string system_prompt;  // empty = no system message
};

enum class CacheMode { Live, Record, Replay };

std::string to_string(CacheMode m);
CacheMode cache_mode_from_string(const std::string& s);

// SHA-256 hex over the canonical JSON of (base_url, model_id, messages,
// temperature, max_tokens).
std::string cache_digest(const EndpointConfig& cfg,
                         const std::vector<ChatMessage>& messages);

std::string sha256_hex(const std::string& bytes);

// POST {base_url}/chat/completions; returns the first choice's message
// content. Retries 5xx/timeouts with exponential backoff up to
// cfg.max_retries. Throws EndpointError / AuthError / ProtocolError.
std::string send_chat(const EndpointConfig& cfg,
                      const std::vector<ChatMessage>& messages);

// Record: cache hit returns stored response, miss calls send_chat and
// persists one JSON file named by digest. Replay: miss throws CacheMiss,
// never touches the network. Live: bypasses the cache.
std::string cached_send(const std::string& cache_dir, CacheMode mode,
                        const EndpointConfig& cfg,
                        const std::vector<ChatMessage>& messages);

// What harness/judging talk to, so tests can script a model.
class ChatClient {
  public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
    virtual std::string model_id() const = 0;
    virtual std::string system_prompt() const { return ""; }
};

// Real endpoint, optionally cache-backed, with a bounded in-flight budget.
class EndpointClient : public ChatClient {
  public:
    explicit EndpointClient(EndpointConfig cfg,
                            CacheMode mode = CacheMode::Live,
                            std::string cache_dir = "");
    ~EndpointClient() override;

    std::string complete(const std::vector<ChatMessage>& messages) override;
    std::string model_id() const override { return cfg_.model_id; }
    std::string system_prompt() const override { return cfg_.system_prompt; }

  private:
    EndpointConfig cfg_;
    CacheMode mode_;
    std::string cache_dir_;
    struct Gate;
    std::unique_ptr<Gate> gate_;
};

}  // namespace farrkit
