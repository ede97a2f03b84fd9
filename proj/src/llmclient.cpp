#include "farrkit/llmclient.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <semaphore>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "internal_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace farrkit {

std::string to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(const std::string& s) {
    if (s == "system") return Role::System;
    if (s == "user") return Role::User;
    if (s == "assistant") return Role::Assistant;
    throw ProtocolError("unknown chat role: " + s);
}

std::string to_string(CacheMode m) {
    switch (m) {
        case CacheMode::Live: return "live";
        case CacheMode::Record: return "record";
        case CacheMode::Replay: return "replay";
    }
    return "live";
}

CacheMode cache_mode_from_string(const std::string& s) {
    if (s == "live") return CacheMode::Live;
    if (s == "record") return CacheMode::Record;
    if (s == "replay") return CacheMode::Replay;
    throw ConfigError("unknown cache mode: " + s);
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw FarrkitError("SHA-256 digest failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

namespace {

json messages_json(const std::vector<ChatMessage>& messages) {
    json arr = json::array();
    for (const auto& m : messages)
        arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    return arr;
}

void split_base_url(const std::string& base_url, std::string& origin,
                    std::string& prefix) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw EndpointError("base_url must include a scheme: " + base_url);
    auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        origin = base_url;
        prefix.clear();
    } else {
        origin = base_url.substr(0, path_start);
        prefix = base_url.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
}

std::string api_key(const EndpointConfig& cfg) {
    if (cfg.api_key_env.empty()) return "";
    const char* v = std::getenv(cfg.api_key_env.c_str());
    if (!v || !*v)
        throw AuthError("environment variable " + cfg.api_key_env +
                        " is not set");
    return v;
}

}  // namespace

std::string cache_digest(const EndpointConfig& cfg,
                         const std::vector<ChatMessage>& messages) {
    json key = {{"base_url", cfg.base_url},
                {"model_id", cfg.model_id},
                {"messages", messages_json(messages)},
                {"temperature", cfg.temperature},
                {"max_tokens", cfg.max_tokens}};
    return sha256_hex(key.dump());
}

std::string send_chat(const EndpointConfig& cfg,
                      const std::vector<ChatMessage>& messages) {
    std::string origin, prefix;
    split_base_url(cfg.base_url, origin, prefix);
    std::string path = prefix + "/chat/completions";
    std::string key = api_key(cfg);

    json body_json = {{"model", cfg.model_id},
                      {"messages", messages_json(messages)},
                      {"temperature", cfg.temperature},
                      {"max_tokens", cfg.max_tokens}};
    std::string body = body_json.dump();

    httplib::Client cli(origin);
    time_t sec = (time_t)cfg.timeout_s;
    time_t usec = (time_t)((cfg.timeout_s - (double)sec) * 1e6);
    cli.set_connection_timeout(sec, usec);
    cli.set_read_timeout(sec, usec);
    cli.set_write_timeout(sec, usec);

    httplib::Headers headers;
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

    std::string last_error;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0) {
            int ms = std::min(2000, 100 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::milliseconds(ms));
        }
        auto res = cli.Post(path, headers, body, "application/json");
        if (!res) {  // transport failure or timeout: retryable
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403)
            throw AuthError("HTTP " + std::to_string(res->status) + " from " +
                            cfg.base_url);
        if (res->status >= 500) {  // server-side: retryable
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw EndpointError("HTTP " + std::to_string(res->status) +
                                " from " + cfg.base_url + ": " + res->body);
        json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") ||
            !j["choices"].is_array() || j["choices"].empty())
            throw ProtocolError("response from " + cfg.base_url +
                                " has no choices");
        const json& choice = j["choices"][0];
        if (!choice.contains("message") ||
            !choice["message"].contains("content") ||
            !choice["message"]["content"].is_string())
            throw ProtocolError("choice from " + cfg.base_url +
                                " has no message content");
        return choice["message"]["content"].get<std::string>();
    }
    throw EndpointError("retries exhausted calling " + cfg.base_url + path +
                        " (" + last_error + ")");
}

std::string cached_send(const std::string& cache_dir, CacheMode mode,
                        const EndpointConfig& cfg,
                        const std::vector<ChatMessage>& messages) {
    if (mode == CacheMode::Live) return send_chat(cfg, messages);
    if (cache_dir.empty())
        throw ConfigError("cache_dir is required in record/replay mode");

    std::string digest = cache_digest(cfg, messages);
    fs::path file = fs::path(cache_dir) / (digest + ".json");
    if (fs::exists(file)) {
        json entry = json::parse(detail::read_file(file), nullptr, false);
        if (entry.is_discarded() || !entry.contains("response") ||
            !entry["response"].is_string())
            throw IoError("corrupt cache entry " + file.string());
        return entry["response"].get<std::string>();
    }
    if (mode == CacheMode::Replay)
        throw CacheMiss("no cache entry for model " + cfg.model_id +
                        " (digest " + digest + ")");

    std::string response = send_chat(cfg, messages);
    json entry = {{"digest", digest},
                  {"model_id", cfg.model_id},
                  {"messages", messages_json(messages)},
                  {"temperature", cfg.temperature},
                  {"max_tokens", cfg.max_tokens},
                  {"response", response},
                  {"created_at", detail::iso_utc_now()}};
    detail::write_file_atomic(file, entry.dump(2) + "\n");
    return response;
}

struct EndpointClient::Gate {
    std::counting_semaphore<4096> slots;
    explicit Gate(int n) : slots(std::clamp(n, 1, 4096)) {}
};

EndpointClient::EndpointClient(EndpointConfig cfg, CacheMode mode,
                               std::string cache_dir)
    : cfg_(std::move(cfg)),
      mode_(mode),
      cache_dir_(std::move(cache_dir)),
      gate_(std::make_unique<Gate>(cfg_.max_inflight)) {}

EndpointClient::~EndpointClient() = default;

std::string EndpointClient::complete(const std::vector<ChatMessage>& messages) {
    gate_->slots.acquire();
    struct Release {
        std::counting_semaphore<4096>& s;
        ~Release() { s.release(); }
    } release{gate_->slots};
    return cached_send(cache_dir_, mode_, cfg_, messages);
}

}  // namespace farrkit
