#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lexclass {

struct EndpointConfig {
    /// Everything before "/chat/completions", e.g. "http://127.0.0.1:11434/v1".
    std::string base_url = "http://127.0.0.1:11434/v1";
    std::string model_name = "llama3";
    double temperature = 0.0;
    int max_tokens = 64;
    std::chrono::milliseconds timeout{60000};
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{500};
    int parallelism = 1;
    /// Name of the environment variable holding the bearer token; empty = no auth.
    std::string api_key_env;
    /// Refuse any host that is not a loopback address (set for mock-backed runs).
    bool loopback_only = false;

    void validate() const;
};

struct ParsedUrl {
    std::string scheme;
    std::string host;
    int port = 0;
    std::string path_prefix;  // without trailing '/'
};

ParsedUrl parse_base_url(const std::string& url);
bool is_loopback_host(const std::string& host);

struct CompletionExchange {
    std::string request_id;
    std::string system;
    std::string user;
    std::string response_text;
    std::chrono::milliseconds latency{0};
    int attempt_count = 0;
    int http_status = 0;  // last status seen; 0 = transport failure
    std::optional<std::string> endpoint_error;

    bool ok() const { return !endpoint_error.has_value(); }
    nlohmann::json to_json() const;
};

/// Request body in the chat-completions shape.
nlohmann::json chat_request_body(const EndpointConfig& config, const std::string& system, const std::string& user);

/// Extracts choices[0].message.content; throws Error(kParse) on any other shape.
std::string chat_response_content(const std::string& body);

/// One chat completion with retries. Timeouts, transport errors, 429 and 5xx
/// are retried after backoff_base * 2^attempt; any other non-200 fails at
/// once. Endpoint failures are reported in the exchange, not thrown. Throws
/// Error(kConfig) when api_key_env names an unset variable or the host
/// violates loopback_only.
CompletionExchange complete(const EndpointConfig& config, const std::string& system, const std::string& user,
                            std::string request_id = {});

struct CompletionJob {
    std::string request_id;
    std::string system;
    std::string user;
};

/// Runs jobs on min(parallelism, jobs) workers. Output order equals input
/// order; a failing job never aborts the batch.
std::vector<CompletionExchange> classify_batch(const EndpointConfig& config, const std::vector<CompletionJob>& jobs);

}  // namespace lexclass
