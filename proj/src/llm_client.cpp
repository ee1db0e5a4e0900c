#include "lexclass/llm_client.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "lexclass/digest.hpp"
#include "lexclass/error.hpp"

namespace lexclass {

namespace {

bool retryable_status(int status) { return status == 429 || status >= 500; }

std::string bearer_token(const EndpointConfig& config) {
    if (config.api_key_env.empty()) return {};
    const char* value = std::getenv(config.api_key_env.c_str());
    if (value == nullptr || *value == '\0') {
        throw Error(ErrorCode::kConfig,
                    fmt::format("environment variable {} (api_key_env) is not set", config.api_key_env));
    }
    return value;
}

void check_target(const EndpointConfig& config, const ParsedUrl& url) {
    if (config.loopback_only && !is_loopback_host(url.host)) {
        throw Error(ErrorCode::kConfig,
                    fmt::format("refusing non-loopback endpoint host '{}' in a mock-backed run", url.host));
    }
}

}  // namespace

void EndpointConfig::validate() const {
    if (parallelism < 1) throw Error(ErrorCode::kConfig, "parallelism must be at least 1");
    if (max_retries < 0) throw Error(ErrorCode::kConfig, "max_retries must be non-negative");
    if (temperature < 0.0) throw Error(ErrorCode::kConfig, "temperature must be non-negative");
    if (max_tokens < 1) throw Error(ErrorCode::kConfig, "max_tokens must be positive");
    if (timeout.count() <= 0) throw Error(ErrorCode::kConfig, "timeout must be positive");
    parse_base_url(base_url);
}

ParsedUrl parse_base_url(const std::string& url) {
    ParsedUrl out;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::kConfig, fmt::format("base_url '{}' has no scheme", url));
    out.scheme = url.substr(0, scheme_end);
    if (out.scheme != "http" && out.scheme != "https") {
        throw Error(ErrorCode::kConfig, fmt::format("unsupported scheme '{}' in base_url", out.scheme));
    }
    std::string rest = url.substr(scheme_end + 3);
    const auto slash = rest.find('/');
    std::string authority = rest.substr(0, slash);
    out.path_prefix = slash == std::string::npos ? "" : rest.substr(slash);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();

    out.port = out.scheme == "https" ? 443 : 80;
    if (!authority.empty() && authority.front() == '[') {  // [::1]:8080
        const auto close = authority.find(']');
        if (close == std::string::npos) throw Error(ErrorCode::kConfig, "unterminated IPv6 host in base_url");
        out.host = authority.substr(1, close - 1);
        if (close + 1 < authority.size() && authority[close + 1] == ':') out.port = std::stoi(authority.substr(close + 2));
    } else if (const auto colon = authority.rfind(':'); colon != std::string::npos) {
        out.host = authority.substr(0, colon);
        try {
            out.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::kConfig, fmt::format("bad port in base_url '{}'", url));
        }
    } else {
        out.host = authority;
    }
    if (out.host.empty()) throw Error(ErrorCode::kConfig, fmt::format("base_url '{}' has no host", url));
    return out;
}

bool is_loopback_host(const std::string& host) {
    return host == "localhost" || host == "::1" || host.starts_with("127.");
}

nlohmann::json CompletionExchange::to_json() const {
    nlohmann::ordered_json j;
    j["request_id"] = request_id;
    j["system"] = system;
    j["user"] = user;
    j["response_text"] = response_text;
    j["latency_ms"] = latency.count();
    j["attempt_count"] = attempt_count;
    j["http_status"] = http_status;
    j["endpoint_error"] = endpoint_error ? nlohmann::ordered_json(*endpoint_error) : nlohmann::ordered_json(nullptr);
    return j;
}

nlohmann::json chat_request_body(const EndpointConfig& config, const std::string& system, const std::string& user) {
    nlohmann::json messages = nlohmann::json::array();
    if (!system.empty()) messages.push_back({{"role", "system"}, {"content", system}});
    messages.push_back({{"role", "user"}, {"content", user}});
    return {{"model", config.model_name},
            {"messages", messages},
            {"temperature", config.temperature},
            {"max_tokens", config.max_tokens},
            {"stream", false}};
}

std::string chat_response_content(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        return content.is_null() ? std::string{} : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kParse, std::string("malformed chat-completions response: ") + e.what());
    }
}

CompletionExchange complete(const EndpointConfig& config, const std::string& system, const std::string& user,
                            std::string request_id) {
    config.validate();
    const auto url = parse_base_url(config.base_url);
    check_target(config, url);
    const std::string token = bearer_token(config);

    CompletionExchange ex;
    ex.request_id = request_id.empty() ? "req-" + fnv1a_hex(system + '\x1f' + user) : std::move(request_id);
    ex.system = system;
    ex.user = user;

    const std::string body = chat_request_body(config, system, user).dump();
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

    const auto started = std::chrono::steady_clock::now();
    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(config.backoff_base * (1LL << (attempt - 1)));
        ex.attempt_count = attempt + 1;

        httplib::Client client(fmt::format("{}://{}:{}", url.scheme, url.host, url.port));
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());

        auto res = client.Post(url.path_prefix + "/chat/completions", headers, body, "application/json");
        if (!res) {
            ex.http_status = 0;
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        ex.http_status = res->status;
        if (res->status == 200) {
            try {
                ex.response_text = chat_response_content(res->body);
                ex.endpoint_error.reset();
            } catch (const Error& e) {
                ex.endpoint_error = e.what();
            }
            ex.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
            return ex;
        }
        last_error = fmt::format("HTTP {}", res->status);
        if (!retryable_status(res->status)) {
            ex.endpoint_error = last_error + " (not retryable)";
            ex.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
            return ex;
        }
    }
    ex.endpoint_error = fmt::format("retries exhausted after {} attempts; last: {}", ex.attempt_count, last_error);
    ex.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    return ex;
}

std::vector<CompletionExchange> classify_batch(const EndpointConfig& config, const std::vector<CompletionJob>& jobs) {
    config.validate();
    check_target(config, parse_base_url(config.base_url));
    bearer_token(config);

    std::vector<CompletionExchange> results(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
            const auto& job = jobs[i];
            try {
                results[i] = complete(config, job.system, job.user, job.request_id);
            } catch (const std::exception& e) {
                auto& ex = results[i];
                ex.request_id = job.request_id;
                ex.system = job.system;
                ex.user = job.user;
                ex.endpoint_error = e.what();
            }
        }
    };

    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), jobs.size());
    if (workers <= 1) {
        worker();
        return results;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    pool.clear();  // joins
    return results;
}

}  // namespace lexclass
