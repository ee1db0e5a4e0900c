#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace httplib {
class Server;
}

namespace lexclass {

/// One fixture line:
/// {"match": {"substring": str}, "response": str, "latency_ms": int|null,
///  "fail_times": int|null, "status": int|null}
/// `fail_times` makes the first N matching requests answer 500; `status`
/// (an extension for error-path tests) makes every matching request answer
/// with that status.
struct MockRule {
    std::string substring;
    std::string response;
    int latency_ms = 0;
    int fail_times = 0;
    std::optional<int> status;
};

struct MockFixture {
    std::vector<MockRule> rules;

    static MockFixture parse(std::string_view jsonl);
    static MockFixture load(const std::filesystem::path& path);
};

struct MockOptions {
    /// Answer for unmatched requests; unset means 404.
    std::optional<std::string> default_response;
    std::optional<std::filesystem::path> log_path;
    std::string host = "127.0.0.1";
    int threads = 16;
};

struct MockRequestRecord {
    std::size_t sequence = 0;
    std::string model;
    std::string system;
    std::string user;
    int matched_rule = -1;
    int status = 0;
    std::string response;

    nlohmann::json to_json() const;
};

/// Deterministic chat-completions endpoint for offline runs. Matches the first
/// rule whose substring occurs in the concatenated message contents.
class MockServer {
public:
    explicit MockServer(MockFixture fixture, MockOptions options = {});
    ~MockServer();

    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    /// Binds and starts serving in the background; port 0 picks a free port.
    /// Returns the bound port. Throws Error(kIo) when the port is taken.
    int start(int port = 0);
    void stop();
    /// Blocks until stop() is called from another thread or a signal handler.
    void wait();

    int port() const { return port_; }
    std::string base_url() const;

    std::vector<MockRequestRecord> requests() const;
    int max_in_flight() const { return max_in_flight_.load(); }
    void reset_counters();

private:
    void install_routes();

    MockFixture fixture_;
    MockOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;

    mutable std::mutex mutex_;
    std::vector<int> hits_;
    std::vector<MockRequestRecord> log_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> max_in_flight_{0};
};

}  // namespace lexclass
