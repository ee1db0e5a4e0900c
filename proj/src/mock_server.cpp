#include "lexclass/mock_server.hpp"

#include <chrono>
#include <fstream>

#include <fmt/format.h>
#include <httplib.h>

#include "lexclass/error.hpp"
#include "text_util.hpp"

namespace lexclass {

namespace {

int optional_int(const nlohmann::json& row, const char* key) {
    if (!row.contains(key) || row.at(key).is_null()) return 0;
    return row.at(key).get<int>();
}

std::string completion_body(const std::string& model, const std::string& content, std::size_t seq) {
    nlohmann::ordered_json j;
    j["id"] = fmt::format("mock-{}", seq);
    j["object"] = "chat.completion";
    j["model"] = model;
    j["choices"] = nlohmann::ordered_json::array(
        {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}, {"finish_reason", "stop"}}});
    return j.dump();
}

std::string error_body(int status, std::string_view message) {
    return nlohmann::json{{"error", {{"code", status}, {"message", message}}}}.dump();
}

}  // namespace

MockFixture MockFixture::parse(std::string_view jsonl) {
    MockFixture fixture;
    std::size_t line_no = 0;
    for (auto line : detail::split(jsonl, '\n')) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        try {
            const auto row = nlohmann::json::parse(line);
            MockRule rule;
            rule.substring = row.at("match").at("substring").get<std::string>();
            rule.response = row.at("response").get<std::string>();
            rule.latency_ms = optional_int(row, "latency_ms");
            rule.fail_times = optional_int(row, "fail_times");
            if (row.contains("status") && !row.at("status").is_null()) rule.status = row.at("status").get<int>();
            if (rule.latency_ms < 0 || rule.fail_times < 0) throw Error(ErrorCode::kParse, "negative latency or fail_times");
            fixture.rules.push_back(std::move(rule));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::kParse, fmt::format("mock fixture line {}: {}", line_no, e.what()));
        } catch (const Error& e) {
            throw Error(ErrorCode::kParse, fmt::format("mock fixture line {}: {}", line_no, e.what()));
        }
    }
    return fixture;
}

MockFixture MockFixture::load(const std::filesystem::path& path) { return parse(detail::read_file(path)); }

nlohmann::json MockRequestRecord::to_json() const {
    nlohmann::ordered_json j;
    j["sequence"] = sequence;
    j["model"] = model;
    j["system"] = system;
    j["user"] = user;
    j["matched_rule"] = matched_rule;
    j["status"] = status;
    j["response"] = response;
    return j;
}

MockServer::MockServer(MockFixture fixture, MockOptions options)
    : fixture_(std::move(fixture)), options_(std::move(options)), server_(std::make_unique<httplib::Server>()),
      hits_(fixture_.rules.size(), 0) {
    const int threads = std::max(1, options_.threads);
    server_->new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
    // The library default sets SO_REUSEPORT, which lets a second server share a busy port silently.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    if (options_.log_path) detail::write_file(*options_.log_path, "");
    install_routes();
}

MockServer::~MockServer() { stop(); }

void MockServer::install_routes() {
    server_->Post(R"((.*)/chat/completions)", [this](const httplib::Request& req, httplib::Response& res) {
        const int now = ++in_flight_;
        for (int prev = max_in_flight_.load(); now > prev && !max_in_flight_.compare_exchange_weak(prev, now);) {
        }

        MockRequestRecord record;
        std::string haystack;
        try {
            const auto body = nlohmann::json::parse(req.body);
            record.model = body.value("model", "");
            for (const auto& m : body.at("messages")) {
                const auto role = m.at("role").get<std::string>();
                const auto content = m.at("content").get<std::string>();
                (role == "system" ? record.system : record.user) += content;
                haystack += content;
                haystack += '\n';
            }
        } catch (const nlohmann::json::exception& e) {
            res.status = 400;
            res.set_content(error_body(400, e.what()), "application/json");
            --in_flight_;
            return;
        }

        int latency = 0;
        {
            std::lock_guard lock(mutex_);
            record.sequence = log_.size();
            for (std::size_t i = 0; i < fixture_.rules.size(); ++i) {
                if (haystack.find(fixture_.rules[i].substring) != std::string::npos) {
                    record.matched_rule = static_cast<int>(i);
                    break;
                }
            }
            if (record.matched_rule >= 0) {
                const auto idx = static_cast<std::size_t>(record.matched_rule);
                const auto& rule = fixture_.rules[idx];
                const int hit = ++hits_[idx];
                latency = rule.latency_ms;
                if (rule.status) {
                    record.status = *rule.status;
                } else if (hit <= rule.fail_times) {
                    record.status = 500;
                } else {
                    record.status = 200;
                    record.response = rule.response;
                }
            } else if (options_.default_response) {
                record.status = 200;
                record.response = *options_.default_response;
            } else {
                record.status = 404;
            }
            log_.push_back(record);
            if (options_.log_path) {
                std::ofstream out(*options_.log_path, std::ios::app);
                out << record.to_json().dump() << '\n';
            }
        }

        if (latency > 0) std::this_thread::sleep_for(std::chrono::milliseconds(latency));
        res.status = record.status;
        if (record.status == 200) {
            res.set_content(completion_body(record.model, record.response, record.sequence), "application/json");
        } else {
            res.set_content(error_body(record.status, record.status == 404 ? "no fixture matched" : "injected failure"),
                            "application/json");
        }
        --in_flight_;
    });
}

int MockServer::start(int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port(options_.host);
        if (port_ <= 0) throw Error(ErrorCode::kIo, "mock server could not bind an ephemeral port");
    } else {
        if (!server_->bind_to_port(options_.host, port)) {
            throw Error(ErrorCode::kIo, fmt::format("mock server cannot bind {}:{} (port in use?)", options_.host, port));
        }
        port_ = port;
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void MockServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

void MockServer::wait() {
    if (thread_.joinable()) thread_.join();
}

std::string MockServer::base_url() const { return fmt::format("http://{}:{}/v1", options_.host, port_); }

std::vector<MockRequestRecord> MockServer::requests() const {
    std::lock_guard lock(mutex_);
    return log_;
}

void MockServer::reset_counters() {
    std::lock_guard lock(mutex_);
    std::fill(hits_.begin(), hits_.end(), 0);
    log_.clear();
    max_in_flight_ = in_flight_.load();
}

}  // namespace lexclass
