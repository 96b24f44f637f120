#include "eegbg/llm_client.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "eegbg/errors.hpp"

namespace eegbg {

using nlohmann::json;

std::string MockLlmClient::send(const std::string& prompt, const LlmParams&) {
    prompts_seen_.push_back(prompt);
    if (fail_times_ > 0) {
        --fail_times_;
        throw TransportError("mock transport failure", 503);
    }
    auto it = by_prompt_.find(prompt);
    if (it != by_prompt_.end()) return it->second;
    if (next_ < queue_.size()) return queue_[next_++];
    if (!default_.empty()) return default_;
    throw TransportError("mock client has no canned response for this prompt");
}

HttpLlmClient::HttpLlmClient(const LlmProviderConfig& cfg) : cfg_(cfg) {
    if (cfg_.api_key_env.empty())
        throw ConfigError("provider " + cfg_.name + ": api_key_env is not configured");
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (!key || !*key)
        throw ConfigError("provider " + cfg_.name + ": credential environment variable " +
                          cfg_.api_key_env + " is not set");
    api_key_ = key;
}

std::string HttpLlmClient::send(const std::string& prompt, const LlmParams& params) {
    json body = {
        {"model", cfg_.model},
        {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
        {"temperature", params.temperature},
        {"max_tokens", params.max_tokens},
    };
    const std::string payload = body.dump();

    std::string attempt_log;
    double backoff = cfg_.backoff_initial_s;
    for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
        httplib::Client client(cfg_.base_url);
        client.set_connection_timeout(cfg_.timeout_s, 0);
        client.set_read_timeout(cfg_.timeout_s, 0);
        client.set_bearer_token_auth(api_key_);

        auto res = client.Post(cfg_.path, payload, "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            try {
                json parsed = json::parse(res->body);
                return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception& e) {
                throw TransportError("provider " + cfg_.name +
                                     ": unexpected response shape: " + e.what());
            }
        }

        int status = res ? res->status : 0;
        std::string reason =
            res ? ("HTTP " + std::to_string(status)) : httplib::to_string(res.error());
        attempt_log += "attempt " + std::to_string(attempt) + ": " + reason + "; ";
        const bool retryable = !res || status == 429 || status >= 500;
        if (!retryable)
            throw TransportError("provider " + cfg_.name + ": " + reason, status);
        if (attempt < cfg_.max_attempts) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2.0;
        }
    }
    throw TransportError("provider " + cfg_.name + ": transport failed after " +
                         std::to_string(cfg_.max_attempts) + " attempts (" + attempt_log + ")");
}

struct LlmThrottle::Impl {
    std::mutex mu;
    std::condition_variable cv;
    int available;
};

LlmThrottle::LlmThrottle(int max_inflight) : impl_(std::make_unique<Impl>()) {
    impl_->available = max_inflight > 0 ? max_inflight : 1;
}
LlmThrottle::~LlmThrottle() = default;

void LlmThrottle::acquire() {
    std::unique_lock lock(impl_->mu);
    impl_->cv.wait(lock, [&] { return impl_->available > 0; });
    --impl_->available;
}

void LlmThrottle::release() {
    {
        std::scoped_lock lock(impl_->mu);
        ++impl_->available;
    }
    impl_->cv.notify_one();
}

}  // namespace eegbg
