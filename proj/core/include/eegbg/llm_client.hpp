#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace eegbg {

struct LlmParams {
    double temperature = 0.0;
    int max_tokens = 2048;
};

// Provider-agnostic chat interface. Implementations must be safe to call from
// multiple threads.
class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual std::string send(const std::string& prompt, const LlmParams& params) = 0;
    virtual std::string model_id() const = 0;
};

// Deterministic test double: replays canned responses. Exact prompt matches
// win; otherwise responses are served in sequence order; otherwise the
// default response. Optionally fails the first `fail_times` calls with a
// transport error to exercise retry paths.
class MockLlmClient : public LlmClient {
public:
    explicit MockLlmClient(std::string model = "mock") : model_(std::move(model)) {}

    std::string send(const std::string& prompt, const LlmParams& params) override;
    std::string model_id() const override { return model_; }

    void set_response(const std::string& prompt, const std::string& response) {
        by_prompt_[prompt] = response;
    }
    void enqueue(const std::string& response) { queue_.push_back(response); }
    void set_default(const std::string& response) { default_ = response; }
    void fail_first(int times) { fail_times_ = times; }

    const std::vector<std::string>& prompts_seen() const { return prompts_seen_; }

private:
    std::string model_;
    std::map<std::string, std::string> by_prompt_;
    std::vector<std::string> queue_;
    std::size_t next_ = 0;
    std::string default_;
    int fail_times_ = 0;
    std::vector<std::string> prompts_seen_;
};

struct LlmProviderConfig {
    std::string name;
    std::string base_url;  // e.g. https://api.example.com
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env;
    int max_attempts = 3;
    double backoff_initial_s = 0.5;  // doubled per retry
    int timeout_s = 60;
};

// HTTP JSON chat-completion client (OpenAI-style wire format). Retries
// transport failures, 429 and 5xx responses with exponential backoff up to
// max_attempts; other non-success statuses raise TransportError immediately.
// Throws ConfigError at construction when the credential env var is unset.
class HttpLlmClient : public LlmClient {
public:
    explicit HttpLlmClient(const LlmProviderConfig& cfg);
    std::string send(const std::string& prompt, const LlmParams& params) override;
    std::string model_id() const override { return cfg_.name + ":" + cfg_.model; }

private:
    LlmProviderConfig cfg_;
    std::string api_key_;
};

// Bounds the number of in-flight LLM calls process-wide (default 4; see
// PipelineConfig). Acquire/release around client->send.
class LlmThrottle {
public:
    explicit LlmThrottle(int max_inflight);
    ~LlmThrottle();
    void acquire();
    void release();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace eegbg
