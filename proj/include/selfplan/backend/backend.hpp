// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "selfplan/core/error.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace selfplan {

/// Inference endpoint binding. `endpoint` is either an OpenAI-compatible base
/// URL (`http://host:port/v1`) or `scripted://<path>` for a scripted backend.
struct BackendConfig {
    std::string endpoint;
    std::string model_id;
    std::optional<std::string> adapter_id;  // sent as the served model name when set
    double temperature = 0.7;
    double top_p = 1.0;
    int max_new_tokens = 512;
    std::vector<std::string> stop_sequences{"Observation"};
    std::chrono::milliseconds timeout{60000};
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{500};  // first delay; doubles per retry
    std::string api_key_env;                       // name of the credential variable, may be empty
    int parallelism = 4;                           // in-flight request bound

    /// Name sent on the wire.
    const std::string& served_model() const { return adapter_id ? *adapter_id : model_id; }
    void validate() const;
};

struct SamplingOverrides {
    std::optional<double> temperature;
    std::optional<double> top_p;
    std::optional<int> max_new_tokens;
    std::optional<std::vector<std::string>> stop_sequences;
};

struct CompletionRequest {
    std::string prompt;
    SamplingOverrides overrides;
};

struct UsageStats {
    std::uint64_t calls = 0;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
};

class BackendError : public Error {
public:
    using Error::Error;
};

class TransportError : public BackendError {
public:
    using BackendError::BackendError;
};

class EndpointError : public BackendError {
public:
    EndpointError(int status, const std::string& body);
    int status() const noexcept { return status_; }

private:
    int status_;
};

class TimeoutError : public BackendError {
public:
    using BackendError::BackendError;
};

class EmptyCompletion : public BackendError {
public:
    using BackendError::BackendError;
};

class ScriptExhausted : public BackendError {
public:
    using BackendError::BackendError;
};

/// Uniform completion interface. Implementations are safe for concurrent use.
class Backend {
public:
    virtual ~Backend() = default;

    /// Generated text cut at the first stop sequence.
    virtual std::string complete(const CompletionRequest& request) = 0;
    virtual const BackendConfig& config() const = 0;
    virtual UsageStats usage() const = 0;

    std::string complete(std::string prompt) { return complete(CompletionRequest{std::move(prompt), {}}); }
};

/// Cuts `text` at the earliest occurrence of any stop sequence.
std::string truncate_at_stop(std::string text, std::span<const std::string> stops);

/// Whitespace-token count; the scripted backend's usage estimate.
std::uint64_t approx_tokens(std::string_view text) noexcept;

/// Thread-safe usage counters shared by implementations.
class UsageCounter {
public:
    void record(std::uint64_t prompt_tokens, std::uint64_t completion_tokens) noexcept;
    UsageStats snapshot() const noexcept;

private:
    std::atomic<std::uint64_t> calls_{0};
    std::atomic<std::uint64_t> prompt_{0};
    std::atomic<std::uint64_t> completion_{0};
};

/// Builds a backend for `config`. Relative `scripted://` paths resolve
/// against `base_dir`.
std::shared_ptr<Backend> make_backend(const BackendConfig& config, const std::filesystem::path& base_dir = {});

/// One recorded model call.
struct Exchange {
    std::string label;
    std::string prompt;
    std::string response;
};

/// Ordered call log shared by several backends.
class Transcript {
public:
    void append(Exchange exchange);
    std::vector<Exchange> entries() const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::vector<Exchange> entries_;
};

/// Decorator that records every call into a shared transcript under a label.
class RecordingBackend : public Backend {
public:
    RecordingBackend(std::shared_ptr<Backend> inner, std::string label, std::shared_ptr<Transcript> transcript);

    using Backend::complete;
    std::string complete(const CompletionRequest& request) override;
    const BackendConfig& config() const override { return inner_->config(); }
    UsageStats usage() const override { return inner_->usage(); }

private:
    std::shared_ptr<Backend> inner_;
    std::string label_;
    std::shared_ptr<Transcript> transcript_;
};

} // namespace selfplan
