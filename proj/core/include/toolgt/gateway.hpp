#pragma once

// Completion backends: a live chat-completions endpoint, and a cassette that
// records live traffic or replays it without touching the network.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "toolgt/errors.hpp"
#include "toolgt/templates.hpp"

namespace toolgt {

struct CompletionRequest {
    Messages messages;
    std::string model;
    double temperature = 0.0;
    int max_tokens = 2048;
};

/// Throws ConfigError: empty messages, first role not system/user,
/// negative temperature, non-positive max_tokens.
void validate(const CompletionRequest& request);

/// Lower-case hex SHA-256 over the canonical JSON of messages, model and
/// temperature. max_tokens is deliberately not part of the key.
std::string fingerprint(const CompletionRequest& request);

class NetworkError : public Error {
public:
    using Error::Error;
};

class CassetteMiss : public Error {
public:
    explicit CassetteMiss(std::string fingerprint)
        : Error("cassette miss for request " + fingerprint), fingerprint_(std::move(fingerprint)) {}
    const std::string& fingerprint() const { return fingerprint_; }

private:
    std::string fingerprint_;
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual std::string complete(const CompletionRequest& request) = 0;
};

struct CassetteEntry {
    std::string fingerprint;
    std::string model;
    double temperature = 0.0;
    int max_tokens = 0;
    Messages messages;
    std::string response;
};

/// Thread-safe fingerprint -> response map backed by one JSON file.
class Cassette {
public:
    static constexpr int kVersion = 1;

    Cassette() = default;
    Cassette(const Cassette&) = delete;
    Cassette& operator=(const Cassette&) = delete;

    /// Missing file yields an empty cassette when `allow_missing`, else
    /// FormatError. Unknown versions are a FormatError.
    static std::unique_ptr<Cassette> load(const std::filesystem::path& path, bool allow_missing);

    std::optional<std::string> find(std::string_view fingerprint) const;
    void put(CassetteEntry entry);
    std::size_t size() const;

    nlohmann::ordered_json to_json() const;
    /// Writes to a sibling temp file and renames over `path`.
    void save(const std::filesystem::path& path) const;

private:
    mutable std::mutex mu_;
    std::map<std::string, CassetteEntry, std::less<>> entries_;
};

struct HttpResponse {
    long status = 0;
    std::string body;
};

class Transport {
public:
    virtual ~Transport() = default;
    /// Throws NetworkError when no HTTP response was obtained.
    virtual HttpResponse post(const std::string& url, const std::vector<std::string>& headers,
                              const std::string& body) = 0;
};

/// libcurl-backed HTTPS transport.
class CurlTransport : public Transport {
public:
    explicit CurlTransport(std::chrono::seconds timeout = std::chrono::seconds(120));
    HttpResponse post(const std::string& url, const std::vector<std::string>& headers,
                      const std::string& body) override;

private:
    std::chrono::seconds timeout_;
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

/// Enforces a minimum spacing of 60s / rpm between request starts.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_minute, SleepFn sleep = {});
    void acquire();

private:
    std::mutex mu_;
    std::chrono::steady_clock::duration spacing_{};
    std::chrono::steady_clock::time_point next_{};
    SleepFn sleep_;
};

struct LiveConfig {
    std::string url;
    std::string api_key;
    int max_attempts = 5;
    std::chrono::milliseconds base_delay{1000};
    double backoff_factor = 2.0;
    /// 0 disables rate limiting.
    double requests_per_minute = 0.0;
};

/// Reads FORGE_API_URL and FORGE_API_KEY.
LiveConfig live_config_from_env();

class LiveBackend : public CompletionBackend {
public:
    LiveBackend(LiveConfig config, std::shared_ptr<Transport> transport, SleepFn sleep = {});
    std::string complete(const CompletionRequest& request) override;

    static std::string request_body(const CompletionRequest& request);
    /// Assistant text from a chat-completions response. Throws NetworkError.
    static std::string response_text(std::string_view body);

private:
    LiveConfig config_;
    std::shared_ptr<Transport> transport_;
    SleepFn sleep_;
    RateLimiter limiter_;
};

/// Serves cassette hits; forwards misses to `upstream` and records them.
/// The file is rewritten every `save_every` new entries, on flush, and on
/// destruction.
class RecordBackend : public CompletionBackend {
public:
    RecordBackend(std::filesystem::path path, std::unique_ptr<CompletionBackend> upstream,
                  std::size_t save_every = 50);
    ~RecordBackend() override;
    std::string complete(const CompletionRequest& request) override;
    void flush();

private:
    std::filesystem::path path_;
    std::unique_ptr<Cassette> cassette_;
    std::unique_ptr<CompletionBackend> upstream_;
    std::size_t save_every_;
    std::mutex save_mu_;
    std::size_t unsaved_ = 0;
};

class ReplayBackend : public CompletionBackend {
public:
    explicit ReplayBackend(std::unique_ptr<Cassette> cassette);
    explicit ReplayBackend(const std::filesystem::path& path);
    /// Throws CassetteMiss.
    std::string complete(const CompletionRequest& request) override;

private:
    std::unique_ptr<Cassette> cassette_;
};

enum class BackendMode { Live, Record, Replay };

struct BackendSpec {
    BackendMode mode = BackendMode::Live;
    std::filesystem::path cassette;
};

/// "live", "record:PATH" or "replay:PATH". Throws ConfigError.
BackendSpec parse_backend_spec(std::string_view text);

std::unique_ptr<CompletionBackend> make_backend(const BackendSpec& spec, const LiveConfig& live);

enum class JudgeLabel { CanReplace, TotallyIncorrect, Unparseable };

std::string_view to_string(JudgeLabel label);

struct JudgeVerdict {
    JudgeLabel label = JudgeLabel::Unparseable;
    std::string raw;
};

inline constexpr std::string_view kCanReplaceLabel = "CAN REPLACE GROUND TRUTH";
inline constexpr std::string_view kTotallyIncorrectLabel = "TOTALLY INCORRECT";

/// Case-sensitive search for the two labels; exactly one must appear.
JudgeVerdict parse_judge_label(std::string_view text);

}  // namespace toolgt
