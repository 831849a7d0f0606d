#include "toolgt/gateway.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <curl/curl.h>

#include "toolgt/digest.hpp"

namespace toolgt {

namespace {

using ojson = nlohmann::ordered_json;

ojson messages_to_json(const Messages& messages) {
    ojson out = ojson::array();
    for (const auto& m : messages) out.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    return out;
}

Messages messages_from_json(const ojson& json) {
    Messages out;
    for (const auto& m : json) {
        const auto role = m.at("role").get<std::string>();
        Role r = Role::User;
        if (role == "system") {
            r = Role::System;
        } else if (role == "assistant") {
            r = Role::Assistant;
        } else if (role != "user") {
            throw FormatError("cassette: unknown role '" + role + "'");
        }
        out.push_back({r, m.at("content").get<std::string>()});
    }
    return out;
}

void default_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

std::once_flag curl_init_once;

size_t curl_write(char* data, size_t size, size_t count, void* user) {
    static_cast<std::string*>(user)->append(data, size * count);
    return size * count;
}

}  // namespace

void validate(const CompletionRequest& request) {
    if (request.messages.empty()) throw ConfigError("completion request has no messages");
    if (request.messages.front().role == Role::Assistant) {
        throw ConfigError("completion request must start with a system or user message");
    }
    if (!(request.temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (request.max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

std::string fingerprint(const CompletionRequest& request) {
    ojson key;
    key["messages"] = messages_to_json(request.messages);
    key["model"] = request.model;
    key["temperature"] = request.temperature;
    return sha256_hex(key.dump());
}

std::unique_ptr<Cassette> Cassette::load(const std::filesystem::path& path, bool allow_missing) {
    auto cassette = std::make_unique<Cassette>();
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (allow_missing && !std::filesystem::exists(path)) return cassette;
        throw FormatError("cannot read cassette " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        const auto doc = ojson::parse(buffer.str());
        const int version = doc.at("version").get<int>();
        if (version != kVersion) {
            throw FormatError("cassette " + path.string() + ": unsupported version " + std::to_string(version));
        }
        for (const auto& e : doc.at("entries")) {
            CassetteEntry entry;
            entry.fingerprint = e.at("fingerprint").get<std::string>();
            entry.model = e.value("model", "");
            entry.temperature = e.value("temperature", 0.0);
            entry.max_tokens = e.value("max_tokens", 0);
            if (e.contains("messages")) entry.messages = messages_from_json(e.at("messages"));
            entry.response = e.at("response").get<std::string>();
            cassette->entries_.insert_or_assign(entry.fingerprint, std::move(entry));
        }
    } catch (const ojson::exception& e) {
        throw FormatError("cassette " + path.string() + ": " + e.what());
    }
    return cassette;
}

std::optional<std::string> Cassette::find(std::string_view fingerprint) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(fingerprint);
    if (it == entries_.end()) return std::nullopt;
    return it->second.response;
}

void Cassette::put(CassetteEntry entry) {
    std::lock_guard lock(mu_);
    auto key = entry.fingerprint;
    entries_.insert_or_assign(std::move(key), std::move(entry));
}

std::size_t Cassette::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

nlohmann::ordered_json Cassette::to_json() const {
    std::lock_guard lock(mu_);
    ojson entries = ojson::array();
    for (const auto& [fp, e] : entries_) {
        entries.push_back({
            {"fingerprint", e.fingerprint},
            {"model", e.model},
            {"temperature", e.temperature},
            {"max_tokens", e.max_tokens},
            {"messages", messages_to_json(e.messages)},
            {"response", e.response},
        });
    }
    return {{"version", kVersion}, {"entries", std::move(entries)}};
}

void Cassette::save(const std::filesystem::path& path) const {
    const std::string text = to_json().dump(2) + "\n";
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write cassette " + tmp.string());
        out << text;
        if (!out.flush()) throw Error("cannot write cassette " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

CurlTransport::CurlTransport(std::chrono::seconds timeout) : timeout_(timeout) {
    std::call_once(curl_init_once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

HttpResponse CurlTransport::post(const std::string& url, const std::vector<std::string>& headers,
                                 const std::string& body) {
    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
    if (!curl) throw NetworkError("curl_easy_init failed");

    curl_slist* list = nullptr;
    for (const auto& h : headers) list = curl_slist_append(list, h.c_str());
    std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> header_guard(list, &curl_slist_free_all);

    HttpResponse response;
    curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_HTTPHEADER, list);
    curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDS, body.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDSIZE_LARGE, static_cast<curl_off_t>(body.size()));
    curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &curl_write);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &response.body);
    curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT, static_cast<long>(timeout_.count()));
    curl_easy_setopt(curl.get(), CURLOPT_NOSIGNAL, 1L);

    const CURLcode rc = curl_easy_perform(curl.get());
    if (rc != CURLE_OK) throw NetworkError(std::string("HTTP request failed: ") + curl_easy_strerror(rc));
    curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &response.status);
    return response;
}

RateLimiter::RateLimiter(double requests_per_minute, SleepFn sleep)
    : sleep_(sleep ? std::move(sleep) : SleepFn(default_sleep)) {
    if (requests_per_minute > 0.0) {
        spacing_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(60.0 / requests_per_minute));
    }
}

void RateLimiter::acquire() {
    if (spacing_ == std::chrono::steady_clock::duration::zero()) return;
    std::chrono::steady_clock::time_point slot;
    const auto now = std::chrono::steady_clock::now();
    {
        std::lock_guard lock(mu_);
        slot = std::max(now, next_);
        next_ = slot + spacing_;
    }
    if (slot > now) sleep_(std::chrono::ceil<std::chrono::milliseconds>(slot - now));
}

LiveConfig live_config_from_env() {
    LiveConfig config;
    if (const char* url = std::getenv("FORGE_API_URL")) config.url = url;
    if (const char* key = std::getenv("FORGE_API_KEY")) config.api_key = key;
    return config;
}

LiveBackend::LiveBackend(LiveConfig config, std::shared_ptr<Transport> transport, SleepFn sleep)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleep_(sleep ? std::move(sleep) : SleepFn(default_sleep)),
      limiter_(config_.requests_per_minute, sleep_) {
    if (config_.url.empty()) throw ConfigError("live backend needs an endpoint URL (FORGE_API_URL)");
    if (config_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    if (!transport_) transport_ = std::make_shared<CurlTransport>();
}

std::string LiveBackend::request_body(const CompletionRequest& request) {
    ojson body;
    body["model"] = request.model;
    body["messages"] = messages_to_json(request.messages);
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    return body.dump();
}

std::string LiveBackend::response_text(std::string_view body) {
    try {
        const auto doc = ojson::parse(body);
        const auto& content = doc.at("choices").at(0).at("message").at("content");
        if (content.is_null()) return {};
        return content.get<std::string>();
    } catch (const ojson::exception& e) {
        throw NetworkError(std::string("malformed completion response: ") + e.what());
    }
}

std::string LiveBackend::complete(const CompletionRequest& request) {
    validate(request);
    const std::string body = request_body(request);
    std::vector<std::string> headers{"Content-Type: application/json"};
    if (!config_.api_key.empty()) headers.push_back("Authorization: Bearer " + config_.api_key);

    std::string last_error;
    auto delay = config_.base_delay;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            sleep_(delay);
            delay = std::chrono::milliseconds(
                static_cast<std::chrono::milliseconds::rep>(std::llround(delay.count() * config_.backoff_factor)));
        }
        limiter_.acquire();
        HttpResponse response;
        try {
            response = transport_->post(config_.url, headers, body);
        } catch (const NetworkError& e) {
            last_error = e.what();
            continue;
        }
        if (response.status >= 200 && response.status < 300) return response_text(response.body);
        last_error = "HTTP " + std::to_string(response.status) + ": " + response.body.substr(0, 200);
        if (response.status != 429 && response.status < 500) throw NetworkError(last_error);
    }
    throw NetworkError("giving up after " + std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

RecordBackend::RecordBackend(std::filesystem::path path, std::unique_ptr<CompletionBackend> upstream,
                             std::size_t save_every)
    : path_(std::move(path)),
      cassette_(Cassette::load(path_, true)),
      upstream_(std::move(upstream)),
      save_every_(save_every == 0 ? 1 : save_every) {}

RecordBackend::~RecordBackend() {
    try {
        flush();
    } catch (...) {
    }
}

std::string RecordBackend::complete(const CompletionRequest& request) {
    validate(request);
    const std::string fp = fingerprint(request);
    if (auto hit = cassette_->find(fp)) return *hit;

    std::string response = upstream_->complete(request);
    cassette_->put(CassetteEntry{fp, request.model, request.temperature, request.max_tokens, request.messages,
                                 response});
    std::lock_guard lock(save_mu_);
    if (++unsaved_ >= save_every_) {
        cassette_->save(path_);
        unsaved_ = 0;
    }
    return response;
}

void RecordBackend::flush() {
    std::lock_guard lock(save_mu_);
    if (unsaved_ == 0 && std::filesystem::exists(path_)) return;
    cassette_->save(path_);
    unsaved_ = 0;
}

ReplayBackend::ReplayBackend(std::unique_ptr<Cassette> cassette) : cassette_(std::move(cassette)) {
    if (!cassette_) cassette_ = std::make_unique<Cassette>();
}

ReplayBackend::ReplayBackend(const std::filesystem::path& path) : cassette_(Cassette::load(path, false)) {}

std::string ReplayBackend::complete(const CompletionRequest& request) {
    validate(request);
    const std::string fp = fingerprint(request);
    if (auto hit = cassette_->find(fp)) return *hit;
    throw CassetteMiss(fp);
}

BackendSpec parse_backend_spec(std::string_view text) {
    if (text == "live") return {BackendMode::Live, {}};
    const auto colon = text.find(':');
    if (colon != std::string_view::npos && colon + 1 < text.size()) {
        const auto mode = text.substr(0, colon);
        std::filesystem::path path(std::string(text.substr(colon + 1)));
        if (mode == "record") return {BackendMode::Record, path};
        if (mode == "replay") return {BackendMode::Replay, path};
    }
    throw ConfigError("backend must be live, record:PATH or replay:PATH (got '" + std::string(text) + "')");
}

std::unique_ptr<CompletionBackend> make_backend(const BackendSpec& spec, const LiveConfig& live) {
    switch (spec.mode) {
        case BackendMode::Live:
            return std::make_unique<LiveBackend>(live, nullptr);
        case BackendMode::Record:
            // The upstream is built lazily so fully recorded runs need no endpoint.
            struct LazyLive : CompletionBackend {
                explicit LazyLive(LiveConfig c) : config(std::move(c)) {}
                std::string complete(const CompletionRequest& request) override {
                    std::call_once(once, [&] { backend = std::make_unique<LiveBackend>(config, nullptr); });
                    return backend->complete(request);
                }
                LiveConfig config;
                std::once_flag once;
                std::unique_ptr<LiveBackend> backend;
            };
            return std::make_unique<RecordBackend>(spec.cassette, std::make_unique<LazyLive>(live));
        case BackendMode::Replay:
            return std::make_unique<ReplayBackend>(spec.cassette);
    }
    throw ConfigError("unknown backend mode");
}

std::string_view to_string(JudgeLabel label) {
    switch (label) {
        case JudgeLabel::CanReplace: return "CanReplace";
        case JudgeLabel::TotallyIncorrect: return "TotallyIncorrect";
        case JudgeLabel::Unparseable: return "Unparseable";
    }
    return "Unparseable";
}

JudgeVerdict parse_judge_label(std::string_view text) {
    const bool can_replace = text.find(kCanReplaceLabel) != std::string_view::npos;
    const bool incorrect = text.find(kTotallyIncorrectLabel) != std::string_view::npos;
    JudgeVerdict verdict;
    verdict.raw = std::string(text);
    if (can_replace != incorrect) verdict.label = can_replace ? JudgeLabel::CanReplace : JudgeLabel::TotallyIncorrect;
    return verdict;
}

}  // namespace toolgt
