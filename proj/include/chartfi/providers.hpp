#pragma once

// Provider-agnostic chat and embedding clients with on-disk response caching,
// retry handling and a shared in-flight limit, plus mock providers.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "chartfi/digest.hpp"
#include "chartfi/error.hpp"

namespace chartfi {

using json = nlohmann::json;

struct ImageData {
  std::string mime_type;
  std::string bytes;
};

/// Reads an image file and checks that it is a recognised image container.
inline ImageData load_image(const std::string& path) {
  ImageData img;
  img.bytes = read_file_bytes(path);
  auto mime = detect_image_mime(img.bytes);
  if (!mime) throw ValidationError("'" + path + "' is not a decodable image", "image");
  img.mime_type = *mime;
  return img;
}

inline ImageData make_image(std::string bytes) {
  auto mime = detect_image_mime(bytes);
  if (!mime) throw ValidationError("image bytes are not a decodable image", "image");
  return ImageData{*mime, std::move(bytes)};
}

enum class ResponseFormat { FreeText, Json };

struct ChatRequest {
  std::string model_id;
  std::string system_prompt;
  std::string user_text;
  std::vector<ImageData> images;
  ResponseFormat response_format = ResponseFormat::FreeText;
  double temperature = 0.0;
  double top_p = 1.0;
};

struct ChatResponse {
  std::string text;
  json provider_meta = json::object();
};

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dimension() const { return values.size(); }
};

/// Canonical request document: the basis of the cache key and of the wire payload.
inline json request_payload(const ChatRequest& req) {
  json images = json::array();
  for (const auto& img : req.images) {
    images.push_back({{"mime_type", img.mime_type}, {"data", base64_encode(img.bytes)}});
  }
  return json{{"model_id", req.model_id},
              {"system_prompt", req.system_prompt},
              {"user_text", req.user_text},
              {"images", std::move(images)},
              {"response_format", req.response_format == ResponseFormat::Json ? "json" : "text"},
              {"temperature", req.temperature},
              {"top_p", req.top_p}};
}

inline std::string request_cache_key(const ChatRequest& req) {
  return sha256_hex(req.model_id + "\n" + request_payload(req).dump());
}

/// Strips a surrounding markdown code fence, then parses. nullopt when not JSON.
inline std::optional<json> parse_json_text(std::string_view text) {
  std::string body(text);
  const auto fence = body.find("```");
  if (fence != std::string::npos) {
    auto start = body.find('\n', fence);
    auto end = body.rfind("```");
    if (start != std::string::npos && end != std::string::npos && end > start) {
      body = body.substr(start + 1, end - start - 1);
    }
  }
  json parsed = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) return std::nullopt;
  return parsed;
}

// ---------------------------------------------------------------------------
// Provider interfaces

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  /// One raw round trip. Throws ProviderError on failure.
  virtual ChatResponse complete(const ChatRequest& req) = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
  virtual std::string model_id() const = 0;
};

// ---------------------------------------------------------------------------
// Cache

/// One file per request hash: `<hash>.resp` holds the raw response bytes and
/// `<hash>.json` a sidecar with the timestamp and model id. Writes go through a
/// temporary file and a rename. A default-constructed cache is disabled.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  bool enabled() const { return !dir_.empty(); }
  const std::filesystem::path& dir() const { return dir_; }

  std::optional<std::string> get(const std::string& key) const {
    if (!enabled()) return std::nullopt;
    std::ifstream in(dir_ / (key + ".resp"), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void put(const std::string& key, std::string_view bytes, const std::string& model_id) const {
    if (!enabled()) return;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    json sidecar{{"timestamp", std::chrono::duration_cast<std::chrono::seconds>(now).count()},
                 {"model_id", model_id}};
    write_atomic(dir_ / (key + ".json"), sidecar.dump());
    write_atomic(dir_ / (key + ".resp"), bytes);
  }

 private:
  static void write_atomic(const std::filesystem::path& target, std::string_view bytes) {
    static std::atomic<unsigned long> counter{0};
    std::ostringstream tmp_name;
    tmp_name << target.filename().string() << ".tmp." << std::this_thread::get_id() << "."
             << counter.fetch_add(1);
    const auto tmp = target.parent_path() / tmp_name.str();
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write cache file " + tmp.string());
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp, target);
  }

  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// Concurrency and retries

/// Bounds the number of in-flight provider calls shared by every client.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(std::size_t limit = 4) : available_(limit == 0 ? 1 : limit) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      ++available_;
    }
    cv_.notify_one();
  }

  class Slot {
   public:
    explicit Slot(ConcurrencyLimiter* l) : l_(l) {
      if (l_) l_->acquire();
    }
    ~Slot() {
      if (l_) l_->release();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    ConcurrencyLimiter* l_;
  };

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t available_;
};

struct RetryPolicy {
  int max_attempts = 3;       // transport / rate-limit attempts per call
  int json_max_attempts = 3;  // attempts until a JSON-mode reply parses
  std::chrono::milliseconds base_delay{500};
  double jitter = 0.25;       // fraction of the delay added at random
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

namespace detail {

template <typename Fn>
auto with_transport_retries(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  thread_local std::mt19937 rng{std::random_device{}()};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const ProviderError& e) {
      if (!e.retryable() || attempt >= policy.max_attempts) throw;
      const double scale = std::ldexp(1.0, attempt - 1) * (1.0 + policy.jitter * unit(rng));
      const auto delay = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(policy.base_delay.count()) * scale));
      spdlog::warn("provider call failed ({}), retrying in {} ms", e.what(), delay.count());
      if (policy.sleep) policy.sleep(delay);
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Clients

/// Chat completion with caching, retries and JSON-mode enforcement.
class ChatClient {
 public:
  explicit ChatClient(std::shared_ptr<ChatProvider> provider, ResponseCache cache = {},
                      RetryPolicy retry = {}, std::shared_ptr<ConcurrencyLimiter> limiter = nullptr)
      : provider_(std::move(provider)),
        cache_(std::move(cache)),
        retry_(std::move(retry)),
        limiter_(std::move(limiter)) {}

  /// In JSON mode a reply that does not parse is re-requested up to
  /// json_max_attempts times; the last raw text is attached to the error.
  ChatResponse chat_complete(const ChatRequest& req) {
    if (!(req.temperature >= 0.0)) throw ValidationError("temperature must be >= 0", "temperature");
    if (!(req.top_p > 0.0 && req.top_p <= 1.0)) throw ValidationError("top_p must be in (0,1]", "top_p");
    const bool want_json = req.response_format == ResponseFormat::Json;
    const std::string key = request_cache_key(req);
    if (auto cached = cache_.get(key)) {
      if (!want_json || parse_json_text(*cached)) {
        return ChatResponse{*cached, json{{"cache", "hit"}, {"model_id", req.model_id}}};
      }
    }

    const int json_attempts = want_json ? std::max(1, retry_.json_max_attempts) : 1;
    std::string last_text;
    for (int attempt = 1; attempt <= json_attempts; ++attempt) {
      ChatResponse resp = detail::with_transport_retries(retry_, [&] {
        ConcurrencyLimiter::Slot slot(limiter_.get());
        ++provider_calls_;
        return provider_->complete(req);
      });
      if (resp.text.empty()) {
        throw ProviderError(ProviderErrorKind::Rejected, "provider returned an empty reply");
      }
      if (want_json && !parse_json_text(resp.text)) {
        last_text = std::move(resp.text);
        spdlog::warn("reply for model {} is not JSON (attempt {}/{})", req.model_id, attempt,
                     json_attempts);
        continue;
      }
      cache_.put(key, resp.text, req.model_id);
      resp.provider_meta["cache"] = "miss";
      resp.provider_meta["json_retries"] = attempt - 1;
      resp.provider_meta["model_id"] = req.model_id;
      return resp;
    }
    throw ProviderError(ProviderErrorKind::MalformedJson,
                        "reply is not valid JSON after " + std::to_string(json_attempts) +
                            " attempts",
                        last_text);
  }

  /// Number of requests that reached the provider (cache hits excluded).
  std::size_t provider_calls() const { return provider_calls_.load(); }

 private:
  std::shared_ptr<ChatProvider> provider_;
  ResponseCache cache_;
  RetryPolicy retry_;
  std::shared_ptr<ConcurrencyLimiter> limiter_;
  std::atomic<std::size_t> provider_calls_{0};
};

/// Text embedding with a read-through memory cache backed by the disk cache.
class EmbeddingClient {
 public:
  explicit EmbeddingClient(std::shared_ptr<EmbeddingProvider> provider, ResponseCache cache = {},
                           RetryPolicy retry = {},
                           std::shared_ptr<ConcurrencyLimiter> limiter = nullptr)
      : provider_(std::move(provider)),
        cache_(std::move(cache)),
        retry_(std::move(retry)),
        limiter_(std::move(limiter)) {}

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw ValidationError("embed needs at least one text", "texts");
    for (const auto& t : texts) {
      if (t.empty()) throw ValidationError("embed texts must be non-empty", "texts");
    }
    std::vector<std::optional<EmbeddingVector>> out(texts.size());
    std::vector<std::string> missing;
    std::vector<std::size_t> missing_at;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (auto hit = lookup(texts[i])) {
        out[i] = std::move(*hit);
      } else {
        missing.push_back(texts[i]);
        missing_at.push_back(i);
      }
    }
    if (!missing.empty()) {
      auto fresh = detail::with_transport_retries(retry_, [&] {
        ConcurrencyLimiter::Slot slot(limiter_.get());
        ++provider_calls_;
        return provider_->embed(missing);
      });
      if (fresh.size() != missing.size()) {
        throw ProviderError(ProviderErrorKind::Rejected, "embedding count does not match inputs");
      }
      for (std::size_t k = 0; k < fresh.size(); ++k) {
        check_vector(fresh[k]);
        store(missing[k], fresh[k]);
        out[missing_at[k]] = std::move(fresh[k]);
      }
    }
    std::vector<EmbeddingVector> result;
    result.reserve(out.size());
    for (auto& v : out) result.push_back(std::move(*v));
    for (const auto& v : result) {
      if (v.dimension() != result.front().dimension()) {
        throw ProviderError(ProviderErrorKind::Rejected, "embeddings have mixed dimensions");
      }
    }
    return result;
  }

  EmbeddingVector embed_one(const std::string& text) { return embed({text}).front(); }

  std::size_t provider_calls() const { return provider_calls_.load(); }

 private:
  std::string key_for(const std::string& text) const {
    return sha256_hex("embedding\n" + provider_->model_id() + "\n" + text);
  }

  static void check_vector(const EmbeddingVector& v) {
    if (v.values.empty()) throw ProviderError(ProviderErrorKind::Rejected, "empty embedding");
    for (double x : v.values) {
      if (!std::isfinite(x)) throw ProviderError(ProviderErrorKind::Rejected, "non-finite embedding");
    }
  }

  std::optional<EmbeddingVector> lookup(const std::string& text) {
    const std::string key = key_for(text);
    {
      std::lock_guard lock(mu_);
      if (auto it = memory_.find(key); it != memory_.end()) return it->second;
    }
    if (auto bytes = cache_.get(key)) {
      auto parsed = json::parse(*bytes, nullptr, false);
      if (!parsed.is_discarded() && parsed.is_array()) {
        EmbeddingVector v{parsed.get<std::vector<double>>()};
        std::lock_guard lock(mu_);
        memory_.emplace(key, v);
        return v;
      }
    }
    return std::nullopt;
  }

  void store(const std::string& text, const EmbeddingVector& v) {
    const std::string key = key_for(text);
    cache_.put(key, json(v.values).dump(), provider_->model_id());
    std::lock_guard lock(mu_);
    memory_.emplace(key, v);
  }

  std::shared_ptr<EmbeddingProvider> provider_;
  ResponseCache cache_;
  RetryPolicy retry_;
  std::shared_ptr<ConcurrencyLimiter> limiter_;
  std::mutex mu_;
  std::unordered_map<std::string, EmbeddingVector> memory_;
  std::atomic<std::size_t> provider_calls_{0};
};

/// Cosine similarity clamped to [-1, 1]. Throws on dimension mismatch or a zero vector.
inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw ValidationError("cosine_similarity: dimension mismatch", "dimension");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine_similarity: zero vector", "values");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Mock providers

struct MockReply {
  std::string text;
  std::optional<ProviderErrorKind> error;  // when set, the call throws instead
};

/// Replays a script of replies (the last one repeats) or delegates to a
/// responder. Every request is captured for inspection.
class MockChatProvider : public ChatProvider {
 public:
  using Responder = std::function<std::string(const ChatRequest&)>;

  explicit MockChatProvider(std::vector<MockReply> script) : script_(std::move(script)) {}
  explicit MockChatProvider(Responder responder) : responder_(std::move(responder)) {}
  static std::shared_ptr<MockChatProvider> canned(std::string reply) {
    return std::make_shared<MockChatProvider>(std::vector<MockReply>{{std::move(reply), {}}});
  }

  ChatResponse complete(const ChatRequest& req) override {
    MockReply reply;
    {
      std::lock_guard lock(mu_);
      captured_.push_back(req);
      if (responder_) {
        reply.text = responder_(req);
      } else if (!script_.empty()) {
        reply = script_[std::min(next_, script_.size() - 1)];
        ++next_;
      }
    }
    if (reply.error) throw ProviderError(*reply.error, "mock provider failure");
    return ChatResponse{std::move(reply.text), json{{"provider", "mock"}}};
  }

  std::vector<ChatRequest> captured() const {
    std::lock_guard lock(mu_);
    return captured_;
  }
  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return captured_.size();
  }

 private:
  mutable std::mutex mu_;
  std::vector<MockReply> script_;
  std::size_t next_ = 0;
  Responder responder_;
  std::vector<ChatRequest> captured_;
};

/// Known texts map to fixed vectors; unknown texts get a deterministic
/// pseudo-random vector derived from their hash.
class MockEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit MockEmbeddingProvider(std::map<std::string, std::vector<double>> table = {},
                                 std::size_t dimension = 8)
      : table_(std::move(table)), dimension_(dimension) {
    for (const auto& [text, v] : table_) dimension_ = v.size();
  }

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    calls_.fetch_add(1);
    std::vector<EmbeddingVector> out;
    for (const auto& t : texts) {
      if (auto it = table_.find(t); it != table_.end()) {
        out.push_back({it->second});
        continue;
      }
      const std::string h = sha256_hex(t);
      std::seed_seq seq(h.begin(), h.end());
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> nd;
      EmbeddingVector v;
      for (std::size_t i = 0; i < dimension_; ++i) v.values.push_back(nd(rng));
      out.push_back(std::move(v));
    }
    return out;
  }

  std::string model_id() const override { return "mock-embedding"; }
  std::size_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, std::vector<double>> table_;
  std::size_t dimension_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace chartfi
