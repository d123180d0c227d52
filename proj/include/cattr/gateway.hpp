#pragma once

// Completion backends: an OpenAI-compatible chat-completions client, three
// deterministic mocks, a concurrency limit and a content-addressed
// transcript cache.
//
// Cache layout: <cache_dir>/<sha256 digest>.json, one Transcript per file,
// written once and never rewritten.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <openssl/evp.h>

#include <httplib.h>
#include <json.hpp>

#include "cattr/dataset.hpp"
#include "cattr/error.hpp"
#include "cattr/graph.hpp"
#include "cattr/prompts.hpp"
#include "cattr/rng.hpp"

namespace cattr {

struct RetryPolicy {
  int max_attempts = 4;
  std::vector<double> backoff_seconds = {1.0, 2.0, 4.0};
};

struct RemoteBackend {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4";
  double temperature = 0.0;
  int max_tokens = 1024;
  double timeout_seconds = 120.0;
  std::string api_key_env = "OPENAI_API_KEY";
};

// Answers with the ground-truth edges. When `mapping_aware` is false it
// always uses the original names, so its answers stop matching once names
// are hidden (a model that relies on names only).
struct MockOracle {
  std::optional<CausalDag> truth;  // filled per dataset by the harness when absent
  bool mapping_aware = true;
};

struct MockRandom {
  std::uint64_t seed = 0;
  double edge_probability = 0.1;
};

// Chains the variables in presented column order.
struct MockOrderBiased {};

struct BackendSpec {
  std::variant<RemoteBackend, MockOracle, MockRandom, MockOrderBiased> kind = MockOrderBiased{};
  int concurrency = 1;
  RetryPolicy retry;
  std::string label;  // display name; derived from the kind when empty

  std::string name() const {
    if (!label.empty()) return label;
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, RemoteBackend>) return k.model;
          if constexpr (std::is_same_v<K, MockOracle>) return k.mapping_aware ? "mock_oracle" : "mock_oracle_blind";
          if constexpr (std::is_same_v<K, MockRandom>) return "mock_random_p" + format_shortest(k.edge_probability);
          if constexpr (std::is_same_v<K, MockOrderBiased>) return "mock_order_biased";
        },
        kind);
  }

  bool is_remote() const { return std::holds_alternative<RemoteBackend>(kind); }

  // Everything that can change a response; part of the prompt digest.
  nlohmann::ordered_json identity() const {
    return std::visit(
        [](const auto& k) -> nlohmann::ordered_json {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, RemoteBackend>)
            return {{"kind", "remote"},
                    {"base_url", k.base_url},
                    {"model", k.model},
                    {"temperature", k.temperature},
                    {"max_tokens", k.max_tokens}};
          if constexpr (std::is_same_v<K, MockOracle>)
            return {{"kind", "mock_oracle"},
                    {"mapping_aware", k.mapping_aware},
                    {"truth", k.truth ? to_edge_list(*k.truth) : std::string()}};
          if constexpr (std::is_same_v<K, MockRandom>)
            return {{"kind", "mock_random"}, {"seed", k.seed}, {"edge_probability", k.edge_probability}};
          if constexpr (std::is_same_v<K, MockOrderBiased>) return {{"kind", "mock_order_biased"}};
        },
        kind);
  }

  void validate() const {
    if (concurrency < 1) throw InvalidArgument("backend concurrency limit must be at least 1");
    if (retry.max_attempts < 1) throw InvalidArgument("retry max_attempts must be at least 1");
    if (auto r = std::get_if<MockRandom>(&kind))
      if (!(r->edge_probability >= 0.0 && r->edge_probability <= 1.0))
        throw InvalidArgument("mock_random edge probability outside [0, 1]");
  }
};

// Parses "oracle", "oracle:blind", "random:<p>[:<seed>]", "order-biased",
// "remote:<model>".
inline BackendSpec parse_backend(std::string_view text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  BackendSpec spec;
  const auto& k = parts[0];
  if (k == "oracle" || k == "mock_oracle") {
    MockOracle o;
    if (parts.size() > 1) {
      if (parts[1] != "blind") throw ParseError("unknown oracle option '" + parts[1] + "'");
      o.mapping_aware = false;
    }
    spec.kind = o;
  } else if (k == "random" || k == "mock_random") {
    MockRandom r;
    if (parts.size() > 1) r.edge_probability = parse_number(parts[1], 0);
    if (parts.size() > 2) r.seed = static_cast<std::uint64_t>(parse_number(parts[2], 0));
    spec.kind = r;
  } else if (k == "order-biased" || k == "mock_order_biased") {
    spec.kind = MockOrderBiased{};
  } else if (k == "remote") {
    RemoteBackend r;
    if (parts.size() < 2 || parts[1].empty()) throw ParseError("remote backend needs a model name: remote:<model>");
    r.model = parts[1];
    spec.kind = r;
  } else {
    throw ParseError("unknown backend '" + std::string(text) + "'");
  }
  spec.validate();
  return spec;
}

struct Transcript {
  std::string prompt_digest;
  std::string backend;
  std::string system_text;
  std::string user_text;
  std::string response_text;
  double latency_ms = 0.0;
  std::string timestamp;
  int attempts = 1;

  nlohmann::ordered_json to_json() const {
    return {{"prompt_digest", prompt_digest}, {"backend", backend},     {"system_text", system_text},
            {"user_text", user_text},         {"response_text", response_text}, {"latency_ms", latency_ms},
            {"timestamp", timestamp},         {"attempts", attempts}};
  }

  static Transcript from_json(const nlohmann::json& j) {
    Transcript t;
    t.prompt_digest = j.at("prompt_digest").get<std::string>();
    t.backend = j.at("backend").get<std::string>();
    t.system_text = j.at("system_text").get<std::string>();
    t.user_text = j.at("user_text").get<std::string>();
    t.response_text = j.at("response_text").get<std::string>();
    t.latency_ms = j.at("latency_ms").get<double>();
    t.timestamp = j.at("timestamp").get<std::string>();
    t.attempts = j.at("attempts").get<int>();
    return t;
  }
};

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

inline std::string prompt_digest(const PromptSpec& prompt, const BackendSpec& backend) {
  nlohmann::ordered_json j = {
      {"backend", backend.identity()}, {"system", prompt.system_text}, {"user", prompt.user_text}};
  // Mocks read these directly, so they are part of what the response depends on.
  if (!backend.is_remote()) {
    j["presented_names"] = prompt.presented_names;
    j["name_mapping"] = prompt.name_mapping;
  }
  return sha256_hex(j.dump());
}

struct HttpRequest {
  std::string url;  // full URL of the chat-completions endpoint
  std::map<std::string, std::string> headers;
  std::string body;
  double timeout_seconds = 120.0;
};

struct HttpReply {
  int status = 0;  // 0 when the transport failed
  std::string body;
  std::string transport_error;
};

using Transport = std::function<HttpReply(const HttpRequest&)>;

inline HttpReply httplib_transport(const HttpRequest& req) {
  // Split "scheme://host[:port]/path".
  auto scheme_end = req.url.find("://");
  if (scheme_end == std::string::npos) return {0, {}, "malformed URL: " + req.url};
  auto path_start = req.url.find('/', scheme_end + 3);
  std::string origin = path_start == std::string::npos ? req.url : req.url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : req.url.substr(path_start);
  httplib::Client cli(origin);
  const auto secs = static_cast<time_t>(req.timeout_seconds);
  const auto usecs = static_cast<time_t>((req.timeout_seconds - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  for (const auto& [k, v] : req.headers)
    if (k != "Content-Type") headers.emplace(k, v);
  auto res = cli.Post(path, headers, req.body, "application/json");
  if (!res) return {0, {}, httplib::to_string(res.error())};
  return {res->status, res->body, {}};
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Completion {
  std::string text;
  int attempts = 1;
  double latency_ms = 0.0;
  bool from_cache = false;
  std::string digest;
};

namespace detail {

inline std::string mock_oracle_answer(const MockOracle& o, const PromptSpec& p) {
  if (!o.truth) throw BackendError("mock_oracle has no ground truth configured");
  std::map<std::string, std::string> to_presented;
  for (const auto& [placeholder, original] : p.name_mapping) to_presented[original] = placeholder;
  auto present = [&](const std::string& n) {
    if (!o.mapping_aware) return n;
    auto it = to_presented.find(n);
    return it == to_presented.end() ? n : it->second;
  };
  std::string out;
  for (const auto& e : o.truth->edges()) out += present(e.cause) + " -> " + present(e.effect) + "\n";
  return out;
}

inline std::string mock_random_answer(const MockRandom& r, const PromptSpec& p) {
  Rng rng(derive_seed(r.seed, "mock-random", p.user_text));
  std::string out;
  const auto& names = p.presented_names;
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = 0; j < names.size(); ++j)
      if (i != j && rng.bernoulli(r.edge_probability)) out += names[i] + " -> " + names[j] + "\n";
  return out;
}

inline std::string mock_order_answer(const PromptSpec& p) {
  std::string out;
  for (std::size_t i = 0; i + 1 < p.presented_names.size(); ++i)
    out += p.presented_names[i] + " -> " + p.presented_names[i + 1] + "\n";
  return out;
}

}  // namespace detail

class Gateway {
 public:
  explicit Gateway(BackendSpec spec, Transport transport = httplib_transport)
      : spec_(std::move(spec)), transport_(std::move(transport)), free_slots_(spec_.concurrency) {
    spec_.validate();
  }

  const BackendSpec& spec() const { return spec_; }

  // Fail on any cache miss instead of calling the backend.
  void set_offline(bool offline) { offline_ = offline; }

  std::size_t backend_calls() const {
    std::lock_guard lk(stats_mu_);
    return backend_calls_;
  }

  Completion complete(const PromptSpec& prompt) {
    if (offline_) throw BackendError("offline mode: no cached transcript for this prompt");
    Slot slot(*this);
    {
      std::lock_guard lk(stats_mu_);
      ++backend_calls_;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Completion c = std::visit(
        [&](const auto& k) -> Completion {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, RemoteBackend>) return remote_complete(k, prompt);
          if constexpr (std::is_same_v<K, MockOracle>) {
            Completion r;
            r.text = detail::mock_oracle_answer(k, prompt);
            return r;
          }
          if constexpr (std::is_same_v<K, MockRandom>) {
            Completion r;
            r.text = detail::mock_random_answer(k, prompt);
            return r;
          }
          if constexpr (std::is_same_v<K, MockOrderBiased>) {
            Completion r;
            r.text = detail::mock_order_answer(prompt);
            return r;
          }
        },
        spec_.kind);
    c.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    c.digest = prompt_digest(prompt, spec_);
    return c;
  }

  // Cache hit returns the stored response; a miss calls the backend and
  // persists the transcript. A stored record whose digest disagrees with its
  // file name is an error, never silently replaced.
  Completion cached_complete(const PromptSpec& prompt, const std::filesystem::path& cache_dir) {
    const std::string digest = prompt_digest(prompt, spec_);
    const auto path = cache_dir / (digest + ".json");
    if (auto hit = read_cached(path, digest)) {
      Completion c{hit->response_text, hit->attempts, hit->latency_ms, true, digest};
      return c;
    }
    Completion c = complete(prompt);
    Transcript t{digest,           spec_.name(), prompt.system_text, prompt.user_text, c.text, c.latency_ms,
                 utc_timestamp(), c.attempts};
    persist(path, t);
    return c;
  }

  static std::optional<Transcript> read_cached(const std::filesystem::path& path, const std::string& digest) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    Transcript t;
    try {
      t = Transcript::from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
      throw CacheError("corrupt cache record " + path.string() + ": " + e.what());
    }
    if (t.prompt_digest != digest) throw CacheError("cache record " + path.string() + " holds digest " + t.prompt_digest);
    return t;
  }

 private:
  // RAII slot of the concurrency limit.
  class Slot {
   public:
    explicit Slot(Gateway& g) : g_(g) {
      std::unique_lock lk(g_.slot_mu_);
      g_.slot_cv_.wait(lk, [&] { return g_.free_slots_ > 0; });
      --g_.free_slots_;
    }
    ~Slot() {
      {
        std::lock_guard lk(g_.slot_mu_);
        ++g_.free_slots_;
      }
      g_.slot_cv_.notify_one();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    Gateway& g_;
  };

  void persist(const std::filesystem::path& path, const Transcript& t) {
    std::lock_guard lk(cache_mu_);
    std::error_code ec;
    if (std::filesystem::exists(path, ec)) return;  // another request got there first
    auto tmp = path;
    tmp += ".tmp";
    write_file(tmp, t.to_json().dump(2) + "\n");
    std::filesystem::rename(tmp, path);
  }

  static bool transient(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

  Completion remote_complete(const RemoteBackend& r, const PromptSpec& prompt) {
    const char* key = std::getenv(r.api_key_env.c_str());
    HttpRequest req;
    req.url = r.base_url;
    while (!req.url.empty() && req.url.back() == '/') req.url.pop_back();
    req.url += "/chat/completions";
    req.timeout_seconds = r.timeout_seconds;
    req.headers["Content-Type"] = "application/json";
    if (key && *key) req.headers["Authorization"] = std::string("Bearer ") + key;
    nlohmann::ordered_json body = {{"model", r.model},
                                   {"messages",
                                    {{{"role", "system"}, {"content", prompt.system_text}},
                                     {{"role", "user"}, {"content", prompt.user_text}}}},
                                   {"temperature", r.temperature},
                                   {"max_tokens", r.max_tokens}};
    req.body = body.dump();

    std::string last_error;
    for (int attempt = 1; attempt <= spec_.retry.max_attempts; ++attempt) {
      HttpReply reply = transport_(req);
      if (reply.status == 200) {
        try {
          auto j = nlohmann::json::parse(reply.body);
          const auto& content = j.at("choices").at(0).at("message").at("content");
          Completion r;
          r.text = content.is_null() ? std::string() : content.get<std::string>();
          r.attempts = attempt;
          return r;
        } catch (const nlohmann::json::exception& e) {
          throw BackendError(std::string("malformed completion reply: ") + e.what(), reply.body);
        }
      }
      last_error = reply.status == 0 ? "transport error: " + reply.transport_error
                                     : "HTTP " + std::to_string(reply.status);
      if (!transient(reply.status)) throw BackendError("completion request rejected: " + last_error, reply.body);
      if (attempt < spec_.retry.max_attempts && !spec_.retry.backoff_seconds.empty()) {
        const auto& b = spec_.retry.backoff_seconds;
        const double wait = b[std::min<std::size_t>(static_cast<std::size_t>(attempt - 1), b.size() - 1)];
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
      }
    }
    throw BackendError("completion failed after " + std::to_string(spec_.retry.max_attempts) + " attempts: " + last_error);
  }

  BackendSpec spec_;
  Transport transport_;
  bool offline_ = false;

  std::mutex slot_mu_;
  std::condition_variable slot_cv_;
  int free_slots_;

  std::mutex cache_mu_;
  mutable std::mutex stats_mu_;
  std::size_t backend_calls_ = 0;
};

}  // namespace cattr
