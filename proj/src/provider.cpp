#include "lkg/provider.hpp"

#include <httplib.h>

#include "lkg/error.hpp"
#include "lkg/text.hpp"

namespace lkg {

std::string_view to_string(ProviderMode mode) {
  switch (mode) {
    case ProviderMode::Oracle: return "oracle";
    case ProviderMode::Mock: return "mock";
    case ProviderMode::Remote: return "remote";
  }
  return "mock";
}

ProviderMode provider_mode_from_string(std::string_view s) {
  if (s == "oracle") return ProviderMode::Oracle;
  if (s == "mock") return ProviderMode::Mock;
  if (s == "remote") return ProviderMode::Remote;
  throw Error(ErrorCode::InvalidParams, "unknown provider mode '" + std::string(s) + "'");
}

void ProviderConfig::validate() const {
  if (mode == ProviderMode::Remote && (!endpoint || endpoint->empty())) {
    throw Error(ErrorCode::InvalidParams, "remote provider mode requires an endpoint");
  }
  if (max_retries < 0) throw Error(ErrorCode::InvalidParams, "max_retries must be >= 0");
  if (max_in_flight < 1) throw Error(ErrorCode::InvalidParams, "max_in_flight must be >= 1");
}

std::string ProviderConfig::fingerprint() const {
  std::string s(to_string(mode));
  if (mode == ProviderMode::Remote) {
    s += "|" + endpoint.value_or("") + "|" + model_name.value_or("");
  }
  return s;
}

EndpointParts split_endpoint(std::string_view url) {
  auto scheme_end = url.find("://");
  std::size_t host_start = scheme_end == std::string_view::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  if (path_start == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

HttpChatProvider::HttpChatProvider(ProviderConfig config) : config_(std::move(config)) { config_.validate(); }

std::string HttpChatProvider::complete(std::string_view prompt) {
  auto parts = split_endpoint(*config_.endpoint);
  httplib::Client client(parts.base);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
  client.set_read_timeout(static_cast<time_t>(secs), 0);
  client.set_connection_timeout(static_cast<time_t>(std::min<long long>(secs, 30)), 0);
  httplib::Headers headers;
  if (config_.api_key && !config_.api_key->empty()) {
    headers.emplace("Authorization", "Bearer " + *config_.api_key);
  }
  nlohmann::json body = {{"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
                         {"temperature", 0}};
  if (config_.model_name) body["model"] = *config_.model_name;
  auto res = client.Post(parts.path, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::ProviderUnavailable, "request to " + *config_.endpoint + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::ProviderUnavailable, "provider returned HTTP " + std::to_string(res->status));
  }
  auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) return res->body;
  if (reply.contains("choices") && reply["choices"].is_array() && !reply["choices"].empty()) {
    const auto& choice = reply["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content") && choice["message"]["content"].is_string()) {
      return choice["message"]["content"].get<std::string>();
    }
    if (choice.contains("text") && choice["text"].is_string()) return choice["text"].get<std::string>();
  }
  return res->body;
}

std::string HttpChatProvider::fingerprint() const { return config_.fingerprint(); }

std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
  config.validate();
  if (config.mode != ProviderMode::Remote) return nullptr;
  return std::make_unique<HttpChatProvider>(config);
}

std::optional<nlohmann::json> parse_json_reply(std::string_view reply) {
  auto body = text::trim(reply);
  if (body.starts_with("```")) {
    auto nl = body.find('\n');
    auto close = body.rfind("```");
    if (nl != std::string_view::npos && close != std::string_view::npos && close > nl) {
      body = text::trim(body.substr(nl + 1, close - nl - 1));
    }
  }
  auto direct = nlohmann::json::parse(body, nullptr, false);
  if (!direct.is_discarded()) return direct;
  // Fall back to the outermost {...} or [...] span.
  for (auto [open, close] : {std::pair{'{', '}'}, std::pair{'[', ']'}}) {
    auto b = body.find(open);
    auto e = body.rfind(close);
    if (b != std::string_view::npos && e != std::string_view::npos && e > b) {
      auto inner = nlohmann::json::parse(body.substr(b, e - b + 1), nullptr, false);
      if (!inner.is_discarded()) return inner;
    }
  }
  return std::nullopt;
}

nlohmann::json complete_json(Provider& provider, std::string_view prompt, int max_retries,
                             const std::function<bool(const nlohmann::json&)>& accept) {
  std::string current(prompt);
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    auto reply = provider.complete(current);
    auto parsed = parse_json_reply(reply);
    if (parsed && (!accept || accept(*parsed))) return *parsed;
    if (attempt == 0) current += kFormatReminder;
  }
  throw Error(ErrorCode::MalformedOutput,
              "provider output was not valid structured data after " + std::to_string(max_retries + 1) + " attempts");
}

}  // namespace lkg
