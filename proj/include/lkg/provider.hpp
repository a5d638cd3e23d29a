#pragma once

// Pluggable language-model provider shared by extraction, normalization,
// linking and the evaluation baselines.

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace lkg {

enum class ProviderMode { Oracle, Mock, Remote };

std::string_view to_string(ProviderMode mode);
ProviderMode provider_mode_from_string(std::string_view s);

struct ProviderConfig {
  ProviderMode mode = ProviderMode::Mock;
  std::optional<std::string> endpoint;
  std::optional<std::string> model_name;
  std::optional<std::string> api_key;
  int max_retries = 2;
  std::chrono::milliseconds timeout{60'000};
  int max_in_flight = 4;

  // Throws InvalidParams when remote mode lacks an endpoint or counts are negative.
  void validate() const;
  std::string fingerprint() const;
};

class Provider {
 public:
  virtual ~Provider() = default;
  // Single-turn completion. Throws Error(ProviderUnavailable) on transport failure.
  virtual std::string complete(std::string_view prompt) = 0;
  virtual std::string fingerprint() const = 0;
};

// Chat-completion style HTTP provider ({"model", "messages"} in,
// choices[0].message.content out).
class HttpChatProvider final : public Provider {
 public:
  explicit HttpChatProvider(ProviderConfig config);
  std::string complete(std::string_view prompt) override;
  std::string fingerprint() const override;

 private:
  ProviderConfig config_;
};

// Returns an HTTP provider for remote mode and nullptr otherwise.
std::unique_ptr<Provider> make_provider(const ProviderConfig& config);

// Strips Markdown code fences and surrounding prose, then parses the first
// JSON value in the reply. Returns nullopt when nothing parses.
std::optional<nlohmann::json> parse_json_reply(std::string_view reply);

inline constexpr std::string_view kFormatReminder =
    "\n\nReminder: respond with a single JSON value only. Do not add explanations or Markdown.";

// Issues the prompt, re-asking with kFormatReminder appended while the reply
// is not valid JSON or fails `accept`. At most max_retries + 1 calls are made;
// afterwards Error(MalformedOutput) is thrown.
nlohmann::json complete_json(Provider& provider, std::string_view prompt, int max_retries,
                             const std::function<bool(const nlohmann::json&)>& accept = {});

// Splits "http(s)://host[:port]/path" into a scheme-host-port prefix and a path.
struct EndpointParts {
  std::string base;
  std::string path;
};
EndpointParts split_endpoint(std::string_view url);

}  // namespace lkg
