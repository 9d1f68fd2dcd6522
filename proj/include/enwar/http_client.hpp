// Copyright 2026 The Enwar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Minimal client for the de-facto open chat-completions / embeddings wire
// format, plus a plain POST helper used by the captioner.

#include <chrono>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "enwar/error.hpp"

namespace enwar::http {

struct RemoteEndpoint {
  std::string url;      // full URL, e.g. http://127.0.0.1:8080/v1/embeddings
  std::string api_key;  // sent as a bearer token when non-empty
  std::string model;
  int timeout_s = 60;
  std::size_t max_in_flight = 4;
};

struct Response {
  int status = 0;
  std::string body;
};

struct SplitUrl {
  std::string scheme_host_port;
  std::string path;
};

inline SplitUrl split_url(std::string_view url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidInput, "http", "URL lacks a scheme: " + std::string(url));
  }
  const std::size_t path = url.find('/', scheme + 3);
  if (path == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, path)), std::string(url.substr(path))};
}

/// Caps concurrent requests issued through one configured endpoint.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(std::size_t limit)
      : semaphore_(static_cast<std::ptrdiff_t>(limit == 0 ? 1 : limit)) {}

  class Slot {
   public:
    explicit Slot(InFlightLimiter& owner) : owner_(owner) { owner_.semaphore_.acquire(); }
    ~Slot() { owner_.semaphore_.release(); }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    InFlightLimiter& owner_;
  };

 private:
  std::counting_semaphore<1024> semaphore_;
};

/// Returns nullopt when the request never produced an HTTP response.
inline std::optional<Response> post(const RemoteEndpoint& endpoint, const std::string& body,
                                    const std::string& content_type) {
  const SplitUrl target = split_url(endpoint.url);
  httplib::Client client(target.scheme_host_port);
  client.set_connection_timeout(std::chrono::seconds(endpoint.timeout_s));
  client.set_read_timeout(std::chrono::seconds(endpoint.timeout_s));
  client.set_write_timeout(std::chrono::seconds(endpoint.timeout_s));
  httplib::Headers headers;
  if (!endpoint.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.api_key);
  }
  auto result = client.Post(target.path, headers, body, content_type);
  if (!result) return std::nullopt;
  return Response{result->status, result->body};
}

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double top_p = 0.95;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::optional<int> seed;
};

struct ChatResult {
  std::string text;
  std::string model;
  std::optional<long> prompt_tokens;
  std::optional<long> completion_tokens;
};

class OpenAiClient {
 public:
  explicit OpenAiClient(RemoteEndpoint endpoint)
      : endpoint_(std::move(endpoint)),
        limiter_(std::make_shared<InFlightLimiter>(endpoint_.max_in_flight)) {}

  const RemoteEndpoint& endpoint() const noexcept { return endpoint_; }

  /// One vector per input, in input order.
  std::vector<std::vector<double>> embeddings(const std::vector<std::string>& inputs) const {
    nlohmann::json request = {{"model", endpoint_.model}, {"input", inputs}};
    const Response response = send(request, ErrorCode::kEmbedderUnavailable,
                                    ErrorCode::kEmbedderUnavailable, "textproc");
    try {
      const auto parsed = nlohmann::json::parse(response.body);
      const auto& data = parsed.at("data");
      std::vector<std::vector<double>> out(inputs.size());
      std::size_t position = 0;
      for (const auto& item : data) {
        const std::size_t index = item.contains("index") ? item.at("index").get<std::size_t>()
                                                         : position;
        if (index >= out.size()) {
          throw Error(ErrorCode::kEmbedderUnavailable, "textproc",
                      "embedding index out of range in response");
        }
        out[index] = item.at("embedding").get<std::vector<double>>();
        ++position;
      }
      if (position != inputs.size()) {
        throw Error(ErrorCode::kEmbedderUnavailable, "textproc",
                    "embedding response count does not match request");
      }
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kEmbedderUnavailable, "textproc",
                  std::string("malformed embeddings response: ") + e.what());
    }
  }

  ChatResult chat(const ChatRequest& chat) const {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : chat.messages) {
      messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    nlohmann::json request = {{"model", endpoint_.model},
                              {"messages", messages},
                              {"top_p", chat.top_p},
                              {"temperature", chat.temperature},
                              {"max_tokens", chat.max_tokens}};
    if (chat.seed) request["seed"] = *chat.seed;
    const Response response = send(request, ErrorCode::kBackendUnavailable,
                                   ErrorCode::kBackendRejected, "generation");
    try {
      const auto parsed = nlohmann::json::parse(response.body);
      ChatResult result;
      result.text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
      result.model = parsed.value("model", endpoint_.model);
      if (parsed.contains("usage")) {
        const auto& usage = parsed.at("usage");
        if (usage.contains("prompt_tokens")) result.prompt_tokens = usage.at("prompt_tokens").get<long>();
        if (usage.contains("completion_tokens")) {
          result.completion_tokens = usage.at("completion_tokens").get<long>();
        }
      }
      return result;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kBackendRejected, "generation",
                  std::string("malformed chat response: ") + e.what());
    }
  }

 private:
  Response send(const nlohmann::json& request, ErrorCode transport, ErrorCode rejected,
                std::string_view module) const {
    std::optional<Response> response;
    {
      InFlightLimiter::Slot slot(*limiter_);
      response = post(endpoint_, request.dump(), "application/json");
    }
    if (!response) {
      throw Error(transport, module, "no response from " + endpoint_.url);
    }
    if (response->status < 200 || response->status >= 300) {
      throw Error(rejected, module,
                  "HTTP " + std::to_string(response->status) + " from " + endpoint_.url + ": " +
                      response->body);
    }
    return *response;
  }

  RemoteEndpoint endpoint_;
  std::shared_ptr<InFlightLimiter> limiter_;
};

}  // namespace enwar::http
