// Copyright 2026 The dflute Authors
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

#include "dflute/http.hpp"

#include <thread>

#include <httplib.h>

#include "dflute/errors.hpp"

namespace dflute {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw UsageError("endpoint url needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable_status(int status) {
  return status >= 500 || status == 408 || status == 429;
}

}  // namespace

void validate_endpoint(const Endpoint& endpoint) {
  if (endpoint.url.empty()) throw UsageError("endpoint url is empty");
  if (endpoint.max_in_flight == 0) {
    throw UsageError("max_in_flight must be at least 1");
  }
  if (endpoint.retry.max_attempts == 0) {
    throw UsageError("retry budget must allow at least 1 attempt");
  }
  split_url(endpoint.url);
}

std::string post_json(const Endpoint& endpoint, const std::string& json_body) {
  const SplitUrl target = split_url(endpoint.url);
  httplib::Client client(target.origin);
  const auto secs = endpoint.timeout.count() / 1000;
  const auto usecs = (endpoint.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  auto backoff = endpoint.retry.initial_backoff;
  std::string last_error;
  std::size_t attempt = 0;
  while (attempt < endpoint.retry.max_attempts) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    ++attempt;
    auto res = client.Post(target.path, json_body, "application/json");
    if (!res) {
      last_error = "POST " + endpoint.url + " failed: " +
                   httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    last_error =
        "POST " + endpoint.url + " returned HTTP " + std::to_string(res->status);
    if (!retryable_status(res->status)) break;
  }
  throw TransportError(last_error, attempt);
}

}  // namespace dflute
