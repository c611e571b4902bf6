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

#pragma once

#include <chrono>
#include <cstddef>
#include <string>

namespace dflute {

struct RetryPolicy {
  std::size_t max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};  // doubled per retry
};

/// A remote HTTP endpoint, e.g. "http://127.0.0.1:8080/generate".
struct Endpoint {
  std::string url;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_in_flight = 4;
  RetryPolicy retry;
};

/// Throws UsageError on an empty url or max_in_flight == 0.
void validate_endpoint(const Endpoint& endpoint);

/// POSTs `json_body` and returns the 200 response body. Connection errors and
/// non-200 statuses are retried per the endpoint's policy, then raised as
/// TransportError. 4xx responses other than 408/429 are not retried.
std::string post_json(const Endpoint& endpoint, const std::string& json_body);

}  // namespace dflute
