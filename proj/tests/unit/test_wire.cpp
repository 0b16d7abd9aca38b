// Copyright 2026 The chunkrt Authors
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

#include <cstring>
#include <random>

#include <doctest.h>

#include "chunkrt/errors.hpp"
#include "chunkrt/wire.hpp"

namespace chunkrt {
namespace {

WireMessage random_message(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 100.0);
  switch (rng() % 4) {
    case 0: {
      ObservationRequest obs;
      obs.session = rng();
      obs.sequence = rng() % 100000;
      obs.timestamp_ns = static_cast<std::int64_t>(rng() % (1ull << 62));
      const int n = 1 + rng() % 8;
      for (int i = 0; i < n; ++i) obs.q.push_back(gauss(rng));
      const int m = rng() % 12;
      for (int i = 0; i < m; ++i) obs.features.push_back(gauss(rng));
      obs.executed = rng() % 64;
      obs.latency_ns = static_cast<std::int64_t>(rng() % 1'000'000'000);
      return obs;
    }
    case 1: {
      ChunkResponse chunk;
      chunk.session = rng();
      chunk.sequence = rng() % 100000;
      chunk.chunk = randn_matrix(1 + rng() % 16, 1 + rng() % 24, rng);
      const int n = 1 + rng() % 8;
      for (int i = 0; i < n; ++i) chunk.reference_q.push_back(gauss(rng));
      chunk.generated_ns = static_cast<std::int64_t>(rng() % (1ull << 62));
      return chunk;
    }
    case 2: {
      const ControlKind kinds[] = {ControlKind::kStart, ControlKind::kPause,
                                   ControlKind::kStop, ControlKind::kPing,
                                   ControlKind::kPong};
      return Control{kinds[rng() % 5]};
    }
    default:
      return ErrorMessage{static_cast<int>(rng() % 100), "text " + std::to_string(rng() % 1000)};
  }
}

TEST_CASE("ping frames follow the documented byte layout") {
  const std::string frame = encode_message(Control{ControlKind::kPing});
  REQUIRE(frame.size() == 16);
  CHECK(frame[0] == 0);
  CHECK(frame[1] == 0);
  CHECK(frame[2] == 0);
  CHECK(static_cast<unsigned char>(frame[3]) == 12);
  CHECK(frame.substr(4) == "{\"t\":\"ping\"}");
}

TEST_CASE("messages round-trip through frames, bit for bit") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 500; ++rep) {
    const WireMessage msg = random_message(rng);
    const WireMessage back = decode_message(encode_message(msg));
    CHECK(back == msg);
  }
}

TEST_CASE("oversized payloads are rejected both ways") {
  ChunkResponse huge;
  huge.chunk = Matrix(1200, 1200);  // ~1.4M doubles, far over 16 MiB as text
  for (double& v : huge.chunk.data) v = 0.123456789012345;
  CHECK_THROWS_AS(encode_message(huge), FrameTooLarge);

  const char prefix[4] = {0x01, 0x10, 0x00, 0x00};  // declares ~17 MiB
  std::string bogus(prefix, 4);
  bogus += "{}";
  CHECK_THROWS_AS(decode_message(bogus), FrameTooLarge);
}

TEST_CASE("garbage payloads raise the right errors") {
  CHECK_THROWS_AS(decode_payload("{not json"), MalformedJson);
  CHECK_THROWS_AS(decode_payload("{\"t\":\"mystery\"}"), UnknownTag);
  CHECK_THROWS_AS(decode_payload("{\"t\":\"obs\"}"), MalformedJson);
  CHECK_THROWS_AS(decode_message("xx"), MalformedJson);
}

TEST_CASE("extreme doubles survive the json encoding") {
  ObservationRequest obs;
  obs.session = 1;
  obs.sequence = 2;
  obs.q = {1e-308, -1e308, 0.1 + 0.2, 3.141592653589793, -0.0, 5e-324};
  obs.features = {};
  const WireMessage back = decode_message(encode_message(obs));
  const auto& decoded = std::get<ObservationRequest>(back);
  REQUIRE(decoded.q.size() == obs.q.size());
  for (std::size_t i = 0; i < obs.q.size(); ++i) {
    CHECK(std::memcmp(&decoded.q[i], &obs.q[i], sizeof(double)) == 0);
  }
}

}  // namespace
}  // namespace chunkrt
