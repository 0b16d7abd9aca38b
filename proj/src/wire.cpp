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

#include "chunkrt/wire.hpp"

#include <nlohmann/json.hpp>

#include "chunkrt/errors.hpp"

namespace chunkrt {

namespace {

const char* control_tag(ControlKind k) {
  switch (k) {
    case ControlKind::kStart: return "start";
    case ControlKind::kPause: return "pause";
    case ControlKind::kStop: return "stop";
    case ControlKind::kPing: return "ping";
    case ControlKind::kPong: return "pong";
  }
  return "ping";
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < m.rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw MalformedJson("chunk must be an array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = j.at(r);
    if (static_cast<int>(row.size()) != cols) {
      throw MalformedJson("chunk rows are ragged");
    }
    for (int c = 0; c < cols; ++c) m.at(r, c) = row.at(c).get<double>();
  }
  return m;
}

}  // namespace

std::string encode_payload(const WireMessage& msg) {
  nlohmann::json j;
  if (const auto* obs = std::get_if<ObservationRequest>(&msg)) {
    j["t"] = "obs";
    j["session"] = obs->session;
    j["seq"] = obs->sequence;
    j["ts_ns"] = obs->timestamp_ns;
    j["q"] = obs->q;
    j["features"] = obs->features;
    j["executed"] = obs->executed;
    j["latency_ns"] = obs->latency_ns;
  } else if (const auto* chunk = std::get_if<ChunkResponse>(&msg)) {
    j["t"] = "chunk";
    j["session"] = chunk->session;
    j["seq"] = chunk->sequence;
    j["chunk"] = matrix_to_json(chunk->chunk);
    j["reference_q"] = chunk->reference_q;
    j["generated_ns"] = chunk->generated_ns;
  } else if (const auto* ctl = std::get_if<Control>(&msg)) {
    j["t"] = control_tag(ctl->kind);
  } else if (const auto* err = std::get_if<ErrorMessage>(&msg)) {
    j["t"] = "err";
    j["code"] = err->code;
    j["text"] = err->text;
  }
  return j.dump();
}

std::string encode_message(const WireMessage& msg) {
  const std::string payload = encode_payload(msg);
  if (payload.size() > kMaxFrameBytes) {
    throw FrameTooLarge("payload of " + std::to_string(payload.size()) +
                        " bytes exceeds the 16 MiB frame limit");
  }
  const std::uint32_t len = static_cast<std::uint32_t>(payload.size());
  std::string frame;
  frame.reserve(payload.size() + 4);
  frame.push_back(static_cast<char>((len >> 24) & 0xff));
  frame.push_back(static_cast<char>((len >> 16) & 0xff));
  frame.push_back(static_cast<char>((len >> 8) & 0xff));
  frame.push_back(static_cast<char>(len & 0xff));
  frame += payload;
  return frame;
}

WireMessage decode_payload(const std::string& payload) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(payload);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJson(e.what());
  }
  const std::string tag = j.value("t", "");
  try {
    if (tag == "obs") {
      ObservationRequest obs;
      obs.session = j.at("session").get<std::uint64_t>();
      obs.sequence = j.at("seq").get<std::uint64_t>();
      obs.timestamp_ns = j.at("ts_ns").get<std::int64_t>();
      obs.q = j.at("q").get<std::vector<double>>();
      obs.features = j.at("features").get<std::vector<double>>();
      obs.executed = j.at("executed").get<int>();
      obs.latency_ns = j.at("latency_ns").get<std::int64_t>();
      return obs;
    }
    if (tag == "chunk") {
      ChunkResponse chunk;
      chunk.session = j.at("session").get<std::uint64_t>();
      chunk.sequence = j.at("seq").get<std::uint64_t>();
      chunk.chunk = matrix_from_json(j.at("chunk"));
      chunk.reference_q = j.at("reference_q").get<std::vector<double>>();
      chunk.generated_ns = j.at("generated_ns").get<std::int64_t>();
      return chunk;
    }
    if (tag == "err") {
      return ErrorMessage{j.at("code").get<int>(), j.at("text").get<std::string>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJson(e.what());
  }
  if (tag == "start") return Control{ControlKind::kStart};
  if (tag == "pause") return Control{ControlKind::kPause};
  if (tag == "stop") return Control{ControlKind::kStop};
  if (tag == "ping") return Control{ControlKind::kPing};
  if (tag == "pong") return Control{ControlKind::kPong};
  throw UnknownTag("unknown message tag '" + tag + "'");
}

WireMessage decode_message(const std::string& frame) {
  if (frame.size() < 4) throw MalformedJson("frame shorter than its length prefix");
  const auto b = [&](int i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(frame[i])); };
  const std::uint32_t len = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
  if (len > kMaxFrameBytes) {
    throw FrameTooLarge("frame declares " + std::to_string(len) + " bytes");
  }
  if (frame.size() != static_cast<std::size_t>(len) + 4) {
    throw MalformedJson("frame length prefix does not match payload size");
  }
  return decode_payload(frame.substr(4));
}

}  // namespace chunkrt
