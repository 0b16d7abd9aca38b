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

#ifndef CHUNKRT_ERRORS_HPP_
#define CHUNKRT_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chunkrt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define CHUNKRT_DEFINE_ERROR(Name)          \
  struct Name : Error {                     \
    using Error::Error;                     \
  }

CHUNKRT_DEFINE_ERROR(DimensionMismatch);
CHUNKRT_DEFINE_ERROR(ShapeMismatch);
CHUNKRT_DEFINE_ERROR(DegenerateQuaternion);
CHUNKRT_DEFINE_ERROR(TimestepOutOfRange);
CHUNKRT_DEFINE_ERROR(FrameCountMismatch);
CHUNKRT_DEFINE_ERROR(IoError);
CHUNKRT_DEFINE_ERROR(FormatVersionMismatch);
CHUNKRT_DEFINE_ERROR(TooFewFrames);
CHUNKRT_DEFINE_ERROR(UnreachableTarget);
CHUNKRT_DEFINE_ERROR(NonFiniteLoss);
CHUNKRT_DEFINE_ERROR(FrameTooLarge);
CHUNKRT_DEFINE_ERROR(MalformedJson);
CHUNKRT_DEFINE_ERROR(UnknownTag);
CHUNKRT_DEFINE_ERROR(ConnectionLost);
CHUNKRT_DEFINE_ERROR(Timeout);
CHUNKRT_DEFINE_ERROR(StarvedChunk);
CHUNKRT_DEFINE_ERROR(UnsupportedConfig);
CHUNKRT_DEFINE_ERROR(ConfigError);

#undef CHUNKRT_DEFINE_ERROR

// Truncated or garbled episode frame; carries the index of the bad record.
struct CorruptFrame : Error {
  CorruptFrame(std::size_t index, const std::string& what)
      : Error("frame " + std::to_string(index) + ": " + what), frame_index(index) {}
  std::size_t frame_index;
};

struct UrdfError : Error {
  enum class Kind { kMalformedXml, kCycleDetected, kMultipleRoots, kMissingLink };
  UrdfError(Kind k, const std::string& what) : Error(what), kind(k) {}
  Kind kind;
};

}  // namespace chunkrt

#endif  // CHUNKRT_ERRORS_HPP_
