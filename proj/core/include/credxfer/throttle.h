// Copyright 2026 The credxfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CREDXFER_THROTTLE_H
#define CREDXFER_THROTTLE_H

#include <chrono>
#include <cstddef>

namespace credxfer {

/// Token bucket refilled in whole 50 ms slices. The bucket holds at most one
/// slice worth of bytes, so a stalled reader cannot later burst above the
/// configured rate.
class Throttle {
 public:
  static constexpr std::chrono::milliseconds kSlice{50};

  explicit Throttle(double bytes_per_second);

  /// Blocks until at least one byte may be sent, then grants up to `wanted`.
  std::size_t Grant(std::size_t wanted);

  double bytes_per_second() const { return rate_; }
  std::size_t slice_bytes() const { return slice_bytes_; }

 private:
  void Refill(std::chrono::steady_clock::time_point now);

  double rate_;
  std::size_t slice_bytes_;
  std::size_t tokens_;
  std::chrono::steady_clock::time_point next_refill_;
};

}  // namespace credxfer

#endif  // CREDXFER_THROTTLE_H
