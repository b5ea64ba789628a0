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

#include "credxfer/throttle.h"

#include <algorithm>
#include <cmath>
#include <thread>

#include "credxfer/error.h"

namespace credxfer {

Throttle::Throttle(double bytes_per_second) : rate_(bytes_per_second) {
  if (!(bytes_per_second > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "bandwidth limit must be > 0");
  }
  auto const per_slice =
      bytes_per_second * std::chrono::duration<double>(kSlice).count();
  slice_bytes_ = std::max<std::size_t>(1, std::llround(per_slice));
  tokens_ = slice_bytes_;
  next_refill_ = std::chrono::steady_clock::now() + kSlice;
}

void Throttle::Refill(std::chrono::steady_clock::time_point now) {
  if (now < next_refill_) return;
  auto const slices = (now - next_refill_) / kSlice + 1;
  next_refill_ += slices * kSlice;
  auto const added = static_cast<double>(slices) * slice_bytes_;
  tokens_ = static_cast<std::size_t>(
      std::min<double>(slice_bytes_, static_cast<double>(tokens_) + added));
}

std::size_t Throttle::Grant(std::size_t wanted) {
  if (wanted == 0) return 0;
  for (;;) {
    Refill(std::chrono::steady_clock::now());
    if (tokens_ > 0) {
      auto const n = std::min(wanted, tokens_);
      tokens_ -= n;
      return n;
    }
    std::this_thread::sleep_until(next_refill_);
  }
}

}  // namespace credxfer
