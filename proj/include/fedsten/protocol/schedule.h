/*
 * Copyright 2026 The fedsten Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSTEN_PROTOCOL_SCHEDULE_H_
#define FEDSTEN_PROTOCOL_SCHEDULE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fedsten::proto {

// Local epochs per client per round. Round 1 uses warmup_epochs, every
// later round epochs_per_round.
struct RoundSchedule {
  std::uint32_t total_rounds = 1;
  std::map<std::string, std::uint32_t> epochs_per_round;
  std::map<std::string, std::uint32_t> warmup_epochs;

  // Throws InvalidArgumentError unless total_rounds > 0 and every client
  // has positive entries in both maps.
  void validate(const std::vector<std::string>& client_ids) const;

  friend bool operator==(const RoundSchedule&, const RoundSchedule&) = default;
};

// Throws InvalidArgumentError for an unknown client or a round outside
// [1, total_rounds].
std::uint32_t epochs_for(const RoundSchedule& schedule, std::uint32_t round,
                         const std::string& client_id);

}  // namespace fedsten::proto

#endif  // FEDSTEN_PROTOCOL_SCHEDULE_H_
