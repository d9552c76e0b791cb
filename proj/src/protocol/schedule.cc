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

#include "fedsten/protocol/schedule.h"

#include "fedsten/common/error.h"

namespace fedsten::proto {

void RoundSchedule::validate(const std::vector<std::string>& client_ids) const {
  if (total_rounds == 0) throw InvalidArgumentError("schedule needs at least one round");
  for (const auto& id : client_ids) {
    auto e = epochs_per_round.find(id);
    auto w = warmup_epochs.find(id);
    if (e == epochs_per_round.end() || w == warmup_epochs.end()) {
      throw InvalidArgumentError("schedule has no epochs for client '" + id + "'");
    }
    if (e->second == 0 || w->second == 0) {
      throw InvalidArgumentError("schedule epochs for client '" + id + "' must be positive");
    }
  }
}

std::uint32_t epochs_for(const RoundSchedule& schedule, std::uint32_t round,
                         const std::string& client_id) {
  if (round < 1 || round > schedule.total_rounds) {
    throw InvalidArgumentError("round " + std::to_string(round) + " outside [1, " +
                               std::to_string(schedule.total_rounds) + "]");
  }
  const auto& table = round == 1 ? schedule.warmup_epochs : schedule.epochs_per_round;
  auto it = table.find(client_id);
  if (it == table.end()) throw InvalidArgumentError("unknown client '" + client_id + "'");
  return it->second;
}

}  // namespace fedsten::proto
