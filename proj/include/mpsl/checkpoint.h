// Copyright 2026 The MPSL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MPSL_CHECKPOINT_H_
#define MPSL_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mpsl/config.h"
#include "mpsl/network.h"
#include "mpsl/trainer.h"

namespace mpsl {

inline constexpr char kCheckpointMagic[4] = {'M', 'P', 'S', 'L'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (all integers and doubles little-endian):
//   "MPSL" | u32 version | u64 config hash | u32 len + config JSON bytes |
//   u32 entry count | entries: u32 name len + name, u64 count, count x f64
struct CheckpointFile {
  std::uint64_t config_hash = 0;
  std::string config_json;
  std::map<std::string, std::vector<double>> entries;
};

void WriteCheckpointFile(const std::filesystem::path& path, const CheckpointFile& file);
CheckpointFile ReadCheckpointFile(const std::filesystem::path& path);

struct Checkpoint {
  TrainConfig config;
  Network net;
  AdamState adam;
  int epoch = 0;
};

void SaveCheckpoint(const std::filesystem::path& path, const Trainer& trainer);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Writes `bytes` to a sibling temporary file, then renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace mpsl

#endif  // MPSL_CHECKPOINT_H_
