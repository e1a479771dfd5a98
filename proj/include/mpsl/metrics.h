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

#ifndef MPSL_METRICS_H_
#define MPSL_METRICS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mpsl {

inline constexpr char kMetricsSchema[] = "# mpsl-metrics v1";

// One CSV row. Every field is always written; sweep-only fields hold
// neutral values ("none", 0) on training rows.
struct MetricsRow {
  std::string run_id;
  std::string command;
  std::string mode;         // lambda mode, or "merged"/"unmerged" for eval
  std::uint64_t seed = 0;
  int epoch = 0;
  std::string kind = "none";  // perturbation kind for sweep rows
  double level = 0.0;
  std::string split;        // train | test
  double loss = 0.0;
  double accuracy = 0.0;
  double accuracy_sd = 0.0;
  std::vector<double> lambdas;
  double wall_seconds = 0.0;
};

std::string MetricsHeader();
std::string FormatRow(const MetricsRow& row);
// Schema comment, header and rows, written atomically.
void WriteMetrics(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);

std::string RunId(const std::string& command, std::uint64_t config_hash);

}  // namespace mpsl

#endif  // MPSL_METRICS_H_
