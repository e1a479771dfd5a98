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

#include "mpsl/metrics.h"

#include <cstdio>

#include "mpsl/checkpoint.h"

namespace mpsl {
namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string MetricsHeader() {
  return "run_id,command,mode,seed,epoch,kind,level,split,loss,accuracy,accuracy_sd,lambdas,"
         "wall_seconds";
}

std::string FormatRow(const MetricsRow& row) {
  std::string lambdas;
  for (std::size_t k = 0; k < row.lambdas.size(); ++k) {
    if (k) lambdas += ';';
    lambdas += Num(row.lambdas[k]);
  }
  if (lambdas.empty()) lambdas = "none";
  return row.run_id + "," + row.command + "," + row.mode + "," + std::to_string(row.seed) + "," +
         std::to_string(row.epoch) + "," + row.kind + "," + Num(row.level) + "," + row.split +
         "," + Num(row.loss) + "," + Num(row.accuracy) + "," + Num(row.accuracy_sd) + "," +
         lambdas + "," + Num(row.wall_seconds);
}

void WriteMetrics(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::string text = std::string(kMetricsSchema) + "\n" + MetricsHeader() + "\n";
  for (const auto& row : rows) text += FormatRow(row) + "\n";
  WriteFileAtomic(path, text);
}

std::string RunId(const std::string& command, std::uint64_t config_hash) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash));
  return command + "-" + buf;
}

}  // namespace mpsl
