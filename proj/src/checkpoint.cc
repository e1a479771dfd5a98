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

#include "mpsl/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mpsl {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void Put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T Get() {
    Need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string Bytes(std::size_t n) {
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ConfigError("checkpoint: truncated file");
  }
  std::string bytes_;
  std::size_t pos_ = 0;
};

std::string LayerKey(std::size_t l, const char* name) {
  return "layer" + std::to_string(l) + "." + name;
}

const std::vector<double>& Entry(const CheckpointFile& f, const std::string& name,
                                 std::size_t expected) {
  const auto it = f.entries.find(name);
  MPSL_CHECK(it != f.entries.end(), "checkpoint: missing entry " + name);
  MPSL_CHECK(it->second.size() == expected,
             "checkpoint: entry " + name + " has " + std::to_string(it->second.size()) +
                 " values, expected " + std::to_string(expected));
  return it->second;
}

}  // namespace

void WriteFileAtomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void WriteCheckpointFile(const std::filesystem::path& path, const CheckpointFile& file) {
  std::string out(kCheckpointMagic, 4);
  Put<std::uint32_t>(out, kCheckpointVersion);
  Put<std::uint64_t>(out, file.config_hash);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(file.config_json.size()));
  out += file.config_json;
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(file.entries.size()));
  for (const auto& [name, values] : file.entries) {
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    Put<std::uint64_t>(out, values.size());
    for (double v : values) Put<double>(out, v);
  }
  WriteFileAtomic(path, out);
}

CheckpointFile ReadCheckpointFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read checkpoint " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Reader r(buf.str());
  if (r.Bytes(4) != std::string(kCheckpointMagic, 4)) {
    throw ConfigError("checkpoint: bad magic in " + path.string());
  }
  const auto version = r.Get<std::uint32_t>();
  MPSL_CHECK(version == kCheckpointVersion,
             "checkpoint: unsupported format version " + std::to_string(version));
  CheckpointFile f;
  f.config_hash = r.Get<std::uint64_t>();
  f.config_json = r.Bytes(r.Get<std::uint32_t>());
  const auto n = r.Get<std::uint32_t>();
  for (std::uint32_t k = 0; k < n; ++k) {
    std::string name = r.Bytes(r.Get<std::uint32_t>());
    const auto count = r.Get<std::uint64_t>();
    std::vector<double> values;
    values.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) values.push_back(r.Get<double>());
    f.entries.emplace(std::move(name), std::move(values));
  }
  MPSL_CHECK(r.done(), "checkpoint: trailing bytes");
  return f;
}

void SaveCheckpoint(const std::filesystem::path& path, const Trainer& trainer) {
  CheckpointFile f;
  f.config_json = ToJson(trainer.config());
  f.config_hash = ConfigHash(trainer.config());
  const Network& net = trainer.net();
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const MultiPathLayer& layer = net.layers[l];
    f.entries[LayerKey(l, "shape")] = {static_cast<double>(layer.fan_out),
                                       static_cast<double>(layer.fan_in)};
    f.entries[LayerKey(l, "W1")] = layer.w1().values();
    f.entries[LayerKey(l, "W2")] = layer.w2().values();
    f.entries[LayerKey(l, "W3")] = layer.w3().values();
    f.entries[LayerKey(l, "dW2_last")] = layer.dw2_last.values();
    f.entries[LayerKey(l, "lambda")] = {layer.lambda.begin(), layer.lambda.end()};
    f.entries[LayerKey(l, "eta")] = {layer.eta};
    f.entries[LayerKey(l, "beta")] = {layer.beta};
  }
  f.entries["lambda_f"] = {net.sbp.lambda_f};
  f.entries["lambda_p"] = {net.sbp.lambda_p};
  f.entries["optimizer.m"] = trainer.optimizer().m;
  f.entries["optimizer.v"] = trainer.optimizer().v;
  f.entries["optimizer.step"] = {static_cast<double>(trainer.optimizer().step)};
  f.entries["epoch"] = {static_cast<double>(trainer.epoch())};
  // Shuffle streams are derived from (seed, epoch); the seed is stored as two
  // exact 32-bit halves.
  const std::uint64_t seed = trainer.config().seed;
  f.entries["rng.seed"] = {static_cast<double>(seed >> 32),
                           static_cast<double>(seed & 0xffffffffULL)};
  WriteCheckpointFile(path, f);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  const CheckpointFile f = ReadCheckpointFile(path);
  Checkpoint ck;
  ck.config = ParseConfig(f.config_json);
  MPSL_CHECK(ConfigHash(ck.config) == f.config_hash,
             "checkpoint: config hash does not match embedded config");
  Network& net = ck.net;
  net.lif = ck.config.network.lif;
  net.delta_mode = ck.config.network.delta_mode;
  net.sbp = ck.config.network.sbp;
  const auto& sizes = ck.config.network.layer_sizes;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto& shape = Entry(f, LayerKey(l, "shape"), 2);
    const auto out = static_cast<std::size_t>(shape[0]);
    const auto in = static_cast<std::size_t>(shape[1]);
    MPSL_CHECK(out == sizes[l + 1] && in == sizes[l], "checkpoint: layer shape disagrees with config");
    MultiPathLayer layer(in, out);
    layer.w1() = DenseMatrix(out, in, Entry(f, LayerKey(l, "W1"), out * in));
    layer.w2() = DenseMatrix(out, in, Entry(f, LayerKey(l, "W2"), out * in));
    layer.w3() = DenseMatrix(out, in, Entry(f, LayerKey(l, "W3"), out * in));
    layer.dw2_last = DenseMatrix(out, in, Entry(f, LayerKey(l, "dW2_last"), out * in));
    const auto& lambda = Entry(f, LayerKey(l, "lambda"), kNumPaths);
    std::copy(lambda.begin(), lambda.end(), layer.lambda.begin());
    layer.eta = Entry(f, LayerKey(l, "eta"), 1)[0];
    layer.beta = Entry(f, LayerKey(l, "beta"), 1)[0];
    net.layers.push_back(std::move(layer));
  }
  net.sbp.lambda_f = Entry(f, "lambda_f", 1)[0];
  net.sbp.lambda_p = Entry(f, "lambda_p", 1)[0];
  net.Validate();
  const std::size_t n_params = FlattenParameters(net).size();
  const auto m_it = f.entries.find("optimizer.m");
  if (m_it != f.entries.end() && !m_it->second.empty()) {
    ck.adam.m = Entry(f, "optimizer.m", n_params);
    ck.adam.v = Entry(f, "optimizer.v", n_params);
  }
  ck.adam.step = static_cast<std::int64_t>(Entry(f, "optimizer.step", 1)[0]);
  ck.epoch = static_cast<int>(Entry(f, "epoch", 1)[0]);
  const auto& seed = Entry(f, "rng.seed", 2);
  MPSL_CHECK(((static_cast<std::uint64_t>(seed[0]) << 32) | static_cast<std::uint64_t>(seed[1])) ==
                 ck.config.seed,
             "checkpoint: rng seed disagrees with config");
  return ck;
}

}  // namespace mpsl
