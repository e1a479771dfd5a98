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

#include "mpsl/data.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

namespace mpsl {
namespace {

std::uint32_t ReadBigEndian(std::istream& in, const std::string& what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw DataError("short read: " + what);
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

void WriteBigEndian(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                                 static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

std::ifstream OpenBinary(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

}  // namespace

void Dataset::Validate() const {
  if (images.size() != labels.size()) throw DataError("dataset: image/label count mismatch");
  for (std::size_t k = 0; k < images.size(); ++k) {
    if (images[k].size() != pixels()) throw DataError("dataset: image size mismatch");
    for (double v : images[k].values()) {
      if (!(v >= 0.0 && v <= 1.0)) throw DataError("dataset: pixel outside [0,1]");
    }
    if (labels[k] < 0 || labels[k] >= num_classes) throw DataError("dataset: label out of range");
  }
}

DenseMatrix Dataset::Batch(const std::vector<std::size_t>& order, std::size_t begin,
                           std::size_t end) const {
  DenseMatrix out(end - begin, pixels());
  for (std::size_t r = begin; r < end; ++r) {
    const auto& img = images[order[r]].values();
    std::copy(img.begin(), img.end(), out.row(r - begin).begin());
  }
  return out;
}

std::vector<int> Dataset::BatchLabels(const std::vector<std::size_t>& order,
                                      std::size_t begin, std::size_t end) const {
  std::vector<int> out;
  out.reserve(end - begin);
  for (std::size_t r = begin; r < end; ++r) out.push_back(labels[order[r]]);
  return out;
}

Dataset Dataset::Head(std::size_t n) const {
  Dataset out = *this;
  n = std::min(n, size());
  out.images.resize(n);
  out.labels.resize(n);
  return out;
}

Dataset LoadIdx(const std::filesystem::path& images_path,
                const std::filesystem::path& labels_path, int num_classes) {
  std::ifstream img = OpenBinary(images_path);
  std::ifstream lab = OpenBinary(labels_path);
  if (ReadBigEndian(img, images_path.string()) != kIdxImageMagic) {
    throw DataError("not an IDX file: " + images_path.string());
  }
  if (ReadBigEndian(lab, labels_path.string()) != kIdxLabelMagic) {
    throw DataError("not an IDX file: " + labels_path.string());
  }
  const std::uint32_t count = ReadBigEndian(img, images_path.string());
  const std::uint32_t rows = ReadBigEndian(img, images_path.string());
  const std::uint32_t cols = ReadBigEndian(img, images_path.string());
  const std::uint32_t label_count = ReadBigEndian(lab, labels_path.string());
  if (count != label_count) {
    throw DataError("corrupt pair: " + std::to_string(count) + " images vs " +
                    std::to_string(label_count) + " labels");
  }
  if (rows == 0 || cols == 0) throw DataError("corrupt pair: zero image dimension");

  Dataset data;
  data.width = cols;
  data.height = rows;
  data.num_classes = num_classes;
  const std::size_t pixels = std::size_t{rows} * cols;
  std::vector<unsigned char> pixel_bytes(pixels * count);
  if (!img.read(reinterpret_cast<char*>(pixel_bytes.data()),
                static_cast<std::streamsize>(pixel_bytes.size()))) {
    throw DataError("short read: " + images_path.string());
  }
  std::vector<unsigned char> label_bytes(count);
  if (!lab.read(reinterpret_cast<char*>(label_bytes.data()),
                static_cast<std::streamsize>(label_bytes.size()))) {
    throw DataError("short read: " + labels_path.string());
  }
  data.images.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    DenseVector image(pixels);
    for (std::size_t p = 0; p < pixels; ++p) image[p] = pixel_bytes[k * pixels + p] / 255.0;
    data.images.push_back(std::move(image));
    if (label_bytes[k] >= num_classes) {
      throw DataError("corrupt pair: label " + std::to_string(label_bytes[k]) + " out of range");
    }
    data.labels.push_back(label_bytes[k]);
  }
  return data;
}

void WriteIdx(const Dataset& data, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path) {
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw DataError("cannot write IDX pair");
  WriteBigEndian(img, kIdxImageMagic);
  WriteBigEndian(img, static_cast<std::uint32_t>(data.size()));
  WriteBigEndian(img, static_cast<std::uint32_t>(data.height));
  WriteBigEndian(img, static_cast<std::uint32_t>(data.width));
  WriteBigEndian(lab, kIdxLabelMagic);
  WriteBigEndian(lab, static_cast<std::uint32_t>(data.size()));
  for (std::size_t k = 0; k < data.size(); ++k) {
    for (double v : data.images[k].values()) {
      img.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    }
    lab.put(static_cast<char>(data.labels[k]));
  }
}

Dataset SyntheticBlobs(SeededRng& rng, const BlobSpec& spec) {
  MPSL_CHECK(spec.classes >= 2, "synthetic_blobs: need at least 2 classes");
  MPSL_CHECK(spec.width * spec.height > 0, "synthetic_blobs: empty sample");
  const std::size_t dim = spec.width * spec.height;
  std::vector<std::vector<double>> means(static_cast<std::size_t>(spec.classes));
  for (int c = 0; c < spec.classes; ++c) {
    auto& m = means[static_cast<std::size_t>(c)];
    if (spec.classes == 2) {
      m.assign(dim, c == 0 ? 0.2 : 0.8);
    } else {
      m.resize(dim);
      for (double& v : m) v = rng.Uniform() < 0.5 ? 0.2 : 0.8;
    }
  }
  Dataset data;
  data.width = spec.width;
  data.height = spec.height;
  data.num_classes = spec.classes;
  for (std::size_t k = 0; k < spec.n_per_class * static_cast<std::size_t>(spec.classes); ++k) {
    const int c = static_cast<int>(k % static_cast<std::size_t>(spec.classes));
    DenseVector x(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      x[i] = std::clamp(means[static_cast<std::size_t>(c)][i] + spec.sigma * rng.Normal(), 0.0, 1.0);
    }
    data.images.push_back(std::move(x));
    data.labels.push_back(c);
  }
  return data;
}

void PerturbationSpec::Validate(std::size_t width, std::size_t height) const {
  switch (kind) {
    case PerturbationKind::kGaussian:
      MPSL_CHECK(level >= 0.0, "gaussian sigma must be non-negative");
      break;
    case PerturbationKind::kSaltPepper:
      MPSL_CHECK(level >= 0.0 && level <= 1.0, "salt-pepper fraction must lie in [0,1]");
      break;
    case PerturbationKind::kCenterCrop:
      MPSL_CHECK(level >= 1.0 && level == std::floor(level),
                 "crop side must be a positive integer");
      MPSL_CHECK(level <= static_cast<double>(std::min(width, height)),
                 "crop side " + std::to_string(static_cast<long>(level)) +
                     " larger than image side");
      break;
  }
}

PerturbationKind ParsePerturbationKind(const std::string& name) {
  if (name == "gaussian") return PerturbationKind::kGaussian;
  if (name == "salt-pepper") return PerturbationKind::kSaltPepper;
  if (name == "crop" || name == "center-crop") return PerturbationKind::kCenterCrop;
  throw ConfigError("unknown perturbation kind '" + name + "'");
}

std::string ToString(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kGaussian: return "gaussian";
    case PerturbationKind::kSaltPepper: return "salt-pepper";
    case PerturbationKind::kCenterCrop: return "crop";
  }
  return "?";
}

DenseVector Perturb(const DenseVector& image, std::size_t width, std::size_t height,
                    const PerturbationSpec& spec, SeededRng& rng) {
  MPSL_CHECK(image.size() == width * height, "perturb: image is not width x height");
  spec.Validate(width, height);
  DenseVector out = image;
  switch (spec.kind) {
    case PerturbationKind::kGaussian: {
      if (spec.level == 0.0) break;
      for (std::size_t p = 0; p < out.size(); ++p) {
        out[p] = std::clamp(out[p] + spec.level * rng.Normal(), 0.0, 1.0);
      }
      break;
    }
    case PerturbationKind::kSaltPepper: {
      const auto corrupted = static_cast<std::size_t>(
          std::floor(spec.level * static_cast<double>(out.size())));
      std::vector<std::size_t> idx(out.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      // Partial Fisher-Yates: the first `corrupted` slots are a uniform
      // sample without replacement.
      for (std::size_t k = 0; k < corrupted; ++k) {
        const std::size_t pick = k + static_cast<std::size_t>(rng.Below(idx.size() - k));
        std::swap(idx[k], idx[pick]);
        out[idx[k]] = rng.Uniform() < 0.5 ? 0.0 : 1.0;
      }
      break;
    }
    case PerturbationKind::kCenterCrop: {
      const auto side = static_cast<std::size_t>(spec.level);
      const std::size_t top = (height - side) / 2;
      const std::size_t left = (width - side) / 2;
      for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
          const bool inside = r >= top && r < top + side && c >= left && c < left + side;
          if (!inside) out[r * width + c] = 0.0;
        }
      }
      break;
    }
  }
  return out;
}

Dataset PerturbDataset(const Dataset& data, const PerturbationSpec& spec,
                       std::uint64_t seed) {
  spec.Validate(data.width, data.height);
  Dataset out = data;
  for (std::size_t k = 0; k < data.size(); ++k) {
    SeededRng rng(DeriveSeed(seed, k));
    out.images[k] = Perturb(data.images[k], data.width, data.height, spec, rng);
  }
  return out;
}

}  // namespace mpsl
