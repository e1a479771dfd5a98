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

#ifndef MPSL_DATA_H_
#define MPSL_DATA_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpsl/numerics.h"

namespace mpsl {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  std::vector<DenseVector> images;  // pixels in [0, 1]
  std::vector<int> labels;
  std::size_t width = 0;
  std::size_t height = 0;
  int num_classes = 0;

  std::size_t size() const { return images.size(); }
  std::size_t pixels() const { return width * height; }
  void Validate() const;
  // Rows [begin, end) of `order` stacked into a [n x pixels] matrix.
  DenseMatrix Batch(const std::vector<std::size_t>& order, std::size_t begin,
                    std::size_t end) const;
  std::vector<int> BatchLabels(const std::vector<std::size_t>& order,
                               std::size_t begin, std::size_t end) const;
  Dataset Head(std::size_t n) const;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Reads a big-endian IDX image/label pair; pixels are scaled by 1/255.
// Throws DataError: "not an IDX file", "corrupt pair" or "short read".
Dataset LoadIdx(const std::filesystem::path& images_path,
                const std::filesystem::path& labels_path, int num_classes = 10);

// Writes the pair back out (pixels rounded to bytes). Used by tooling/tests.
void WriteIdx(const Dataset& data, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path);

struct BlobSpec {
  std::size_t n_per_class = 100;
  int classes = 10;
  std::size_t width = 4;  // dim = width * height
  std::size_t height = 1;
  double sigma = 0.05;
};

// Gaussian blobs clamped to [0, 1]. Class means are drawn per class and
// coordinate from {0.2, 0.8} (two classes use all-0.2 / all-0.8); samples
// are interleaved by class.
Dataset SyntheticBlobs(SeededRng& rng, const BlobSpec& spec);

enum class PerturbationKind { kGaussian, kSaltPepper, kCenterCrop };

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::kGaussian;
  // gaussian: sigma; salt-pepper: corrupted fraction; crop: retained side.
  double level = 0.0;

  void Validate(std::size_t width, std::size_t height) const;
};

PerturbationKind ParsePerturbationKind(const std::string& name);
std::string ToString(PerturbationKind kind);

// Applies the corruption to one width x height image.
DenseVector Perturb(const DenseVector& image, std::size_t width, std::size_t height,
                    const PerturbationSpec& spec, SeededRng& rng);

// Perturbs every image with a per-sample stream derived from `seed`.
Dataset PerturbDataset(const Dataset& data, const PerturbationSpec& spec,
                       std::uint64_t seed);

}  // namespace mpsl

#endif  // MPSL_DATA_H_
