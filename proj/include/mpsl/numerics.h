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

#ifndef MPSL_NUMERICS_H_
#define MPSL_NUMERICS_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpsl {

// Raised for dimension mismatches and invalid settings. Always fatal.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MPSL_CHECK(cond, msg)                                   \
  do {                                                          \
    if (!(cond)) throw ::mpsl::ConfigError(std::string(msg));   \
  } while (0)

class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
  DenseVector(std::initializer_list<double> values) : data_(values) {}
  explicit DenseVector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  const std::vector<double>& values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool operator==(const DenseVector&) const = default;

 private:
  std::vector<double> data_;
};

// Row-major matrix. Batched activations use one row per batch item.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  const std::vector<double>& values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool SameShape(const DenseMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Portable seeded generator. The engine is std::mt19937_64 (fully specified
// by the standard); the distributions are written out here because the
// std:: distributions are implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Standard normal via Box-Muller.
  double Normal();
  // Uniform integer on [0, n).
  std::uint64_t Below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream seed from a base seed and a tag path, so
// per-epoch and per-sample streams do not depend on consumption order.
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

DenseVector Matvec(const DenseMatrix& w, const DenseVector& x);
DenseMatrix Outer(const DenseVector& a, const DenseVector& b);
DenseVector Colsum(const DenseMatrix& a);

struct SimplexResult {
  DenseVector value;
  bool degenerate = false;
};

inline constexpr double kDivisionEpsilon = 1e-8;

// x / sum(x). When |sum(x)| < kDivisionEpsilon the result is all zeros and
// `degenerate` is set.
SimplexResult NormalizeSimplex(const DenseVector& x);

// Entries i.i.d. uniform on [-sqrt(6/fan_in), sqrt(6/fan_in)].
DenseMatrix KaimingUniformInit(SeededRng& rng, std::size_t fan_in,
                               std::size_t rows, std::size_t cols);

// Dense kernels used by the batched paths.
DenseMatrix MatMulNT(const DenseMatrix& a, const DenseMatrix& b);  // a * b^T
DenseMatrix MatMulTN(const DenseMatrix& a, const DenseMatrix& b);  // a^T * b
DenseMatrix MatMulNN(const DenseMatrix& a, const DenseMatrix& b);  // a * b

// out += alpha * a, shapes must match.
void Axpy(double alpha, const DenseMatrix& a, DenseMatrix& out);
DenseMatrix Add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix Scaled(const DenseMatrix& a, double alpha);
double Dot(std::span<const double> a, std::span<const double> b);
double Sum(std::span<const double> a);
double FrobeniusNorm(const DenseMatrix& a);
bool AllFinite(std::span<const double> a);

}  // namespace mpsl

#endif  // MPSL_NUMERICS_H_
