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

#include "mpsl/numerics.h"

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace mpsl {
namespace {

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap AsEigen(const DenseMatrix& m) {
  return ConstMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}
MutMap AsEigen(DenseMatrix& m) {
  return MutMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                static_cast<Eigen::Index>(m.cols()));
}

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    MPSL_CHECK(r.size() == cols_, "DenseMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  MPSL_CHECK(data_.size() == rows_ * cols_,
             "DenseMatrix: data length " + std::to_string(data_.size()) +
                 " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
}

SeededRng::SeededRng(std::uint64_t seed) : engine_(SplitMix(seed)) {}

std::uint64_t SeededRng::NextU64() { return engine_(); }

double SeededRng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double SeededRng::Normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - Uniform() lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t SeededRng::Below(std::uint64_t n) {
  MPSL_CHECK(n > 0, "SeededRng::Below: empty range");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return SplitMix(SplitMix(SplitMix(base) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

DenseVector Matvec(const DenseMatrix& w, const DenseVector& x) {
  MPSL_CHECK(w.cols() == x.size(),
             "matvec: W is " + std::to_string(w.rows()) + "x" +
                 std::to_string(w.cols()) + " but x has length " +
                 std::to_string(x.size()));
  DenseVector out(w.rows());
  for (std::size_t j = 0; j < w.rows(); ++j) {
    out[j] = Dot(w.row(j), x.span());
  }
  return out;
}

DenseMatrix Outer(const DenseVector& a, const DenseVector& b) {
  DenseMatrix out(a.size(), b.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t i = 0; i < b.size(); ++i) out(j, i) = a[j] * b[i];
  }
  return out;
}

DenseVector Colsum(const DenseMatrix& a) {
  DenseVector out(a.cols());
  for (std::size_t j = 0; j < a.rows(); ++j) {
    for (std::size_t i = 0; i < a.cols(); ++i) out[i] += a(j, i);
  }
  return out;
}

SimplexResult NormalizeSimplex(const DenseVector& x) {
  const double total = Sum(x.span());
  if (std::abs(total) < kDivisionEpsilon) {
    return {DenseVector(x.size()), true};
  }
  DenseVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / total;
  return {std::move(out), false};
}

DenseMatrix KaimingUniformInit(SeededRng& rng, std::size_t fan_in,
                               std::size_t rows, std::size_t cols) {
  MPSL_CHECK(fan_in > 0, "kaiming_uniform_init: fan_in must be positive");
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  DenseMatrix out(rows, cols);
  for (double& v : out.span()) v = rng.Uniform(-bound, bound);
  return out;
}

DenseMatrix MatMulNT(const DenseMatrix& a, const DenseMatrix& b) {
  MPSL_CHECK(a.cols() == b.cols(), "MatMulNT: inner dimension mismatch");
  DenseMatrix out(a.rows(), b.rows());
  AsEigen(out).noalias() = AsEigen(a) * AsEigen(b).transpose();
  return out;
}

DenseMatrix MatMulTN(const DenseMatrix& a, const DenseMatrix& b) {
  MPSL_CHECK(a.rows() == b.rows(), "MatMulTN: inner dimension mismatch");
  DenseMatrix out(a.cols(), b.cols());
  AsEigen(out).noalias() = AsEigen(a).transpose() * AsEigen(b);
  return out;
}

DenseMatrix MatMulNN(const DenseMatrix& a, const DenseMatrix& b) {
  MPSL_CHECK(a.cols() == b.rows(), "MatMulNN: inner dimension mismatch");
  DenseMatrix out(a.rows(), b.cols());
  AsEigen(out).noalias() = AsEigen(a) * AsEigen(b);
  return out;
}

void Axpy(double alpha, const DenseMatrix& a, DenseMatrix& out) {
  MPSL_CHECK(a.SameShape(out), "Axpy: shape mismatch");
  const double* src = a.data();
  double* dst = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) dst[i] += alpha * src[i];
}

DenseMatrix Add(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out = a;
  Axpy(1.0, b, out);
  return out;
}

DenseMatrix Scaled(const DenseMatrix& a, double alpha) {
  DenseMatrix out = a;
  for (double& v : out.span()) v *= alpha;
  return out;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  MPSL_CHECK(a.size() == b.size(), "Dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double Sum(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

double FrobeniusNorm(const DenseMatrix& a) {
  return std::sqrt(Dot(a.span(), a.span()));
}

bool AllFinite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace mpsl
