/*
 * Copyright (c) 2026 The xdl Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace xdl {

/// Dense 64-bit float vector. Shapes are checked on every binary
/// operation; non-finite values are rejected at operation boundaries.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> init) : data_(init) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }
  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }

  bool operator==(const Vector& other) const = default;

 private:
  std::vector<double> data_;
};

/// Dense row-major 64-bit float matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Throws when any element is NaN or infinite. `what` names the value
/// in the error message.
void ensure_finite(std::span<const double> values, const char* what);

/// y = M x  (shape-checked)
Vector matvec(const Matrix& m, const Vector& x);
/// y = M^T x
Vector matvec_transposed(const Matrix& m, const Vector& x);
/// M += scale * a b^T
void add_outer(Matrix& m, std::span<const double> a, std::span<const double> b, double scale = 1.0);
/// a += scale * b
void axpy(std::span<double> a, std::span<const double> b, double scale);

/// Numerically stable softmax (max-subtraction). Output sums to 1
/// within 1e-12 and preserves the input ordering.
Vector softmax(const Vector& logits);

/// log(sum(exp(z))) with max-subtraction.
double log_sum_exp(const Vector& logits);

struct LossGrad {
  double loss = 0.0;
  Vector grad;
};

/// Cross-entropy against a hard class index.
/// loss = -log softmax(logits)[target], grad = softmax(logits) - onehot(target).
LossGrad cross_entropy(const Vector& logits, std::size_t target);

/// Temperature-scaled forward KL distillation loss.
/// loss = T^2 * KL(softmax(teacher/T) || softmax(student/T));
/// grad (w.r.t. student logits) = T * (softmax(student/T) - softmax(teacher/T)).
/// The T^2 factor keeps gradient magnitudes comparable across temperatures.
LossGrad kl_distill_loss(const Vector& teacher_logits, const Vector& student_logits,
                         double temperature);

/// Linear warmup to `peak_lr` over the first warmup_fraction of steps,
/// then cosine decay to zero.
struct LrSchedule {
  double peak_lr = 0.0;
  std::int64_t total_steps = 1;
  double warmup_fraction = 0.1;
};

double lr_at(const LrSchedule& schedule, std::int64_t step);

enum class OptimizerMode { Adam, AdamW };

struct OptimizerConfig {
  OptimizerMode mode = OptimizerMode::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;  // used by AdamW only (decoupled)
};

/// Adam/AdamW over a fixed set of parameter tensors. Accumulator shapes
/// are captured on the first step and validated afterwards; the step
/// counter increases by exactly one per step.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {}) : config_(config) {}

  void step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads, double lr);

  std::int64_t step_count() const noexcept { return step_count_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  OptimizerConfig config_;
  std::int64_t step_count_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

/// Central finite differences (f(x+h e_i) - f(x-h e_i)) / 2h; the test
/// oracle for every analytic gradient in the project.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f, const Vector& at,
                        double h);

/// Element-wise mean of shape-identical gradient sets (one flat buffer
/// per micro-batch).
std::vector<double> accumulate_gradients(const std::vector<std::vector<double>>& micro_grads);

/// splitmix64 finalizer; used to derive independent seeds from (seed, id)
/// pairs without correlated low bits.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace xdl
