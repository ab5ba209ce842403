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
#include "xdl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xdl/error.hpp"

namespace xdl {

namespace {
constexpr const char* kModule = "numerics";
}

void ensure_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      raise(kModule, std::string(what) + " contains a non-finite value");
    }
  }
}

Vector matvec(const Matrix& m, const Vector& x) {
  if (m.cols() != x.size()) {
    raise(kModule, "matvec shape mismatch: " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + " * " + std::to_string(x.size()));
  }
  Vector y(m.rows());
  const double* md = m.data();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    const double* row = md + r * m.cols();
    for (std::size_t c = 0; c < m.cols(); ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  ensure_finite(y.span(), "matvec result");
  return y;
}

Vector matvec_transposed(const Matrix& m, const Vector& x) {
  if (m.rows() != x.size()) {
    raise(kModule, "matvec_transposed shape mismatch: " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + "^T * " + std::to_string(x.size()));
  }
  Vector y(m.cols());
  const double* md = m.data();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double xr = x[r];
    const double* row = md + r * m.cols();
    for (std::size_t c = 0; c < m.cols(); ++c) y[c] += row[c] * xr;
  }
  ensure_finite(y.span(), "matvec_transposed result");
  return y;
}

void add_outer(Matrix& m, std::span<const double> a, std::span<const double> b, double scale) {
  if (m.rows() != a.size() || m.cols() != b.size()) {
    raise(kModule, "add_outer shape mismatch");
  }
  double* md = m.data();
  for (std::size_t r = 0; r < a.size(); ++r) {
    const double ar = scale * a[r];
    double* row = md + r * b.size();
    for (std::size_t c = 0; c < b.size(); ++c) row[c] += ar * b[c];
  }
}

void axpy(std::span<double> a, std::span<const double> b, double scale) {
  if (a.size() != b.size()) raise(kModule, "axpy shape mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += scale * b[i];
}

Vector softmax(const Vector& logits) {
  if (logits.empty()) raise(kModule, "softmax on empty logits");
  ensure_finite(logits.span(), "softmax input");
  double max = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= sum;
  return out;
}

double log_sum_exp(const Vector& logits) {
  double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += std::exp(logits[i] - max);
  return max + std::log(sum);
}

LossGrad cross_entropy(const Vector& logits, std::size_t target) {
  if (logits.empty()) raise(kModule, "cross_entropy on empty logits");
  if (target >= logits.size()) {
    raise(kModule, "cross_entropy target " + std::to_string(target) + " out of range [0, " +
                       std::to_string(logits.size()) + ")");
  }
  ensure_finite(logits.span(), "cross_entropy logits");
  LossGrad out;
  out.loss = log_sum_exp(logits) - logits[target];
  out.grad = softmax(logits);
  out.grad[target] -= 1.0;
  return out;
}

LossGrad kl_distill_loss(const Vector& teacher_logits, const Vector& student_logits,
                         double temperature) {
  if (teacher_logits.size() != student_logits.size()) {
    raise(kModule, "kl_distill_loss logit length mismatch: " +
                       std::to_string(teacher_logits.size()) + " vs " +
                       std::to_string(student_logits.size()));
  }
  if (teacher_logits.empty()) raise(kModule, "kl_distill_loss on empty logits");
  if (!(temperature > 0.0)) raise(kModule, "kl_distill_loss temperature must be > 0");
  ensure_finite(teacher_logits.span(), "kl_distill_loss teacher logits");
  ensure_finite(student_logits.span(), "kl_distill_loss student logits");

  const std::size_t n = teacher_logits.size();
  Vector tz(n), sz(n);
  for (std::size_t i = 0; i < n; ++i) {
    tz[i] = teacher_logits[i] / temperature;
    sz[i] = student_logits[i] / temperature;
  }
  const double t_lse = log_sum_exp(tz);
  const double s_lse = log_sum_exp(sz);
  Vector p = softmax(tz);
  Vector q = softmax(sz);

  LossGrad out;
  out.grad = Vector(n);
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] > 0.0) kl += p[i] * ((tz[i] - t_lse) - (sz[i] - s_lse));
    out.grad[i] = temperature * (q[i] - p[i]);
  }
  out.loss = temperature * temperature * std::max(kl, 0.0);
  return out;
}

double lr_at(const LrSchedule& schedule, std::int64_t step) {
  if (schedule.total_steps < 1) raise(kModule, "lr schedule needs total_steps >= 1");
  if (!(schedule.warmup_fraction > 0.0 && schedule.warmup_fraction < 1.0)) {
    raise(kModule, "lr schedule warmup_fraction must lie in (0, 1)");
  }
  if (step < 0 || step > schedule.total_steps) {
    raise(kModule, "lr schedule step " + std::to_string(step) + " outside [0, " +
                       std::to_string(schedule.total_steps) + "]");
  }
  const std::int64_t warmup =
      std::max<std::int64_t>(1, std::llround(schedule.warmup_fraction * schedule.total_steps));
  if (step <= warmup) {
    return schedule.peak_lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(schedule.total_steps - warmup);
  return schedule.peak_lr * 0.5 * (1.0 + std::cos(progress * 3.14159265358979323846));
}

void Optimizer::step(std::span<const std::span<double>> params,
                     std::span<const std::span<const double>> grads, double lr) {
  if (params.size() != grads.size()) raise(kModule, "optimizer param/grad tensor count mismatch");
  if (first_moment_.empty()) {
    first_moment_.reserve(params.size());
    second_moment_.reserve(params.size());
    for (const auto& p : params) {
      first_moment_.emplace_back(p.size(), 0.0);
      second_moment_.emplace_back(p.size(), 0.0);
    }
  }
  if (params.size() != first_moment_.size()) {
    raise(kModule, "optimizer called with a different tensor count than its state");
  }
  ++step_count_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    auto& m = first_moment_[t];
    auto& v = second_moment_[t];
    if (p.size() != g.size() || p.size() != m.size()) {
      raise(kModule, "optimizer shape mismatch on tensor " + std::to_string(t));
    }
    ensure_finite(g, "optimizer gradient");
    if (config_.mode == OptimizerMode::AdamW && config_.weight_decay != 0.0) {
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * config_.weight_decay * p[i];
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
    ensure_finite(p, "optimizer updated parameters");
  }
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f, const Vector& at,
                        double h) {
  if (!(h > 0.0)) raise(kModule, "finite_diff_grad needs h > 0");
  Vector grad(at.size());
  Vector x = at;
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double f_plus = f(x);
    x[i] = orig - h;
    const double f_minus = f(x);
    x[i] = orig;
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
      raise(kModule, "finite_diff_grad evaluated a non-finite loss");
    }
    grad[i] = (f_plus - f_minus) / (2.0 * h);
  }
  return grad;
}

std::vector<double> accumulate_gradients(const std::vector<std::vector<double>>& micro_grads) {
  if (micro_grads.empty()) raise(kModule, "accumulate_gradients on an empty list");
  const std::size_t n = micro_grads.front().size();
  std::vector<double> mean(n, 0.0);
  for (const auto& g : micro_grads) {
    if (g.size() != n) raise(kModule, "accumulate_gradients shape mismatch");
    for (std::size_t i = 0; i < n; ++i) mean[i] += g[i];
  }
  const double inv = 1.0 / static_cast<double>(micro_grads.size());
  for (double& x : mean) x *= inv;
  return mean;
}

}  // namespace xdl
