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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xdl/dataset.hpp"
#include "xdl/numerics.hpp"

namespace xdl {

/// Low-rank delta on a host weight matrix: W_eff = W + (alpha/rank) B A.
/// B starts at zero so attaching an adapter leaves the forward pass
/// bit-identical.
struct LoraAdapter {
  Matrix a;  // rank x in
  Matrix b;  // out x rank
  std::size_t rank = 0;
  double alpha = 0.0;

  double scaling() const { return alpha / static_cast<double>(rank); }
};

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
  std::optional<LoraAdapter> adapter;

  Matrix effective_weight() const;
};

/// Gradients mirroring a model's trainable parameters. In finetuning
/// mode only the adapter slots are populated; host weight/bias slots
/// stay empty.
struct Gradients {
  struct LayerGrads {
    Matrix weight;
    Vector bias;
    Matrix adapter_a;
    Matrix adapter_b;
  };
  std::vector<LayerGrads> layers;
};

/// Tanh MLP classifier over one modality's view. The smooth
/// nonlinearity keeps central finite differences valid everywhere,
/// which the gradient oracle relies on.
class MlpClassifier {
 public:
  MlpClassifier() = default;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t layer_count() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return layers_[i]; }
  const Layer& layer(std::size_t i) const { return layers_[i]; }
  Modality modality() const noexcept { return modality_; }
  void set_modality(Modality m) noexcept { modality_ = m; }
  bool finetune_mode() const noexcept { return finetune_mode_; }
  void set_finetune_mode(bool on);
  bool has_adapters() const;

  Vector forward(const Vector& view) const;

  /// Hand-derived backprop for dLoss/dLogits. Recomputes the forward
  /// pass internally; respects finetune-mode freezing.
  Gradients backward(const Vector& view, const Vector& dloss_dlogits) const;

  /// Views over trainable parameters / matching gradient slots, in a
  /// fixed order shared with the optimizer.
  std::vector<std::span<double>> trainable_params();
  std::vector<std::span<const double>> gradient_views(const Gradients& grads) const;

  /// Flattened copy of the gradients in trainable order (for averaging).
  std::vector<double> flatten(const Gradients& grads) const;
  Gradients unflatten(const std::vector<double>& flat) const;

  friend MlpClassifier init_classifier(std::size_t input_dim,
                                       const std::vector<std::size_t>& hidden_dims,
                                       std::size_t num_classes, std::uint64_t seed,
                                       Modality modality);

 private:
  std::vector<Layer> layers_;
  Modality modality_ = Modality::Audio;
  bool finetune_mode_ = false;
};

/// Fan-in-scaled random weights (std = 1/sqrt(fan_in)), zero biases.
/// Empty hidden_dims gives a linear model.
MlpClassifier init_classifier(std::size_t input_dim, const std::vector<std::size_t>& hidden_dims,
                              std::size_t num_classes, std::uint64_t seed,
                              Modality modality = Modality::Audio);

/// Attaches a rank-r adapter to every weight matrix. A is random at
/// std 1/sqrt(in), B is exactly zero, so the forward pass is unchanged.
void attach_lora(MlpClassifier& model, std::size_t rank, double alpha, std::uint64_t seed);

/// Folds every adapter delta into its host weight and removes it.
void merge_lora(MlpClassifier& model);
void detach_lora(MlpClassifier& model);

struct TrainHyper {
  std::size_t epochs = 1;
  double lr = 1e-3;
  std::size_t batch = 64;
  double warmup_fraction = 0.1;
  OptimizerMode optimizer = OptimizerMode::Adam;
  double weight_decay = 0.01;
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean CE per epoch
};

/// Mini-batch cross-entropy training on one split/modality with the
/// cosine schedule. Deterministic per seed.
TrainResult train_classifier(MlpClassifier& model, const SceneSet& set, Split split,
                             Modality modality, const TrainHyper& hyper);

/// Versioned binary checkpoint; load(save(m)) == m bit-exactly.
void save_checkpoint(const MlpClassifier& model, const std::string& path);
MlpClassifier load_checkpoint(const std::string& path);

bool models_equal(const MlpClassifier& a, const MlpClassifier& b);

}  // namespace xdl
