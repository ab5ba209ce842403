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
#include <iosfwd>
#include <string>
#include <vector>

#include "xdl/numerics.hpp"

namespace xdl {

enum class Split { Train, Analysis, Test };

const char* split_name(Split split);

enum class Modality { Audio, Visual };

const char* modality_name(Modality modality);

/// Per-class knobs of the synthetic dual-modality world. A class is one
/// acoustic event type; its audio_strength / visual_strength set how
/// separable it is from each modality alone (signal scale against
/// spherical noise of width noise_sigma).
struct ScenarioSpec {
  std::size_t num_classes = 0;
  std::size_t audio_dim = 0;
  std::size_t visual_dim = 0;
  std::vector<double> audio_strength;   // per class, >= 0
  std::vector<double> visual_strength;  // per class, >= 0
  double noise_sigma = 0.35;
  std::vector<double> class_weights;  // relative frequency, > 0
  std::size_t train_per_class = 0;
  std::size_t analysis_per_class = 0;
  std::size_t test_per_class = 0;
  std::uint64_t seed = 0;

  void validate() const;  // throws Error("dataset", ...) on a degenerate spec
  std::size_t per_class_count(Split split, std::size_t class_id) const;
};

/// One acoustic event observed through both modalities.
struct Scene {
  std::int64_t id = 0;
  std::size_t class_id = 0;
  Vector audio_view;
  Vector visual_view;
  Split split = Split::Train;

  const Vector& view(Modality modality) const {
    return modality == Modality::Audio ? audio_view : visual_view;
  }
};

struct SceneSet {
  ScenarioSpec spec;
  std::vector<Scene> scenes;
  std::vector<std::string> class_names;

  std::vector<const Scene*> split_scenes(Split split) const;
  std::size_t count(Split split) const;
};

/// Draws one fixed unit prototype per class and modality, then emits
/// prototype-plus-noise views for every split. Deterministic per seed;
/// view elements are canonicalized to their 9-significant-digit decimal
/// representation so feature-file export/ingest round-trips bit-exactly.
SceneSet generate(const ScenarioSpec& spec);

/// The committed desk-scale scenario: 30 classes in three archetype
/// groups of 10 (both-strong / audio-strong / visual-strong), 64-dim
/// views, 500/50/50 scenes per class. Calibrated once against the
/// acceptance thresholds and frozen.
ScenarioSpec default_scenario(std::uint64_t seed = 1);

/// Empirical label frequencies over the Train split, normalized to 1.
std::vector<double> class_frequencies(const SceneSet& set);

/// Line-oriented feature file (see write_features for the format).
SceneSet ingest_features(const std::string& path);

void write_features(const SceneSet& set, const std::string& path);
void write_features(const SceneSet& set, std::ostream& out);

/// Canonical 9-significant-digit decimal form used by the feature file.
std::string format_feature_value(double value);

}  // namespace xdl
