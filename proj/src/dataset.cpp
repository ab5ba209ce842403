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
#include "xdl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "xdl/error.hpp"

namespace xdl {

namespace {
constexpr const char* kModule = "dataset";

Vector unit_prototype(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector p(dim);
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      p[i] = normal(rng);
      norm_sq += p[i] * p[i];
    }
  } while (norm_sq == 0.0);
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (std::size_t i = 0; i < dim; ++i) p[i] *= inv;
  return p;
}

double canonical9(double value) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return std::strtod(buf, nullptr);
}

Vector noisy_view(const Vector& prototype, double strength, double sigma,
                  std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sigma);
  Vector v(prototype.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = canonical9(strength * prototype[i] + normal(rng));
  }
  return v;
}

}  // namespace

const char* split_name(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Analysis: return "analysis";
    case Split::Test: return "test";
  }
  return "?";
}

const char* modality_name(Modality modality) {
  return modality == Modality::Audio ? "audio" : "visual";
}

void ScenarioSpec::validate() const {
  if (num_classes < 2) raise(kModule, "scenario needs at least 2 classes");
  if (audio_dim == 0 || visual_dim == 0) raise(kModule, "scenario view dimensions must be positive");
  if (audio_strength.size() != num_classes || visual_strength.size() != num_classes) {
    raise(kModule, "scenario strength arrays must have one entry per class");
  }
  if (class_weights.size() != num_classes) {
    raise(kModule, "scenario class_weights must have one entry per class");
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (!(audio_strength[c] >= 0.0) || !std::isfinite(audio_strength[c]) ||
        !(visual_strength[c] >= 0.0) || !std::isfinite(visual_strength[c])) {
      raise(kModule, "scenario strengths must be finite and >= 0");
    }
    if (!(class_weights[c] > 0.0) || !std::isfinite(class_weights[c])) {
      raise(kModule, "scenario class weights must be finite and > 0");
    }
  }
  if (!(noise_sigma > 0.0)) raise(kModule, "scenario noise_sigma must be > 0");
  if (train_per_class == 0 || analysis_per_class == 0 || test_per_class == 0) {
    raise(kModule, "scenario needs at least one sample per class in every split");
  }
}

std::size_t ScenarioSpec::per_class_count(Split split, std::size_t class_id) const {
  std::size_t base = 0;
  switch (split) {
    case Split::Train: base = train_per_class; break;
    case Split::Analysis: base = analysis_per_class; break;
    case Split::Test: base = test_per_class; break;
  }
  double weight_sum = 0.0;
  for (double w : class_weights) weight_sum += w;
  const double share = class_weights[class_id] * static_cast<double>(num_classes) / weight_sum;
  const auto count = static_cast<std::size_t>(
      std::llround(static_cast<double>(base) * share));
  return std::max<std::size_t>(1, count);
}

std::vector<const Scene*> SceneSet::split_scenes(Split split) const {
  std::vector<const Scene*> out;
  for (const Scene& s : scenes) {
    if (s.split == split) out.push_back(&s);
  }
  return out;
}

std::size_t SceneSet::count(Split split) const {
  std::size_t n = 0;
  for (const Scene& s : scenes) n += (s.split == split) ? 1 : 0;
  return n;
}

SceneSet generate(const ScenarioSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);

  std::vector<Vector> audio_protos, visual_protos;
  audio_protos.reserve(spec.num_classes);
  visual_protos.reserve(spec.num_classes);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    audio_protos.push_back(unit_prototype(spec.audio_dim, rng));
    visual_protos.push_back(unit_prototype(spec.visual_dim, rng));
  }

  SceneSet set;
  set.spec = spec;
  set.class_names.reserve(spec.num_classes);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    char name[32];
    std::snprintf(name, sizeof name, "class_%02zu", c);
    set.class_names.emplace_back(name);
  }

  std::int64_t next_id = 0;
  for (Split split : {Split::Train, Split::Analysis, Split::Test}) {
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
      const std::size_t count = spec.per_class_count(split, c);
      for (std::size_t i = 0; i < count; ++i) {
        Scene scene;
        scene.id = next_id++;
        scene.class_id = c;
        scene.split = split;
        scene.audio_view = noisy_view(audio_protos[c], spec.audio_strength[c], spec.noise_sigma, rng);
        scene.visual_view =
            noisy_view(visual_protos[c], spec.visual_strength[c], spec.noise_sigma, rng);
        set.scenes.push_back(std::move(scene));
      }
    }
  }
  return set;
}

ScenarioSpec default_scenario(std::uint64_t seed) {
  // Three archetype groups of 10; strengths calibrated once against the
  // acceptance thresholds (base training leaves visual-strong classes
  // under-learned on the audio side, which distillation then recovers).
  ScenarioSpec spec;
  spec.num_classes = 30;
  spec.audio_dim = 64;
  spec.visual_dim = 64;
  spec.noise_sigma = 0.35;
  spec.train_per_class = 500;  // ~10:1 against the analysis split
  spec.analysis_per_class = 50;
  spec.test_per_class = 50;
  spec.seed = seed;
  spec.audio_strength.assign(30, 0.0);
  spec.visual_strength.assign(30, 0.0);
  spec.class_weights.assign(30, 1.0);
  for (std::size_t c = 0; c < 10; ++c) {  // both-strong
    spec.audio_strength[c] = 3.3;
    spec.visual_strength[c] = 3.3;
  }
  for (std::size_t c = 10; c < 20; ++c) {  // audio-strong
    spec.audio_strength[c] = 3.3;
    spec.visual_strength[c] = 1.4;
  }
  for (std::size_t c = 20; c < 30; ++c) {  // visual-strong
    spec.audio_strength[c] = 0.8;
    spec.visual_strength[c] = 3.3;
  }
  return spec;
}

std::vector<double> class_frequencies(const SceneSet& set) {
  if (set.scenes.empty()) raise(kModule, "class_frequencies on an empty scene set");
  std::vector<double> counts(set.spec.num_classes, 0.0);
  std::size_t total = 0;
  for (const Scene& s : set.scenes) {
    if (s.split != Split::Train) continue;
    counts[s.class_id] += 1.0;
    ++total;
  }
  if (total == 0) raise(kModule, "class_frequencies: train split is empty");
  for (double& c : counts) c /= static_cast<double>(total);
  return counts;
}

std::string format_feature_value(double value) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_features(const SceneSet& set, std::ostream& out) {
  out << "#xdl v1 C=" << set.spec.num_classes << " Da=" << set.spec.audio_dim
      << " Dv=" << set.spec.visual_dim << "\n";
  for (const Scene& s : set.scenes) {
    out << s.id << ',' << s.class_id << ',' << split_name(s.split) << ',';
    for (std::size_t i = 0; i < s.audio_view.size(); ++i) {
      if (i) out << ';';
      out << format_feature_value(s.audio_view[i]);
    }
    out << ',';
    for (std::size_t i = 0; i < s.visual_view.size(); ++i) {
      if (i) out << ';';
      out << format_feature_value(s.visual_view[i]);
    }
    out << '\n';
  }
}

void write_features(const SceneSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(kModule, "cannot open " + path + " for writing");
  write_features(set, out);
}

namespace {

Vector parse_view(const std::string& field, std::size_t expected_dim, std::int64_t scene_id,
                  std::size_t line_no) {
  std::size_t dim = field.empty() ? 0 : 1;
  for (char ch : field) dim += (ch == ';') ? 1 : 0;
  if (dim != expected_dim) {
    raise(kModule, "line " + std::to_string(line_no) + ": scene " + std::to_string(scene_id) +
                       " has a view of dimension " + std::to_string(dim) + ", expected " +
                       std::to_string(expected_dim));
  }
  Vector v(dim);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    std::size_t next = field.find(';', pos);
    if (next == std::string::npos) next = field.size();
    const std::string token = field.substr(pos, next - pos);
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (token.empty() || end == token.c_str() || *end != '\0' || !std::isfinite(value)) {
      raise(kModule, "line " + std::to_string(line_no) + ": bad feature value '" + token +
                         "' in scene " + std::to_string(scene_id));
    }
    v[i] = value;
    pos = next + 1;
  }
  return v;
}

}  // namespace

SceneSet ingest_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(kModule, "cannot open feature file " + path);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) raise(kModule, path + ": no scenes (empty file)");
  ++line_no;

  std::size_t num_classes = 0, audio_dim = 0, visual_dim = 0;
  if (std::sscanf(line.c_str(), "#xdl v1 C=%zu Da=%zu Dv=%zu", &num_classes, &audio_dim,
                  &visual_dim) != 3) {
    raise(kModule, "line 1: malformed header '" + line + "'");
  }
  if (num_classes < 2 || audio_dim == 0 || visual_dim == 0) {
    raise(kModule, "line 1: degenerate header dimensions");
  }

  SceneSet set;
  set.spec.num_classes = num_classes;
  set.spec.audio_dim = audio_dim;
  set.spec.visual_dim = visual_dim;
  set.spec.audio_strength.assign(num_classes, 0.0);
  set.spec.visual_strength.assign(num_classes, 0.0);
  set.spec.class_weights.assign(num_classes, 1.0);
  set.spec.train_per_class = 1;
  set.spec.analysis_per_class = 1;
  set.spec.test_per_class = 1;
  for (std::size_t c = 0; c < num_classes; ++c) {
    char name[32];
    std::snprintf(name, sizeof name, "class_%02zu", c);
    set.class_names.emplace_back(name);
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string fields[5];
    std::size_t pos = 0;
    for (int f = 0; f < 5; ++f) {
      std::size_t next = (f < 4) ? line.find(',', pos) : line.size();
      if (next == std::string::npos) {
        raise(kModule, "line " + std::to_string(line_no) + ": expected 5 comma-separated fields");
      }
      fields[f] = line.substr(pos, next - pos);
      pos = next + 1;
    }

    Scene scene;
    char* end = nullptr;
    scene.id = std::strtoll(fields[0].c_str(), &end, 10);
    if (end == fields[0].c_str() || *end != '\0') {
      raise(kModule, "line " + std::to_string(line_no) + ": bad scene id '" + fields[0] + "'");
    }
    const long class_id = std::strtol(fields[1].c_str(), &end, 10);
    if (end == fields[1].c_str() || *end != '\0' || class_id < 0 ||
        static_cast<std::size_t>(class_id) >= num_classes) {
      raise(kModule, "line " + std::to_string(line_no) + ": class id '" + fields[1] +
                         "' outside [0, " + std::to_string(num_classes) + ")");
    }
    scene.class_id = static_cast<std::size_t>(class_id);
    if (fields[2] == "train") {
      scene.split = Split::Train;
    } else if (fields[2] == "analysis") {
      scene.split = Split::Analysis;
    } else if (fields[2] == "test") {
      scene.split = Split::Test;
    } else {
      raise(kModule, "line " + std::to_string(line_no) + ": unknown split tag '" + fields[2] + "'");
    }
    scene.audio_view = parse_view(fields[3], audio_dim, scene.id, line_no);
    scene.visual_view = parse_view(fields[4], visual_dim, scene.id, line_no);
    set.scenes.push_back(std::move(scene));
  }
  if (set.scenes.empty()) raise(kModule, path + ": no scenes");

  std::vector<std::int64_t> ids;
  ids.reserve(set.scenes.size());
  for (const Scene& s : set.scenes) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] == ids[i - 1]) raise(kModule, "duplicate scene id " + std::to_string(ids[i]));
  }
  return set;
}

}  // namespace xdl
