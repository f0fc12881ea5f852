// Copyright 2026 The MTBR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MTBR_PARAMS_H_
#define MTBR_PARAMS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mtbr/tensor.h"

namespace mtbr {

using ParamId = size_t;

// One gradient matrix per parameter, aligned with ParameterStore ids.
using Gradients = std::vector<Matrix>;

enum class Init { kGlorotUniform, kZeros };

// Named trainable matrices with same-shape gradient accumulators.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0) : seed_(seed), rng_(seed) {}

  ParamId Add(const std::string &name, size_t rows, size_t cols, Init init);

  size_t size() const { return entries_.size(); }
  const std::string &name(ParamId id) const { return entries_[id].name; }
  std::optional<ParamId> Find(const std::string &name) const;
  ParamId Require(const std::string &name) const;

  Matrix &value(ParamId id) { return entries_[id].value; }
  const Matrix &value(ParamId id) const { return entries_[id].value; }
  Matrix &grad(ParamId id) { return grads_[id]; }
  const Matrix &grad(ParamId id) const { return grads_[id]; }
  Gradients &grads() { return grads_; }
  const Gradients &grads() const { return grads_; }

  void ZeroGrads();
  // Fresh zero buffer shaped like the store.
  Gradients MakeGradients() const;

  size_t ScalarCount() const;
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t s) { seed_ = s; }
  std::mt19937_64 &rng() { return rng_; }
  const std::mt19937_64 &rng() const { return rng_; }

 private:
  struct Entry {
    std::string name;
    Matrix value;
  };
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::vector<Entry> entries_;
  Gradients grads_;
};

// Uniform double in [0, 1) from the top 53 bits; identical on every
// standard library.
double UniformUnit(std::mt19937_64 &rng);

void ZeroGradients(Gradients &g);
// dst += src * scale
void AddGradients(Gradients &dst, const Gradients &src, double scale = 1.0);

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 5e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// SGD or Adam over a subset of the store. Weight decay is added to the
// gradient (L2). Adam keeps a per-parameter step count so parameters
// stepped in only some phases get correct bias correction.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg);

  const OptimizerConfig &config() const { return cfg_; }
  void Step(ParameterStore &store, std::span<const ParamId> which);
  void StepAll(ParameterStore &store);

 private:
  struct AdamState {
    Matrix m;
    Matrix v;
    std::int64_t t = 0;
  };
  OptimizerConfig cfg_;
  std::vector<AdamState> adam_;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  size_t components_checked = 0;
};

// The loss callback evaluates the loss at the store's current values. When
// `with_grad` is true it must also accumulate the analytic gradient into
// store.grads().
using LossFunction = std::function<double(ParameterStore &, bool with_grad)>;

// Compares analytic gradients to central differences (f(x+e)-f(x-e))/2e for
// every component (or only those whose parameter name passes `filter`).
// Relative error is |a-n| / max(|a|, |n|, floor). Throws kNonFiniteLoss.
GradCheckResult GradientCheck(
    ParameterStore &store, const LossFunction &loss, double eps = 1e-6,
    double floor = 1e-6,
    const std::function<bool(const std::string &)> &filter = {});

// Binary checkpoint. Layout (little-endian):
//   "MTBRCKPT"  u32 version(=1)
//   u32 n_labels, then per label: u32 len + bytes      (TagSet order)
//   u64 seed, u32 len + bytes of the RNG state text
//   u32 n_params, then per param:
//     u32 name_len + name bytes, u32 rows, u32 cols, rows*cols f64
void SaveCheckpoint(const std::string &path, const ParameterStore &store);
// Values are copied into an already-constructed store; names and shapes
// must match exactly.
void LoadCheckpoint(const std::string &path, ParameterStore &store);

}  // namespace mtbr

#endif  // MTBR_PARAMS_H_
