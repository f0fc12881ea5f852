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

#include "mtbr/params.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mtbr/error.h"
#include "mtbr/tagset.h"

namespace mtbr {

double UniformUnit(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

ParamId ParameterStore::Add(const std::string &name, size_t rows, size_t cols,
                            Init init) {
  if (Find(name)) {
    throw Error(ErrorCode::kBadConfig, "duplicate parameter " + name);
  }
  Matrix m(rows, cols);
  if (init == Init::kGlorotUniform) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (auto &v : m.data()) v = (2.0 * UniformUnit(rng_) - 1.0) * limit;
  }
  entries_.push_back({name, std::move(m)});
  grads_.emplace_back(rows, cols);
  return entries_.size() - 1;
}

std::optional<ParamId> ParameterStore::Find(const std::string &name) const {
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

ParamId ParameterStore::Require(const std::string &name) const {
  auto id = Find(name);
  if (!id) throw Error(ErrorCode::kNotFound, "parameter " + name);
  return *id;
}

void ParameterStore::ZeroGrads() { ZeroGradients(grads_); }

Gradients ParameterStore::MakeGradients() const {
  Gradients g;
  g.reserve(entries_.size());
  for (const auto &e : entries_) g.emplace_back(e.value.rows(), e.value.cols());
  return g;
}

size_t ParameterStore::ScalarCount() const {
  size_t n = 0;
  for (const auto &e : entries_) n += e.value.size();
  return n;
}

void ZeroGradients(Gradients &g) {
  for (auto &m : g) m.Fill(0.0);
}

void AddGradients(Gradients &dst, const Gradients &src, double scale) {
  for (size_t p = 0; p < dst.size(); ++p) {
    auto &d = dst[p].data();
    const auto &s = src[p].data();
    for (size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
  }
}

Optimizer::Optimizer(OptimizerConfig cfg) : cfg_(cfg) {
  if (!(cfg_.learning_rate > 0.0)) {
    throw Error(ErrorCode::kBadConfig, "learning_rate must be > 0");
  }
}

void Optimizer::Step(ParameterStore &store, std::span<const ParamId> which) {
  if (cfg_.kind == OptimizerKind::kAdam && adam_.size() < store.size()) {
    adam_.resize(store.size());
  }
  for (ParamId id : which) {
    auto &w = store.value(id).data();
    const auto &g = store.grad(id).data();
    if (cfg_.kind == OptimizerKind::kSgd) {
      for (size_t i = 0; i < w.size(); ++i) {
        w[i] -= cfg_.learning_rate * (g[i] + cfg_.weight_decay * w[i]);
      }
      continue;
    }
    auto &st = adam_[id];
    if (st.m.empty()) {
      st.m = Matrix(store.value(id).rows(), store.value(id).cols());
      st.v = st.m;
    }
    ++st.t;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(st.t));
    auto &m = st.m.data();
    auto &v = st.v.data();
    for (size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] + cfg_.weight_decay * w[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
}

void Optimizer::StepAll(ParameterStore &store) {
  std::vector<ParamId> all(store.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  Step(store, all);
}

GradCheckResult GradientCheck(
    ParameterStore &store, const LossFunction &loss, double eps, double floor,
    const std::function<bool(const std::string &)> &filter) {
  store.ZeroGrads();
  const double base = loss(store, true);
  if (!std::isfinite(base)) {
    throw Error(ErrorCode::kNonFiniteLoss, "loss at base point");
  }
  const Gradients analytic = store.grads();

  GradCheckResult res;
  for (ParamId id = 0; id < store.size(); ++id) {
    if (filter && !filter(store.name(id))) continue;
    auto &w = store.value(id).data();
    for (size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      w[i] = saved + eps;
      const double up = loss(store, false);
      w[i] = saved - eps;
      const double down = loss(store, false);
      w[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw Error(ErrorCode::kNonFiniteLoss,
                    "perturbing " + store.name(id) + "[" + std::to_string(i) +
                        "]");
      }
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[id][i];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), floor});
      const double rel = std::abs(a - numeric) / denom;
      ++res.components_checked;
      if (res.worst_param.empty() || rel > res.max_rel_error) {
        res.max_rel_error = rel;
        res.worst_param = store.name(id);
        res.worst_index = i;
        res.worst_analytic = a;
        res.worst_numeric = numeric;
      }
    }
  }
  store.grads() = analytic;
  return res;
}

namespace {

constexpr char kMagic[8] = {'M', 'T', 'B', 'R', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void Put(std::ostream &os, T v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

void PutString(std::ostream &os, const std::string &s) {
  Put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T Get(std::istream &is, const std::string &path) {
  T v{};
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!is) throw Error(ErrorCode::kIo, "truncated checkpoint " + path);
  return v;
}

std::string GetString(std::istream &is, const std::string &path) {
  auto n = Get<std::uint32_t>(is, path);
  if (n > (1u << 28)) throw Error(ErrorCode::kIo, "corrupt checkpoint " + path);
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw Error(ErrorCode::kIo, "truncated checkpoint " + path);
  return s;
}

}  // namespace

void SaveCheckpoint(const std::string &path, const ParameterStore &store) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
  os.write(kMagic, sizeof(kMagic));
  Put<std::uint32_t>(os, kCheckpointVersion);
  Put<std::uint32_t>(os, kNumNerLabels);
  for (auto name : kNerLabelNames) PutString(os, std::string(name));
  Put<std::uint64_t>(os, store.seed());
  std::ostringstream rng_state;
  rng_state << store.rng();
  PutString(os, rng_state.str());
  Put<std::uint32_t>(os, static_cast<std::uint32_t>(store.size()));
  for (ParamId id = 0; id < store.size(); ++id) {
    const auto &m = store.value(id);
    PutString(os, store.name(id));
    Put<std::uint32_t>(os, static_cast<std::uint32_t>(m.rows()));
    Put<std::uint32_t>(os, static_cast<std::uint32_t>(m.cols()));
    os.write(reinterpret_cast<const char *>(m.data().data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  if (!os) throw Error(ErrorCode::kIo, "write failed for " + path);
}

void LoadCheckpoint(const std::string &path, ParameterStore &store) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kIo, path + " is not a checkpoint");
  }
  if (Get<std::uint32_t>(is, path) != kCheckpointVersion) {
    throw Error(ErrorCode::kIo, "unsupported checkpoint version in " + path);
  }
  auto n_labels = Get<std::uint32_t>(is, path);
  if (n_labels != kNumNerLabels) {
    throw Error(ErrorCode::kShapeMismatch, "tag set size differs");
  }
  for (auto name : kNerLabelNames) {
    if (GetString(is, path) != name) {
      throw Error(ErrorCode::kShapeMismatch, "tag set order differs");
    }
  }
  store.set_seed(Get<std::uint64_t>(is, path));
  std::istringstream rng_state(GetString(is, path));
  rng_state >> store.rng();
  auto n = Get<std::uint32_t>(is, path);
  if (n != store.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "checkpoint has " + std::to_string(n) + " parameters, model " +
                    std::to_string(store.size()));
  }
  for (ParamId id = 0; id < n; ++id) {
    auto name = GetString(is, path);
    auto rows = Get<std::uint32_t>(is, path);
    auto cols = Get<std::uint32_t>(is, path);
    auto &m = store.value(id);
    if (name != store.name(id) || rows != m.rows() || cols != m.cols()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "parameter " + name + " " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " does not match " +
                      store.name(id) + " " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()));
    }
    is.read(reinterpret_cast<char *>(m.data().data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!is) throw Error(ErrorCode::kIo, "truncated checkpoint " + path);
  }
}

}  // namespace mtbr
