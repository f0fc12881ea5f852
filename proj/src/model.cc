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

#include "mtbr/model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>

#include <spdlog/spdlog.h>

#include "mtbr/error.h"
#include "mtbr/ops.h"
#include "mtbr/tagset.h"

namespace mtbr {

void HyperParams::Validate() const {
  if (d_emb < 1 || d_hidden < 1 || d_task < 1) {
    throw Error(ErrorCode::kBadConfig, "dimensions must be positive");
  }
  if (w1 < 0.0 || w1 > 1.0) throw Error(ErrorCode::kBadConfig, "w1 not in [0,1]");
  if (alpha < 0.0 || alpha > 1.0) {
    throw Error(ErrorCode::kBadConfig, "alpha not in [0,1]");
  }
  if (max_len < 1) throw Error(ErrorCode::kBadConfig, "max_len must be >= 1");
}

nlohmann::json HyperParams::ToJson() const {
  return {{"d_emb", d_emb}, {"d_hidden", d_hidden}, {"d_task", d_task},
          {"w1", w1},       {"alpha", alpha},       {"max_len", max_len},
          {"seed", seed}};
}

HyperParams HyperParams::FromJson(const nlohmann::json &j) {
  HyperParams hp;
  hp.d_emb = j.value("d_emb", hp.d_emb);
  hp.d_hidden = j.value("d_hidden", hp.d_hidden);
  hp.d_task = j.value("d_task", hp.d_task);
  hp.w1 = j.value("w1", hp.w1);
  hp.alpha = j.value("alpha", hp.alpha);
  hp.max_len = j.value("max_len", hp.max_len);
  hp.seed = j.value("seed", hp.seed);
  hp.Validate();
  return hp;
}

nlohmann::json Variant::ToJson() const {
  return {{"disable_bd", disable_bd},
          {"disable_revision", disable_revision},
          {"disable_gate", disable_gate},
          {"disable_random", disable_random}};
}

Variant Variant::FromJson(const nlohmann::json &j) {
  Variant v;
  v.disable_bd = j.value("disable_bd", false);
  v.disable_revision = j.value("disable_revision", false);
  v.disable_gate = j.value("disable_gate", false);
  v.disable_random = j.value("disable_random", false);
  return v;
}

std::vector<NamedVariant> AblationVariants() {
  Variant no_bd;
  no_bd.disable_bd = true;
  Variant no_rev;
  no_rev.disable_revision = true;
  // The gated ignoring mechanism is the gate plus the random draw.
  Variant no_gate;
  no_gate.disable_gate = true;
  no_gate.disable_random = true;
  Variant no_random;
  no_random.disable_random = true;
  return {{"w/o Boundary Detection", no_bd},
          {"w/o Bi-Revision", no_rev},
          {"w/o Gated Ignoring Mechanism", no_gate},
          {"w/o Random Probability", no_random},
          {"MTBR", Variant{}}};
}

NamedVariant VariantByName(const std::string &name) {
  static const std::vector<std::pair<std::string, int>> kAliases = {
      {"no-bd", 0}, {"no-revision", 1}, {"no-gate", 2}, {"no-random", 3},
      {"full", 4}};
  auto rows = AblationVariants();
  for (const auto &r : rows) {
    if (r.name == name) return r;
  }
  for (const auto &[alias, idx] : kAliases) {
    if (alias == name) return rows[idx];
  }
  throw Error(ErrorCode::kBadConfig, "unknown variant '" + name + "'");
}

std::string_view PhaseName(Phase p) { return p == Phase::kBd ? "bd" : "ner"; }

std::vector<BoundaryPair> PairBoundaries(std::span<const int> start_flags,
                                         std::span<const int> end_flags) {
  const int n = static_cast<int>(start_flags.size());
  std::vector<BoundaryPair> spans;
  for (int i = 0; i < n; ++i) {
    if (!start_flags[i]) continue;
    int next_start = i + 1;
    while (next_start < n && !start_flags[next_start]) ++next_start;
    for (int j = i; j < next_start; ++j) {
      if (end_flags[j]) {
        spans.emplace_back(i, j);
        break;
      }
    }
  }
  return spans;
}

std::vector<int> BoundaryFlags(const Matrix &p) {
  std::vector<int> flags(p.rows());
  for (size_t t = 0; t < p.rows(); ++t) flags[t] = p(t, 1) > p(t, 0) ? 1 : 0;
  return flags;
}

Vector SpanMean(const Matrix &H, int start, int end) {
  Vector v(H.cols(), 0.0);
  for (int t = start; t <= end; ++t) {
    for (size_t c = 0; c < H.cols(); ++c) v[c] += H(t, c);
  }
  const double n = end - start + 1;
  for (auto &x : v) x /= n;
  return v;
}

Vector SpanSoftLabel(std::span<const int> span_tags, int start, int end) {
  Vector y(kNumSpanTags, 0.0);
  for (int t = start; t <= end; ++t) y[span_tags[t]] += 1.0;
  const double n = end - start + 1;
  for (auto &x : y) x /= n;
  return y;
}

Matrix TransformSpanProbs(std::span<const BoundaryPair> spans,
                          const Matrix &p_sp, int length) {
  Matrix out(length, kNumNerLabels);
  for (size_t s = 0; s < spans.size(); ++s) {
    const auto [i, j] = spans[s];
    for (int t = i; t <= j; ++t) {
      for (int k = 0; k < kNumSpanTags; ++k) {
        out(t, TransformSlot(k, t == i)) = p_sp(s, k);
      }
    }
  }
  return out;
}

Matrix BiRevise(const Matrix &p_ner, std::span<const double> gate,
                const Matrix &p_new_sp) {
  if (!p_ner.SameShape(p_new_sp) || gate.size() != p_ner.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "bi-revision inputs");
  }
  Matrix out = p_ner;
  for (size_t t = 0; t < out.rows(); ++t) {
    for (size_t k = 0; k < out.cols(); ++k) {
      out(t, k) += gate[t] * p_new_sp(t, k);
    }
  }
  return out;
}

bool UseRevision(double alpha, Mode mode, double draw) {
  if (mode == Mode::kInfer) return true;
  return !(draw > alpha);
}

Matrix RenormalizeRows(const Matrix &m) {
  Matrix out = m;
  for (size_t t = 0; t < out.rows(); ++t) {
    auto row = out.row(t);
    const double s = std::accumulate(row.begin(), row.end(), 0.0);
    if (s > 0.0) {
      for (auto &x : row) x /= s;
    }
  }
  return out;
}

double CombineBdLoss(double l_start, double l_end, double l_span, double w1) {
  return w1 * (l_start + l_end) + (1.0 - w1) * l_span;
}

Matrix ForwardTrace::BroadcastSpanProbs() const {
  Matrix out(H().rows(), kNumSpanTags);
  for (size_t s = 0; s < spans.size(); ++s) {
    for (int t = spans[s].first; t <= spans[s].second; ++t) {
      for (int k = 0; k < kNumSpanTags; ++k) out(t, k) = p_sp(s, k);
    }
  }
  return out;
}

MtbrModel::MtbrModel(const HyperParams &hp, TokenIndex tokens)
    : hp_(hp), tokens_(std::move(tokens)), store_(hp.seed) {
  hp_.Validate();
  encoder_ = std::make_unique<ReferenceEncoder>(store_, tokens_.size(),
                                                hp_.d_emb, hp_.d_hidden);
  kind_ = EncoderKind::kReference;
  AddHeads();
}

MtbrModel::MtbrModel(const HyperParams &hp, TokenIndex tokens, Matrix vectors)
    : hp_(hp), tokens_(std::move(tokens)), store_(hp.seed) {
  hp_.Validate();
  if (vectors.rows() != static_cast<size_t>(tokens_.size())) {
    throw Error(ErrorCode::kShapeMismatch, "vector table rows != vocabulary");
  }
  encoder_ = std::make_unique<PrecomputedEncoder>(store_, std::move(vectors));
  kind_ = EncoderKind::kPrecomputed;
  AddHeads();
}

void MtbrModel::AddHeads() {
  const size_t d = encoder_->output_dim();
  const size_t dt = hp_.d_task;
  auto W = [&](const std::string &n, size_t r, size_t c) {
    return store_.Add(n, r, c, Init::kGlorotUniform);
  };
  auto B = [&](const std::string &n, size_t r) {
    return store_.Add(n, r, 1, Init::kZeros);
  };
  ids_.proj_bd_w = W("proj.bd.w", dt, d);
  ids_.proj_bd_b = B("proj.bd.b", dt);
  ids_.proj_ner_w = W("proj.ner.w", dt, d);
  ids_.proj_ner_b = B("proj.ner.b", dt);
  ids_.start_w = W("bd.start.w", 2, dt);
  ids_.start_b = B("bd.start.b", 2);
  ids_.end_w = W("bd.end.w", 2, dt);
  ids_.end_b = B("bd.end.b", 2);
  ids_.span_w = W("span.w", kNumSpanTags, dt);
  ids_.span_b = B("span.b", kNumSpanTags);
  ids_.ner_w = W("ner.w", kNumNerLabels, dt);
  ids_.ner_b = B("ner.b", kNumNerLabels);
  ids_.gate_w = W("gate.w", 1, dt);
  ids_.gate_b = B("gate.b", 1);
}

std::vector<int> MtbrModel::Ids(std::span<const std::string> tokens) const {
  return tokens_.Ids(tokens);
}

Example MtbrModel::Prepare(const LabeledSentence &s) const {
  if (s.tokens.empty()) throw Error(ErrorCode::kEmptySentence, s.id);
  const size_t n = std::min<size_t>(s.tokens.size(), hp_.max_len);
  if (n < s.tokens.size()) {
    spdlog::warn("sentence {} truncated from {} to {} tokens", s.id,
                 s.tokens.size(), n);
  }
  Example ex;
  ex.ids = tokens_.Ids(std::span(s.tokens).first(n));
  ex.ner_tags = RepairBio2(std::span(s.ner_tags).first(n));
  ex.boundaries = DeriveBoundaryTargets(ex.ner_tags);
  ex.span_tags = DeriveSpanTagTargets(ex.ner_tags);
  return ex;
}

namespace {

Matrix Project(const Matrix &H, const Matrix &W, const Matrix &b) {
  Matrix out(H.rows(), W.rows());
  for (size_t t = 0; t < H.rows(); ++t) {
    ops::Affine(W, b, H.row(t), out.row(t));
    ops::TanhInPlace(out.row(t));
  }
  return out;
}

Matrix RowSoftmax(const Matrix &X, const Matrix &W, const Matrix &b) {
  Matrix out(X.rows(), W.rows());
  Vector z(W.rows());
  for (size_t t = 0; t < X.rows(); ++t) {
    ops::Affine(W, b, X.row(t), z);
    ops::Softmax(z, out.row(t));
  }
  return out;
}

Vector OneHot(int k, int n) {
  Vector v(n, 0.0);
  v[k] = 1.0;
  return v;
}

}  // namespace

void MtbrModel::ForwardBd(ForwardTrace &tr) const {
  const auto &H = tr.H();
  tr.H_bd = Project(H, store_.value(ids_.proj_bd_w), store_.value(ids_.proj_bd_b));
  tr.p_s = RowSoftmax(tr.H_bd, store_.value(ids_.start_w), store_.value(ids_.start_b));
  tr.p_e = RowSoftmax(tr.H_bd, store_.value(ids_.end_w), store_.value(ids_.end_b));
  tr.spans = PairBoundaries(BoundaryFlags(tr.p_s), BoundaryFlags(tr.p_e));
  tr.v_sp = Matrix(tr.spans.size(), tr.H_bd.cols());
  for (size_t s = 0; s < tr.spans.size(); ++s) {
    auto v = SpanMean(tr.H_bd, tr.spans[s].first, tr.spans[s].second);
    std::copy(v.begin(), v.end(), tr.v_sp.row(s).begin());
  }
  tr.p_sp = RowSoftmax(tr.v_sp, store_.value(ids_.span_w), store_.value(ids_.span_b));
  tr.has_bd = true;
}

void MtbrModel::ForwardNer(ForwardTrace &tr, const Variant &variant, Mode mode,
                           double draw) const {
  const auto &H = tr.H();
  const size_t L = H.rows();
  tr.H_ner = Project(H, store_.value(ids_.proj_ner_w), store_.value(ids_.proj_ner_b));
  tr.p_ner = RowSoftmax(tr.H_ner, store_.value(ids_.ner_w), store_.value(ids_.ner_b));
  tr.gate.assign(L, 1.0);
  if (!variant.disable_gate) {
    const auto &gw = store_.value(ids_.gate_w);
    const auto &gb = store_.value(ids_.gate_b);
    double z = 0.0;
    for (size_t t = 0; t < L; ++t) {
      ops::Affine(gw, gb, tr.H_ner.row(t), std::span(&z, 1));
      tr.gate[t] = ops::Sigmoid(z);
    }
  }
  if (variant.revision_active() && tr.has_bd) {
    tr.p_new_sp = TransformSpanProbs(tr.spans, tr.p_sp, static_cast<int>(L));
  } else {
    tr.p_new_sp = Matrix(L, kNumNerLabels);
  }
  tr.p_ner_rev = BiRevise(tr.p_ner, tr.gate, tr.p_new_sp);
  tr.revised = variant.revision_active() &&
               (variant.disable_random || UseRevision(hp_.alpha, mode, draw));
  tr.p_final = tr.revised ? RenormalizeRows(tr.p_ner_rev) : tr.p_ner;
  tr.has_ner = true;
}

ForwardTrace MtbrModel::Forward(std::span<const int> ids,
                                const Variant &variant, Mode mode, double draw,
                                bool with_bd, bool with_ner) const {
  ForwardTrace tr;
  tr.enc = encoder_->Encode(store_, ids);
  if (with_bd) ForwardBd(tr);
  if (with_ner) ForwardNer(tr, variant, mode, draw);
  return tr;
}

void MtbrModel::BackwardProjection(const Matrix &H, const Matrix &H_task,
                                   const Matrix &dH_task, ParamId w, ParamId b,
                                   Matrix &dH, Gradients &g) const {
  const auto &W = store_.value(w);
  Vector da(H_task.cols());
  for (size_t t = 0; t < H.rows(); ++t) {
    for (size_t c = 0; c < da.size(); ++c) {
      const double h = H_task(t, c);
      da[c] = dH_task(t, c) * (1.0 - h * h);
    }
    ops::AffineBackward(W, H.row(t), da, g[w], g[b], dH.row(t));
  }
}

BdLossParts MtbrModel::BdLoss(const Example &ex, Gradients *grads) const {
  ForwardTrace tr = Forward(ex.ids, Variant{}, Mode::kTrain, 0.0, true, false);
  const size_t L = ex.ids.size();
  const double w1 = hp_.w1;
  BdLossParts parts;
  for (size_t t = 0; t < L; ++t) {
    parts.start += ops::CrossEntropy(tr.p_s.row(t), OneHot(ex.boundaries.start_flags[t], 2));
    parts.end += ops::CrossEntropy(tr.p_e.row(t), OneHot(ex.boundaries.end_flags[t], 2));
  }
  parts.start /= static_cast<double>(L);
  parts.end /= static_cast<double>(L);
  std::vector<Vector> y_sp;
  for (const auto &[i, j] : tr.spans) {
    y_sp.push_back(SpanSoftLabel(ex.span_tags, i, j));
    parts.span += ops::CrossEntropy(tr.p_sp.row(y_sp.size() - 1), y_sp.back());
  }
  parts.span_count = tr.spans.size();
  if (!tr.spans.empty()) parts.span /= static_cast<double>(tr.spans.size());
  parts.total = CombineBdLoss(parts.start, parts.end, parts.span, w1);
  if (!grads) return parts;

  auto &g = *grads;
  Matrix dH_bd(L, tr.H_bd.cols());
  Vector dp(2), dz(2);
  auto boundary_backward = [&](const Matrix &p, const std::vector<int> &flags,
                               ParamId w, ParamId b) {
    for (size_t t = 0; t < L; ++t) {
      std::fill(dp.begin(), dp.end(), 0.0);
      ops::CrossEntropyBackward(p.row(t), OneHot(flags[t], 2), w1 / L, dp);
      ops::SoftmaxBackward(p.row(t), dp, dz);
      ops::AffineBackward(store_.value(w), tr.H_bd.row(t), dz, g[w], g[b],
                          dH_bd.row(t));
    }
  };
  boundary_backward(tr.p_s, ex.boundaries.start_flags, ids_.start_w, ids_.start_b);
  boundary_backward(tr.p_e, ex.boundaries.end_flags, ids_.end_w, ids_.end_b);

  if (!tr.spans.empty()) {
    const double scale = (1.0 - w1) / static_cast<double>(tr.spans.size());
    Vector dps(kNumSpanTags), dzs(kNumSpanTags), dv(tr.H_bd.cols());
    for (size_t s = 0; s < tr.spans.size(); ++s) {
      std::fill(dps.begin(), dps.end(), 0.0);
      std::fill(dv.begin(), dv.end(), 0.0);
      ops::CrossEntropyBackward(tr.p_sp.row(s), y_sp[s], scale, dps);
      ops::SoftmaxBackward(tr.p_sp.row(s), dps, dzs);
      ops::AffineBackward(store_.value(ids_.span_w), tr.v_sp.row(s), dzs,
                          g[ids_.span_w], g[ids_.span_b], dv);
      const auto [i, j] = tr.spans[s];
      const double inv = 1.0 / static_cast<double>(j - i + 1);
      for (int t = i; t <= j; ++t) {
        for (size_t c = 0; c < dv.size(); ++c) dH_bd(t, c) += dv[c] * inv;
      }
    }
  }

  Matrix dH(L, tr.H().cols());
  BackwardProjection(tr.H(), tr.H_bd, dH_bd, ids_.proj_bd_w, ids_.proj_bd_b, dH, g);
  encoder_->Backward(store_, tr.enc, dH, g);
  return parts;
}

double MtbrModel::NerLoss(const Example &ex, const Variant &variant,
                          double draw, Gradients *grads) const {
  ForwardTrace tr = Forward(ex.ids, variant, Mode::kTrain, draw,
                            variant.revision_active(), true);
  const size_t L = ex.ids.size();
  double loss = 0.0;
  for (size_t t = 0; t < L; ++t) {
    loss += ops::CrossEntropy(tr.p_final.row(t), OneHot(ex.ner_tags[t], kNumNerLabels));
  }
  loss /= static_cast<double>(L);
  if (!grads) return loss;

  auto &g = *grads;
  const size_t dt = tr.H_ner.cols();
  Matrix dH_ner(L, dt);
  Matrix dH_bd;
  if (tr.has_bd) dH_bd = Matrix(L, dt);
  Matrix dp_new(L, kNumNerLabels);
  Vector dfinal(kNumNerLabels), dp_ner(kNumNerLabels), dz(kNumNerLabels);

  for (size_t t = 0; t < L; ++t) {
    std::fill(dfinal.begin(), dfinal.end(), 0.0);
    ops::CrossEntropyBackward(tr.p_final.row(t),
                              OneHot(ex.ner_tags[t], kNumNerLabels),
                              1.0 / static_cast<double>(L), dfinal);
    if (tr.revised) {
      // q = r / sum(r)  =>  dr_j = (dq_j - <dq, q>) / sum(r)
      const auto r = tr.p_ner_rev.row(t);
      const auto q = tr.p_final.row(t);
      const double s = std::accumulate(r.begin(), r.end(), 0.0);
      double dot = 0.0;
      for (int k = 0; k < kNumNerLabels; ++k) dot += dfinal[k] * q[k];
      double dgate = 0.0;
      for (int k = 0; k < kNumNerLabels; ++k) {
        const double dr = (dfinal[k] - dot) / s;
        dp_ner[k] = dr;
        dgate += dr * tr.p_new_sp(t, k);
        dp_new(t, k) = tr.gate[t] * dr;
      }
      if (!variant.disable_gate) {
        const double gt = tr.gate[t];
        const double da = dgate * gt * (1.0 - gt);
        ops::AffineBackward(store_.value(ids_.gate_w), tr.H_ner.row(t),
                            std::span(&da, 1), g[ids_.gate_w], g[ids_.gate_b],
                            dH_ner.row(t));
      }
    } else {
      std::copy(dfinal.begin(), dfinal.end(), dp_ner.begin());
    }
    ops::SoftmaxBackward(tr.p_ner.row(t), dp_ner, dz);
    ops::AffineBackward(store_.value(ids_.ner_w), tr.H_ner.row(t), dz,
                        g[ids_.ner_w], g[ids_.ner_b], dH_ner.row(t));
  }

  if (tr.revised && !tr.spans.empty()) {
    Vector dps(kNumSpanTags), dzs(kNumSpanTags), dv(dt);
    for (size_t s = 0; s < tr.spans.size(); ++s) {
      const auto [i, j] = tr.spans[s];
      std::fill(dps.begin(), dps.end(), 0.0);
      for (int t = i; t <= j; ++t) {
        for (int k = 0; k < kNumSpanTags; ++k) {
          dps[k] += dp_new(t, TransformSlot(k, t == i));
        }
      }
      std::fill(dv.begin(), dv.end(), 0.0);
      ops::SoftmaxBackward(tr.p_sp.row(s), dps, dzs);
      ops::AffineBackward(store_.value(ids_.span_w), tr.v_sp.row(s), dzs,
                          g[ids_.span_w], g[ids_.span_b], dv);
      const double inv = 1.0 / static_cast<double>(j - i + 1);
      for (int t = i; t <= j; ++t) {
        for (size_t c = 0; c < dt; ++c) dH_bd(t, c) += dv[c] * inv;
      }
    }
  }

  Matrix dH(L, tr.H().cols());
  BackwardProjection(tr.H(), tr.H_ner, dH_ner, ids_.proj_ner_w, ids_.proj_ner_b, dH, g);
  if (tr.has_bd && tr.revised) {
    BackwardProjection(tr.H(), tr.H_bd, dH_bd, ids_.proj_bd_w, ids_.proj_bd_b, dH, g);
  }
  encoder_->Backward(store_, tr.enc, dH, g);
  return loss;
}

double MtbrModel::PhaseLoss(const Example &ex, Phase phase,
                            const Variant &variant, double draw,
                            Gradients *grads) const {
  if (phase == Phase::kBd) return BdLoss(ex, grads).total;
  return NerLoss(ex, variant, draw, grads);
}

TagSequence MtbrModel::PredictTags(std::span<const int> ids,
                                   const Variant &variant) const {
  if (ids.empty()) return {};
  const auto clipped = ids.first(std::min<size_t>(ids.size(), hp_.max_len));
  ForwardTrace tr = Forward(clipped, variant, Mode::kInfer, 0.0,
                            variant.revision_active(), true);
  TagSequence raw(tr.p_final.rows());
  for (size_t t = 0; t < raw.size(); ++t) raw[t] = ops::Argmax(tr.p_final.row(t));
  auto tags = RepairBio2(raw);
  tags.resize(ids.size(), kO);
  return tags;
}

std::vector<EntitySpan> MtbrModel::PredictSentence(
    std::span<const std::string> tokens, const Variant &variant) const {
  return ExtractEntities(PredictTags(Ids(tokens), variant));
}

std::vector<ParamId> MtbrModel::BoundaryHeadParameters() const {
  return {ids_.start_w, ids_.start_b, ids_.end_w, ids_.end_b};
}

std::vector<ParamId> MtbrModel::PhaseParameters(Phase phase,
                                                const Variant &variant,
                                                bool freeze_bd_in_ner) const {
  std::vector<ParamId> out = encoder_->parameters();
  if (phase == Phase::kBd) {
    out.insert(out.end(), {ids_.proj_bd_w, ids_.proj_bd_b, ids_.start_w,
                           ids_.start_b, ids_.end_w, ids_.end_b, ids_.span_w,
                           ids_.span_b});
    return out;
  }
  out.insert(out.end(),
             {ids_.proj_ner_w, ids_.proj_ner_b, ids_.ner_w, ids_.ner_b});
  if (!variant.disable_gate && variant.revision_active()) {
    out.insert(out.end(), {ids_.gate_w, ids_.gate_b});
  }
  if (variant.revision_active() && !freeze_bd_in_ner) {
    out.insert(out.end(),
               {ids_.proj_bd_w, ids_.proj_bd_b, ids_.span_w, ids_.span_b});
  }
  return out;
}

nlohmann::json MtbrModel::SidecarJson(const Variant &variant) const {
  nlohmann::json labels = nlohmann::json::array();
  for (auto n : kNerLabelNames) labels.push_back(std::string(n));
  nlohmann::json span_tags = nlohmann::json::array();
  for (auto n : kSpanTagNames) span_tags.push_back(std::string(n));
  return {{"format", "mtbr-model"},
          {"version", 1},
          {"hyper", hp_.ToJson()},
          {"tagset", {{"ner_labels", labels}, {"span_tags", span_tags}}},
          {"encoder", encoder_->kind()},
          {"encoder_dim", encoder_->output_dim()},
          {"variant", variant.ToJson()},
          {"tokens", tokens_.tokens()}};
}

void MtbrModel::Save(const std::string &checkpoint_path,
                     const std::string &sidecar_path,
                     const Variant &variant) const {
  SaveCheckpoint(checkpoint_path, store_);
  std::ofstream out(sidecar_path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + sidecar_path);
  out << SidecarJson(variant).dump(2) << "\n";
}

std::pair<MtbrModel, Variant> MtbrModel::Load(
    const std::string &checkpoint_path, const std::string &sidecar_path) {
  std::ifstream in(sidecar_path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + sidecar_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kBadConfig, sidecar_path + ": " + e.what());
  }
  if (j.value("format", "") != "mtbr-model") {
    throw Error(ErrorCode::kBadConfig, sidecar_path + " is not a model sidecar");
  }
  const auto labels = j.at("tagset").at("ner_labels").get<std::vector<std::string>>();
  if (labels.size() != kNumNerLabels ||
      !std::equal(labels.begin(), labels.end(), kNerLabelNames.begin())) {
    throw Error(ErrorCode::kShapeMismatch, "sidecar tag set differs");
  }
  auto hp = HyperParams::FromJson(j.at("hyper"));
  auto tokens = TokenIndex::FromTokens(j.at("tokens").get<std::vector<std::string>>());
  const auto kind = j.at("encoder").get<std::string>();
  std::optional<MtbrModel> model;
  if (kind == "birnn") {
    model.emplace(hp, std::move(tokens));
  } else if (kind == "precomputed") {
    // Table values come from the checkpoint.
    const size_t rows = tokens.size();
    model.emplace(hp, std::move(tokens),
                  Matrix(rows, j.at("encoder_dim").get<size_t>()));
  } else {
    throw Error(ErrorCode::kBadConfig, "unknown encoder kind " + kind);
  }
  LoadCheckpoint(checkpoint_path, model->params());
  return {std::move(*model), Variant::FromJson(j.at("variant"))};
}

}  // namespace mtbr
