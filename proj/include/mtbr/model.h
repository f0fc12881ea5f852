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

#ifndef MTBR_MODEL_H_
#define MTBR_MODEL_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mtbr/corpus.h"
#include "mtbr/encoder.h"
#include "mtbr/params.h"

namespace mtbr {

struct HyperParams {
  int d_emb = 32;
  int d_hidden = 32;
  int d_task = 32;
  double w1 = 0.5;     // boundary-vs-span loss weight
  double alpha = 0.5;  // random-probability threshold of the gate
  int max_len = 128;
  std::uint64_t seed = 1;

  void Validate() const;
  nlohmann::json ToJson() const;
  static HyperParams FromJson(const nlohmann::json &j);
};

// Ablation switches. All false is the full model.
struct Variant {
  bool disable_bd = false;
  bool disable_revision = false;
  bool disable_gate = false;
  bool disable_random = false;

  // Span probabilities feed the NER output.
  bool revision_active() const { return !disable_bd && !disable_revision; }

  nlohmann::json ToJson() const;
  static Variant FromJson(const nlohmann::json &j);
  bool operator==(const Variant &) const = default;
};

struct NamedVariant {
  std::string name;
  Variant variant;
};

// The five ablation rows in table order, full model last.
std::vector<NamedVariant> AblationVariants();
NamedVariant VariantByName(const std::string &name);

enum class Mode { kTrain, kInfer };
enum class Phase { kBd, kNer };

std::string_view PhaseName(Phase p);

// A sentence converted to model inputs and all derived targets.
struct Example {
  std::vector<int> ids;
  TagSequence ner_tags;
  BoundaryTargets boundaries;
  std::vector<int> span_tags;
};

using BoundaryPair = std::pair<int, int>;  // (start, end), inclusive

// Greedy left-to-right pairing: each start is matched with the nearest end
// at or after it and before the next start. Unmatched flags are dropped.
std::vector<BoundaryPair> PairBoundaries(std::span<const int> start_flags,
                                         std::span<const int> end_flags);

// Row-wise argmax of an L x 2 boundary distribution (1 = boundary).
std::vector<int> BoundaryFlags(const Matrix &p);

Vector SpanMean(const Matrix &H, int start, int end);
// Mean of the one-hot 4-way gold tags over start..end.
Vector SpanSoftLabel(std::span<const int> span_tags, int start, int end);

// 7-way slot that span tag `tag` fills on the first / a later token.
inline constexpr int TransformSlot(int tag, bool first) {
  return tag == 3 ? 6 : 2 * tag + (first ? 0 : 1);
}

// Maps per-span [PER, LOC, ORG, O] probabilities onto per-token 7-way rows.
// Tokens outside every span get an all-zero row.
Matrix TransformSpanProbs(std::span<const BoundaryPair> spans,
                          const Matrix &p_sp, int length);

// p_ner + gate * p_new_sp, row by row.
Matrix BiRevise(const Matrix &p_ner, std::span<const double> gate,
                const Matrix &p_new_sp);

// Train mode: revised unless draw > alpha. Infer mode: always revised.
bool UseRevision(double alpha, Mode mode, double draw);

Matrix RenormalizeRows(const Matrix &m);

double CombineBdLoss(double l_start, double l_end, double l_span, double w1);

// Everything one forward pass produced, kept for backward and inspection.
struct ForwardTrace {
  EncoderCache enc;
  bool has_bd = false;
  bool has_ner = false;

  Matrix H_bd;   // L x d_task
  Matrix H_ner;  // L x d_task
  Matrix p_s;    // L x 2
  Matrix p_e;    // L x 2
  std::vector<BoundaryPair> spans;
  Matrix v_sp;  // S x d_task
  Matrix p_sp;  // S x 4

  Matrix p_new_sp;   // L x 7
  Vector gate;       // L
  Matrix p_ner;      // L x 7
  Matrix p_ner_rev;  // L x 7
  Matrix p_final;    // L x 7
  bool revised = false;

  const Matrix &H() const { return enc.H; }
  // Per-token view of p_sp: span probabilities broadcast to their tokens,
  // zero rows elsewhere.
  Matrix BroadcastSpanProbs() const;
};

struct BdLossParts {
  double start = 0.0;
  double end = 0.0;
  double span = 0.0;
  double total = 0.0;
  size_t span_count = 0;
};

class MtbrModel {
 public:
  enum class EncoderKind { kReference, kPrecomputed };

  MtbrModel(const HyperParams &hp, TokenIndex tokens);
  // Frozen-vector encoder; the table has one row per token id.
  MtbrModel(const HyperParams &hp, TokenIndex tokens, Matrix vectors);

  MtbrModel(MtbrModel &&) = default;
  MtbrModel &operator=(MtbrModel &&) = default;

  const HyperParams &hyper() const { return hp_; }
  const TokenIndex &tokens() const { return tokens_; }
  const Encoder &encoder() const { return *encoder_; }
  ParameterStore &params() { return store_; }
  const ParameterStore &params() const { return store_; }

  // Truncates to max_len (logging a warning).
  Example Prepare(const LabeledSentence &s) const;
  std::vector<int> Ids(std::span<const std::string> tokens) const;

  ForwardTrace Forward(std::span<const int> ids, const Variant &variant,
                       Mode mode, double draw, bool with_bd,
                       bool with_ner) const;

  // Boundary-detection objective; gradients are accumulated when `grads`
  // is non-null.
  BdLossParts BdLoss(const Example &ex, Gradients *grads) const;
  // NER objective on the (possibly revised) final probabilities.
  double NerLoss(const Example &ex, const Variant &variant, double draw,
                 Gradients *grads) const;
  double PhaseLoss(const Example &ex, Phase phase, const Variant &variant,
                   double draw, Gradients *grads) const;

  TagSequence PredictTags(std::span<const int> ids,
                          const Variant &variant) const;
  std::vector<EntitySpan> PredictSentence(
      std::span<const std::string> tokens, const Variant &variant) const;

  // Parameters the optimizer updates in a phase.
  std::vector<ParamId> PhaseParameters(Phase phase, const Variant &variant,
                                       bool freeze_bd_in_ner = false) const;
  // The start/end boundary classifiers.
  std::vector<ParamId> BoundaryHeadParameters() const;

  nlohmann::json SidecarJson(const Variant &variant) const;
  void Save(const std::string &checkpoint_path,
            const std::string &sidecar_path, const Variant &variant) const;
  // Returns the model and the variant recorded with it.
  static std::pair<MtbrModel, Variant> Load(const std::string &checkpoint_path,
                                            const std::string &sidecar_path);

 private:
  struct HeadIds {
    ParamId proj_bd_w, proj_bd_b, proj_ner_w, proj_ner_b;
    ParamId start_w, start_b, end_w, end_b;
    ParamId span_w, span_b;
    ParamId ner_w, ner_b;
    ParamId gate_w, gate_b;
  };

  void AddHeads();
  void ForwardBd(ForwardTrace &tr) const;
  void ForwardNer(ForwardTrace &tr, const Variant &variant, Mode mode,
                  double draw) const;
  // dH_bd -> projection -> dH.
  void BackwardProjection(const Matrix &H, const Matrix &H_task,
                          const Matrix &dH_task, ParamId w, ParamId b,
                          Matrix &dH, Gradients &g) const;

  HyperParams hp_;
  TokenIndex tokens_;
  ParameterStore store_;
  std::unique_ptr<Encoder> encoder_;
  EncoderKind kind_ = EncoderKind::kReference;
  HeadIds ids_{};
};

}  // namespace mtbr

#endif  // MTBR_MODEL_H_
