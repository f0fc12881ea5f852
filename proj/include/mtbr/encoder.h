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

#ifndef MTBR_ENCODER_H_
#define MTBR_ENCODER_H_

#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "mtbr/corpus.h"
#include "mtbr/params.h"

namespace mtbr {

// Token string -> embedding row. Row 0 is reserved for unknown tokens.
class TokenIndex {
 public:
  static constexpr int kUnk = 0;
  static constexpr const char *kUnkToken = "<unk>";

  TokenIndex();
  static TokenIndex Build(std::span<const LabeledSentence> sentences,
                          int min_count = 1);
  static TokenIndex FromTokens(const std::vector<std::string> &tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  int Id(const std::string &token) const;
  std::vector<int> Ids(std::span<const std::string> tokens) const;
  const std::vector<std::string> &tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Whatever the encoder needs to keep between forward and backward.
struct EncoderCache {
  std::vector<int> ids;
  Matrix H;  // L x output_dim
  std::vector<Matrix> saved;
};

// Contract: token ids of length L -> L x d matrix of contextual vectors.
// Parameters live in the caller's ParameterStore so the same store backs
// the encoder and every head.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual std::string kind() const = 0;
  virtual int output_dim() const = 0;
  virtual bool trainable() const = 0;
  virtual std::vector<ParamId> parameters() const = 0;

  virtual EncoderCache Encode(const ParameterStore &store,
                              std::span<const int> ids) const = 0;
  // Accumulates parameter gradients for dL/dH into `grads`.
  virtual void Backward(const ParameterStore &store, const EncoderCache &cache,
                        const Matrix &dH, Gradients &grads) const = 0;
};

// Embedding table followed by a bidirectional tanh recurrent layer; the
// output row for token t is [forward_t ; backward_t], d = 2 * hidden.
class ReferenceEncoder : public Encoder {
 public:
  ReferenceEncoder(ParameterStore &store, int vocab_size, int d_emb,
                   int d_hidden);

  std::string kind() const override { return "birnn"; }
  int output_dim() const override { return 2 * d_hidden_; }
  bool trainable() const override { return true; }
  std::vector<ParamId> parameters() const override;

  EncoderCache Encode(const ParameterStore &store,
                      std::span<const int> ids) const override;
  void Backward(const ParameterStore &store, const EncoderCache &cache,
                const Matrix &dH, Gradients &grads) const override;

 private:
  struct Direction {
    ParamId wx, wh, b;
  };
  int d_emb_;
  int d_hidden_;
  ParamId emb_;
  Direction fwd_;
  Direction bwd_;
};

// Frozen externally supplied vectors, one row per TokenIndex id.
class PrecomputedEncoder : public Encoder {
 public:
  PrecomputedEncoder(ParameterStore &store, Matrix table);

  // Text file: "token v1 v2 ... vd" per line. Tokens missing from the file
  // get zero rows; the UNK row is the mean of the supplied rows.
  static Matrix LoadTable(const std::string &path, const TokenIndex &index);

  std::string kind() const override { return "precomputed"; }
  int output_dim() const override { return dim_; }
  bool trainable() const override { return false; }
  std::vector<ParamId> parameters() const override { return {}; }

  EncoderCache Encode(const ParameterStore &store,
                      std::span<const int> ids) const override;
  void Backward(const ParameterStore &, const EncoderCache &, const Matrix &,
                Gradients &) const override {}

 private:
  ParamId table_;
  int dim_;
};

}  // namespace mtbr

#endif  // MTBR_ENCODER_H_
