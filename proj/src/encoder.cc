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

#include "mtbr/encoder.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mtbr/error.h"

namespace mtbr {

TokenIndex::TokenIndex() {
  tokens_.push_back(kUnkToken);
  ids_.emplace(kUnkToken, kUnk);
}

TokenIndex TokenIndex::Build(std::span<const LabeledSentence> sentences,
                             int min_count) {
  std::map<std::string, int> counts;
  for (const auto &s : sentences) {
    for (const auto &t : s.tokens) ++counts[t];
  }
  TokenIndex index;
  for (const auto &[tok, n] : counts) {
    if (n < min_count || tok == kUnkToken) continue;
    index.ids_.emplace(tok, index.size());
    index.tokens_.push_back(tok);
  }
  return index;
}

TokenIndex TokenIndex::FromTokens(const std::vector<std::string> &tokens) {
  if (tokens.empty() || tokens[0] != kUnkToken) {
    throw Error(ErrorCode::kBadConfig, "token index must start with <unk>");
  }
  TokenIndex index;
  for (size_t i = 1; i < tokens.size(); ++i) {
    if (!index.ids_.emplace(tokens[i], index.size()).second) {
      throw Error(ErrorCode::kBadConfig, "duplicate token " + tokens[i]);
    }
    index.tokens_.push_back(tokens[i]);
  }
  return index;
}

int TokenIndex::Id(const std::string &token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> TokenIndex::Ids(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto &t : tokens) out.push_back(Id(t));
  return out;
}

ReferenceEncoder::ReferenceEncoder(ParameterStore &store, int vocab_size,
                                   int d_emb, int d_hidden)
    : d_emb_(d_emb), d_hidden_(d_hidden) {
  emb_ = store.Add("enc.emb", vocab_size, d_emb, Init::kGlorotUniform);
  auto add_dir = [&](const std::string &p) {
    Direction d;
    d.wx = store.Add(p + ".wx", d_hidden, d_emb, Init::kGlorotUniform);
    d.wh = store.Add(p + ".wh", d_hidden, d_hidden, Init::kGlorotUniform);
    d.b = store.Add(p + ".b", d_hidden, 1, Init::kZeros);
    return d;
  };
  fwd_ = add_dir("enc.fwd");
  bwd_ = add_dir("enc.bwd");
}

std::vector<ParamId> ReferenceEncoder::parameters() const {
  return {emb_, fwd_.wx, fwd_.wh, fwd_.b, bwd_.wx, bwd_.wh, bwd_.b};
}

EncoderCache ReferenceEncoder::Encode(const ParameterStore &store,
                                      std::span<const int> ids) const {
  const size_t L = ids.size();
  if (L == 0) throw Error(ErrorCode::kEmptySentence, "encode");
  const auto &emb = store.value(emb_);
  EncoderCache cache;
  cache.ids.assign(ids.begin(), ids.end());
  Matrix E(L, d_emb_);
  for (size_t t = 0; t < L; ++t) {
    int id = ids[t];
    if (id < 0 || static_cast<size_t>(id) >= emb.rows()) id = TokenIndex::kUnk;
    std::copy_n(emb.row(id).begin(), d_emb_, E.row(t).begin());
  }

  auto run = [&](const Direction &dir, bool reverse) {
    const auto &wx = store.value(dir.wx);
    const auto &wh = store.value(dir.wh);
    const auto &b = store.value(dir.b);
    Matrix h(L, d_hidden_);
    Vector prev(d_hidden_, 0.0);
    for (size_t k = 0; k < L; ++k) {
      const size_t t = reverse ? L - 1 - k : k;
      auto out = h.row(t);
      for (int r = 0; r < d_hidden_; ++r) {
        double acc = b[r];
        const auto wx_row = wx.row(r);
        const auto wh_row = wh.row(r);
        const auto e = E.row(t);
        for (int c = 0; c < d_emb_; ++c) acc += wx_row[c] * e[c];
        for (int c = 0; c < d_hidden_; ++c) acc += wh_row[c] * prev[c];
        out[r] = std::tanh(acc);
      }
      std::copy(out.begin(), out.end(), prev.begin());
    }
    return h;
  };
  Matrix hf = run(fwd_, false);
  Matrix hb = run(bwd_, true);
  cache.H = Matrix(L, 2 * d_hidden_);
  for (size_t t = 0; t < L; ++t) {
    auto row = cache.H.row(t);
    std::copy(hf.row(t).begin(), hf.row(t).end(), row.begin());
    std::copy(hb.row(t).begin(), hb.row(t).end(), row.begin() + d_hidden_);
  }
  cache.saved = {std::move(E), std::move(hf), std::move(hb)};
  return cache;
}

void ReferenceEncoder::Backward(const ParameterStore &store,
                                const EncoderCache &cache, const Matrix &dH,
                                Gradients &grads) const {
  const auto &E = cache.saved[0];
  const size_t L = E.rows();
  Matrix dE(L, d_emb_);

  auto run = [&](const Direction &dir, const Matrix &h, size_t offset,
                 bool reverse) {
    const auto &wx = store.value(dir.wx);
    const auto &wh = store.value(dir.wh);
    auto &dwx = grads[dir.wx];
    auto &dwh = grads[dir.wh];
    auto &db = grads[dir.b];
    Vector carry(d_hidden_, 0.0);
    Vector da(d_hidden_);
    // Walk in the opposite order of the forward recurrence.
    for (size_t k = 0; k < L; ++k) {
      const size_t t = reverse ? k : L - 1 - k;
      const bool has_prev = reverse ? t + 1 < L : t > 0;
      const size_t prev_t = reverse ? t + 1 : t - 1;
      for (int r = 0; r < d_hidden_; ++r) {
        const double hv = h(t, r);
        da[r] = (dH(t, offset + r) + carry[r]) * (1.0 - hv * hv);
      }
      std::fill(carry.begin(), carry.end(), 0.0);
      for (int r = 0; r < d_hidden_; ++r) {
        const double g = da[r];
        if (g == 0.0) continue;
        db[r] += g;
        for (int c = 0; c < d_emb_; ++c) {
          dwx(r, c) += g * E(t, c);
          dE(t, c) += g * wx(r, c);
        }
        if (has_prev) {
          for (int c = 0; c < d_hidden_; ++c) {
            dwh(r, c) += g * h(prev_t, c);
            carry[c] += g * wh(r, c);
          }
        }
      }
    }
  };
  run(fwd_, cache.saved[1], 0, false);
  run(bwd_, cache.saved[2], d_hidden_, true);

  auto &demb = grads[emb_];
  for (size_t t = 0; t < L; ++t) {
    int id = cache.ids[t];
    if (id < 0 || static_cast<size_t>(id) >= demb.rows()) id = TokenIndex::kUnk;
    auto row = demb.row(id);
    for (int c = 0; c < d_emb_; ++c) row[c] += dE(t, c);
  }
}

PrecomputedEncoder::PrecomputedEncoder(ParameterStore &store, Matrix table)
    : dim_(static_cast<int>(table.cols())) {
  table_ = store.Add("enc.table", table.rows(), table.cols(), Init::kZeros);
  store.value(table_) = std::move(table);
}

Matrix PrecomputedEncoder::LoadTable(const std::string &path,
                                     const TokenIndex &index) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open vectors " + path);
  std::string line;
  Matrix table;
  Vector mean;
  size_t found = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    Vector v;
    double x;
    while (ls >> x) v.push_back(x);
    if (table.empty()) {
      if (v.empty()) throw Error(ErrorCode::kBadConfig, "empty vector row");
      table = Matrix(index.size(), v.size());
      mean.assign(v.size(), 0.0);
    }
    if (v.size() != table.cols()) {
      throw Error(ErrorCode::kShapeMismatch, "vector width differs for " + tok);
    }
    int id = index.Id(tok);
    if (id == TokenIndex::kUnk) continue;
    std::copy(v.begin(), v.end(), table.row(id).begin());
    for (size_t c = 0; c < v.size(); ++c) mean[c] += v[c];
    ++found;
  }
  if (table.empty()) throw Error(ErrorCode::kBadConfig, "no vectors in " + path);
  if (found > 0) {
    for (size_t c = 0; c < mean.size(); ++c) {
      table(TokenIndex::kUnk, c) = mean[c] / static_cast<double>(found);
    }
  }
  return table;
}

EncoderCache PrecomputedEncoder::Encode(const ParameterStore &store,
                                        std::span<const int> ids) const {
  if (ids.empty()) throw Error(ErrorCode::kEmptySentence, "encode");
  const auto &table = store.value(table_);
  EncoderCache cache;
  cache.ids.assign(ids.begin(), ids.end());
  cache.H = Matrix(ids.size(), dim_);
  for (size_t t = 0; t < ids.size(); ++t) {
    int id = ids[t];
    if (id < 0 || static_cast<size_t>(id) >= table.rows()) id = TokenIndex::kUnk;
    std::copy_n(table.row(id).begin(), dim_, cache.H.row(t).begin());
  }
  return cache;
}

}  // namespace mtbr
