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

#include "mtbr/config.h"

#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "mtbr/error.h"

namespace mtbr {

using nlohmann::json;

void RejectUnknownKeys(const json &j,
                       std::initializer_list<std::string_view> allowed,
                       std::string_view where) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kBadConfig, std::string(where) + " must be an object");
  }
  for (const auto &[key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) {
      throw Error(ErrorCode::kBadConfig,
                  fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

const std::string &RequireInput(const std::optional<std::string> &path,
                                std::string_view name) {
  if (!path || path->empty()) {
    throw Error(ErrorCode::kBadConfig, fmt::format("{} path is required", name));
  }
  if (!std::filesystem::exists(*path)) {
    throw Error(ErrorCode::kIo, fmt::format("{} not found: {}", name, *path));
  }
  return *path;
}

namespace {

void ReadPath(const json &j, const char *key, std::optional<std::string> &out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<std::string>();
}

json PathJson(const std::optional<std::string> &p) {
  return p ? json(*p) : json();
}

}  // namespace

json RunConfig::ToJson() const {
  return {
      {"paths",
       {{"corpus", PathJson(paths.corpus)},
        {"dataset", PathJson(paths.dataset)},
        {"dev", PathJson(paths.dev)},
        {"vocab", PathJson(paths.vocab)},
        {"rules", PathJson(paths.rules)},
        {"checkpoint", PathJson(paths.checkpoint)},
        {"audit_store", PathJson(paths.audit_store)},
        {"vectors", PathJson(paths.vectors)},
        {"static_dir", PathJson(paths.static_dir)},
        {"runs_root", paths.runs_root}}},
      {"hyper", hyper.ToJson()},
      {"train", train.ToJson()},
      {"variant", variant.name},
      {"variant_flags", variant.variant.ToJson()},
      {"seeds", seeds},
      {"split_seed", split_seed},
      {"case_fold", case_fold},
      {"epsilon", epsilon},
      {"max_iters", max_iters},
      {"host", host},
      {"port", port},
  };
}

RunConfig RunConfig::FromJson(const json &j) {
  RejectUnknownKeys(j,
                    {"paths", "hyper", "train", "variant", "variant_flags",
                     "seeds", "split_seed", "case_fold", "epsilon",
                     "max_iters", "host", "port"},
                    "config");
  RunConfig c;
  try {
    if (j.contains("paths")) {
      const auto &p = j.at("paths");
      RejectUnknownKeys(p,
                        {"corpus", "dataset", "dev", "vocab", "rules",
                         "checkpoint", "audit_store", "vectors", "static_dir",
                         "runs_root"},
                        "paths");
      ReadPath(p, "corpus", c.paths.corpus);
      ReadPath(p, "dataset", c.paths.dataset);
      ReadPath(p, "dev", c.paths.dev);
      ReadPath(p, "vocab", c.paths.vocab);
      ReadPath(p, "rules", c.paths.rules);
      ReadPath(p, "checkpoint", c.paths.checkpoint);
      ReadPath(p, "audit_store", c.paths.audit_store);
      ReadPath(p, "vectors", c.paths.vectors);
      ReadPath(p, "static_dir", c.paths.static_dir);
      c.paths.runs_root = p.value("runs_root", c.paths.runs_root);
    }
    if (j.contains("hyper")) {
      RejectUnknownKeys(j.at("hyper"),
                        {"d_emb", "d_hidden", "d_task", "w1", "alpha",
                         "max_len", "seed"},
                        "hyper");
      c.hyper = HyperParams::FromJson(j.at("hyper"));
    }
    if (j.contains("train")) {
      const auto &t = j.at("train");
      RejectUnknownKeys(t,
                        {"epochs", "batch_size", "seed", "threads",
                         "freeze_bd_in_ner", "optimizer"},
                        "train");
      if (t.contains("optimizer")) {
        RejectUnknownKeys(t.at("optimizer"),
                          {"kind", "learning_rate", "weight_decay", "beta1",
                           "beta2", "epsilon"},
                          "train.optimizer");
      }
      c.train = TrainConfig::FromJson(t);
    }
    // Explicit flags take precedence over a variant name.
    if (j.contains("variant") && !j.contains("variant_flags")) {
      c.variant = VariantByName(j.at("variant").get<std::string>());
    }
    if (j.contains("variant_flags")) {
      RejectUnknownKeys(j.at("variant_flags"),
                        {"disable_bd", "disable_revision", "disable_gate",
                         "disable_random"},
                        "variant_flags");
      c.variant.variant = Variant::FromJson(j.at("variant_flags"));
      c.variant.name = "custom";
      for (const auto &nv : AblationVariants()) {
        if (nv.variant == c.variant.variant) c.variant.name = nv.name;
      }
    }
    c.seeds = j.value("seeds", c.seeds);
    c.split_seed = j.value("split_seed", c.split_seed);
    c.case_fold = j.value("case_fold", c.case_fold);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kBadConfig, e.what());
  }
  if (c.seeds.empty()) throw Error(ErrorCode::kBadConfig, "seeds is empty");
  if (!(c.epsilon > 0.0)) throw Error(ErrorCode::kBadConfig, "epsilon must be > 0");
  if (c.max_iters < 1) throw Error(ErrorCode::kBadConfig, "max_iters must be >= 1");
  if (c.train.epochs < 1 || c.train.batch_size < 1) {
    throw Error(ErrorCode::kBadConfig, "epochs and batch_size must be >= 1");
  }
  return c;
}

RunConfig RunConfig::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kBadConfig, path + ": " + e.what());
  }
  return FromJson(j);
}

std::string RunConfig::Hash() const {
  const std::string text = ToJson().dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace mtbr
