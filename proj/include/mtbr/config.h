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

#ifndef MTBR_CONFIG_H_
#define MTBR_CONFIG_H_

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtbr/model.h"
#include "mtbr/train.h"

namespace mtbr {

struct RunPaths {
  std::optional<std::string> corpus;
  std::optional<std::string> dataset;
  std::optional<std::string> dev;
  std::optional<std::string> vocab;
  std::optional<std::string> rules;
  std::optional<std::string> checkpoint;
  std::optional<std::string> audit_store;
  std::optional<std::string> vectors;
  std::optional<std::string> static_dir;
  std::string runs_root = "runs";
};

// Contents of a run config file. Unknown keys are rejected at every level.
struct RunConfig {
  RunPaths paths;
  HyperParams hyper;
  TrainConfig train;
  NamedVariant variant{"MTBR", Variant{}};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::uint64_t split_seed = 13;
  bool case_fold = true;
  double epsilon = 0.01;
  int max_iters = 10;
  std::string host = "127.0.0.1";
  int port = 8080;

  nlohmann::json ToJson() const;
  static RunConfig FromJson(const nlohmann::json &j);
  static RunConfig Load(const std::string &path);

  // 16 hex digits of FNV-1a over the canonical JSON form.
  std::string Hash() const;
};

// Throws Error(kBadConfig) naming the first key of `j` not in `allowed`.
void RejectUnknownKeys(const nlohmann::json &j,
                       std::initializer_list<std::string_view> allowed,
                       std::string_view where);

// Throws Error(kBadConfig) when a required input path is unset, or
// Error(kIo) when it does not exist.
const std::string &RequireInput(const std::optional<std::string> &path,
                                std::string_view name);

}  // namespace mtbr

#endif  // MTBR_CONFIG_H_
