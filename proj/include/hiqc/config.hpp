/* Copyright (c) 2026 The hiqc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "hiqc/corpus.hpp"
#include "hiqc/pipeline.hpp"

namespace hiqc {

/// Everything a command needs. Populated from flags and a `key=value` file;
/// see README for the key list.
struct RunConfig {
  std::filesystem::path taxonomy;
  std::filesystem::path queries;
  std::filesystem::path embeddings;  // optional
  std::filesystem::path checkpoint;  // eval / predict input
  std::filesystem::path truth;       // optional withheld labels
  std::filesystem::path out = "out";

  PipelineConfig pipeline;
  SplitRatios ratios;
  UnlabeledMode unlabeled_mode = UnlabeledMode::Strip;
  double strip_fraction = 0.1;
  std::uint64_t seed = 0;
  SyntheticSpec synthetic;
  bool full_grid = false;

  /// Sets one key; throws InvalidConfig naming the key on a bad name or value.
  void set(std::string_view key, std::string_view value);
  /// Applies every non-comment `key=value` line.
  void apply_text(std::string_view text);
  void apply_file(const std::filesystem::path& path);
  /// Pushes `seed` into the pipeline and generator seeds.
  void apply_seed();

  nlohmann::json to_json() const;
};

}  // namespace hiqc
