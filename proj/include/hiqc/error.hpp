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

#include <stdexcept>
#include <string>
#include <string_view>

namespace hiqc {

enum class ErrorCode {
  // taxonomy
  DuplicateLabel,
  OrphanChild,
  EmptyTaxonomy,
  ChildlessParent,
  UnknownLabel,
  NotAChild,
  // corpus
  MalformedRow,
  EmptyText,
  EmptyInput,
  // encoder
  WidthMismatch,
  MalformedHeader,
  DuplicateId,
  MissingEmbedding,
  // model / numerics
  DimensionMismatch,
  ShapeMismatch,
  LengthMismatch,
  TaxonomyMismatch,
  BadCheckpoint,
  // trainer
  EmptyTrainSet,
  NonFiniteLoss,
  InvalidConfig,
  // selftrain
  EmptyIndex,
  KeyMismatch,
  KindMismatch,
  EmptyNeighborhood,
  BudgetExceedsPool,
  // io
  Io,
};

std::string_view to_string(ErrorCode code);

/// All library failures surface as this exception; `code()` identifies the
/// contract that was violated, `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hiqc
