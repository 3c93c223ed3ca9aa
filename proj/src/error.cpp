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

#include "hiqc/error.hpp"

namespace hiqc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::OrphanChild: return "OrphanChild";
    case ErrorCode::EmptyTaxonomy: return "EmptyTaxonomy";
    case ErrorCode::ChildlessParent: return "ChildlessParent";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::NotAChild: return "NotAChild";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::WidthMismatch: return "WidthMismatch";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TaxonomyMismatch: return "TaxonomyMismatch";
    case ErrorCode::BadCheckpoint: return "BadCheckpoint";
    case ErrorCode::EmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorCode::BudgetExceedsPool: return "BudgetExceedsPool";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace hiqc
