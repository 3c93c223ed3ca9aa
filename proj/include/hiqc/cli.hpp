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

// Command implementations behind tools/hiqc. Each returns a process exit
// code: 0 on success, 2 for data or configuration errors, 1 otherwise.
// Artifacts land under cfg.out together with manifest.json.

#pragma once

#include <ostream>

#include "hiqc/config.hpp"

namespace hiqc {

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_selftrain(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_ablate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_gen_synthetic(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace hiqc
