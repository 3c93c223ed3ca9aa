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

#include <cmath>
#include <filesystem>
#include <string>

#include "doctest.h"

#include "hiqc/error.hpp"

// Runs `expr` and checks it throws hiqc::Error with `expected` as its code.
#define CHECK_ERROR_CODE(expr, expected)                          \
  do {                                                            \
    bool hiqc_thrown_ = false;                                    \
    try {                                                         \
      (void)(expr);                                               \
    } catch (const ::hiqc::Error& e) {                            \
      hiqc_thrown_ = true;                                        \
      CHECK_MESSAGE(e.code() == (expected), e.what());            \
    }                                                             \
    CHECK_MESSAGE(hiqc_thrown_, "no hiqc::Error from " #expr);    \
  } while (0)

namespace hiqc::test {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(HIQC_TEST_DATA) / name;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hiqc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace hiqc::test
