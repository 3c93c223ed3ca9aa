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

// Data-parallel inner loops. Every kernel has a plain serial reference in
// `kernels::serial` and an OpenMP version in `kernels::omp`. Both compute each
// output element with the same operation order, so their results are
// bit-identical; tests compare them directly and bench/ times them.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hiqc/matrix.hpp"

namespace hiqc::kernels {

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Classic two-row dynamic-programming edit distance (unit costs) over bytes.
std::size_t levenshtein(std::string_view a, std::string_view b);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

namespace serial {
Matrix gemm(const Matrix& a, const Matrix& b);     // a * b
Matrix gemm_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix gemm_nt(const Matrix& a, const Matrix& b);  // a * b^T
/// 1 - cos(query, row) for every row of `keys`; zero-norm rows give distance 1.
Vector cosine_distances(std::span<const double> query, const Matrix& keys);
std::vector<std::size_t> edit_distances(std::string_view query,
                                        std::span<const std::string> keys);
/// In-place bias-corrected Adam update; `step` is the 1-based update count.
void adam_update(std::span<double> param, std::span<const double> grad,
                 std::span<double> m, std::span<double> v, const AdamHyper& h,
                 long step);
}  // namespace serial

namespace omp {
Matrix gemm(const Matrix& a, const Matrix& b);
Matrix gemm_tn(const Matrix& a, const Matrix& b);
Matrix gemm_nt(const Matrix& a, const Matrix& b);
Vector cosine_distances(std::span<const double> query, const Matrix& keys);
std::vector<std::size_t> edit_distances(std::string_view query,
                                        std::span<const std::string> keys);
void adam_update(std::span<double> param, std::span<const double> grad,
                 std::span<double> m, std::span<double> v, const AdamHyper& h,
                 long step);
}  // namespace omp

using omp::adam_update;
using omp::cosine_distances;
using omp::edit_distances;
using omp::gemm;
using omp::gemm_nt;
using omp::gemm_tn;

/// Caps OpenMP worker count; 0 leaves the runtime default.
void set_max_threads(int n);
int max_threads();

}  // namespace hiqc::kernels
