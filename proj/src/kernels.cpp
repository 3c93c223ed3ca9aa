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

#include "hiqc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <omp.h>

#include "hiqc/error.hpp"

namespace hiqc::kernels {

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

namespace {

void check_inner(std::size_t lhs, std::size_t rhs, const char* what) {
  if (lhs != rhs) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": inner dimensions " + std::to_string(lhs) +
                    " vs " + std::to_string(rhs));
  }
}

// Row kernels shared by both implementations so the arithmetic order is the
// same no matter who schedules the rows.
inline void gemm_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  auto out = c.row(i);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double aik = a(i, k);
    if (aik == 0.0) continue;
    const auto brow = b.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += aik * brow[j];
  }
}

inline void gemm_tn_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  // c row i = sum_k a(k, i) * b row k
  auto out = c.row(i);
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double aki = a(k, i);
    if (aki == 0.0) continue;
    const auto brow = b.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += aki * brow[j];
  }
}

inline void gemm_nt_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(a.row(i), b.row(j));
}

inline double cosine_distance(std::span<const double> q, double qn,
                              std::span<const double> k) {
  const double kn = norm(k);
  if (qn == 0.0 || kn == 0.0) return 1.0;
  return 1.0 - dot(q, k) / (qn * kn);
}

inline void adam_elem(double& p, double g, double& m, double& v, const AdamHyper& h,
                      double c1, double c2) {
  m = h.beta1 * m + (1.0 - h.beta1) * g;
  v = h.beta2 * v + (1.0 - h.beta2) * g * g;
  const double mhat = m / c1;
  const double vhat = v / c2;
  p -= h.learning_rate * mhat / (std::sqrt(vhat) + h.eps);
}

void check_adam(std::span<double> param, std::span<const double> grad,
                std::span<double> m, std::span<double> v) {
  if (grad.size() != param.size() || m.size() != param.size() ||
      v.size() != param.size()) {
    throw Error(ErrorCode::ShapeMismatch, "adam_update: parameter/gradient/state sizes differ");
  }
}

}  // namespace

namespace serial {

Matrix gemm(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "gemm");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) gemm_row(a, b, c, i);
  return c;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "gemm_tn");
  Matrix c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) gemm_tn_row(a, b, c, i);
  return c;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "gemm_nt");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) gemm_nt_row(a, b, c, i);
  return c;
}

Vector cosine_distances(std::span<const double> query, const Matrix& keys) {
  check_inner(query.size(), keys.cols(), "cosine_distances");
  Vector out(keys.rows());
  const double qn = norm(query);
  for (std::size_t i = 0; i < keys.rows(); ++i) out[i] = cosine_distance(query, qn, keys.row(i));
  return out;
}

std::vector<std::size_t> edit_distances(std::string_view query,
                                        std::span<const std::string> keys) {
  std::vector<std::size_t> out(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) out[i] = levenshtein(query, keys[i]);
  return out;
}

void adam_update(std::span<double> param, std::span<const double> grad,
                 std::span<double> m, std::span<double> v, const AdamHyper& h,
                 long step) {
  check_adam(param, grad, m, v);
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) adam_elem(param[i], grad[i], m[i], v[i], h, c1, c2);
}

}  // namespace serial

namespace omp {

Matrix gemm(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "gemm");
  Matrix c(a.rows(), b.cols());
  const auto n = static_cast<long>(a.rows());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) gemm_row(a, b, c, static_cast<std::size_t>(i));
  return c;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "gemm_tn");
  Matrix c(a.cols(), b.cols());
  const auto n = static_cast<long>(a.cols());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) gemm_tn_row(a, b, c, static_cast<std::size_t>(i));
  return c;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "gemm_nt");
  Matrix c(a.rows(), b.rows());
  const auto n = static_cast<long>(a.rows());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) gemm_nt_row(a, b, c, static_cast<std::size_t>(i));
  return c;
}

Vector cosine_distances(std::span<const double> query, const Matrix& keys) {
  check_inner(query.size(), keys.cols(), "cosine_distances");
  Vector out(keys.rows());
  const double qn = norm(query);
  const auto n = static_cast<long>(keys.rows());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    out[i] = cosine_distance(query, qn, keys.row(static_cast<std::size_t>(i)));
  }
  return out;
}

std::vector<std::size_t> edit_distances(std::string_view query,
                                        std::span<const std::string> keys) {
  std::vector<std::size_t> out(keys.size());
  const auto n = static_cast<long>(keys.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < n; ++i) out[i] = levenshtein(query, keys[i]);
  return out;
}

void adam_update(std::span<double> param, std::span<const double> grad,
                 std::span<double> m, std::span<double> v, const AdamHyper& h,
                 long step) {
  check_adam(param, grad, m, v);
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(step));
  const auto n = static_cast<long>(param.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) adam_elem(param[i], grad[i], m[i], v[i], h, c1, c2);
}

}  // namespace omp

void set_max_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace hiqc::kernels
