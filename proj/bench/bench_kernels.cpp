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

// Times each kernel's serial reference against its OpenMP version.
//   bench_kernels [--quick] [--threads N]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "hiqc/kernels.hpp"
#include "hiqc/random.hpp"

using namespace hiqc;

namespace {

template <class F>
double best_ms(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double omp, bool same) {
  std::printf("%-18s %10.3f %10.3f %8.2fx  %s\n", name, serial, omp, serial / omp,
              same ? "match" : "MISMATCH");
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& x : m.flat()) x = standard_normal(rng);
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--quick")) quick = true;
    else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) kernels::set_max_threads(std::atoi(argv[++i]));
  }
  const std::size_t n = quick ? 96 : 384;
  const std::size_t keys = quick ? 2000 : 50000;
  const int reps = quick ? 2 : 5;
  Rng rng(1);
  bool ok = true;

  std::printf("threads %d\n%-18s %10s %10s %9s\n", kernels::max_threads(), "kernel", "serial ms", "omp ms",
              "speedup");

  const Matrix a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  Matrix cs, co;
  const double gs = best_ms(reps, [&] { cs = kernels::serial::gemm(a, b); });
  const double go = best_ms(reps, [&] { co = kernels::omp::gemm(a, b); });
  row("gemm", gs, go, cs == co);
  ok &= cs == co;

  const Matrix k = random_matrix(keys, 64, rng), q = random_matrix(1, 64, rng);
  Vector ds, dom;
  const double cs_ms = best_ms(reps, [&] { ds = kernels::serial::cosine_distances(q.row(0), k); });
  const double co_ms = best_ms(reps, [&] { dom = kernels::omp::cosine_distances(q.row(0), k); });
  row("cosine_distances", cs_ms, co_ms, ds == dom);
  ok &= ds == dom;

  std::vector<std::string> words(keys);
  for (auto& w : words) {
    w.resize(8 + uniform_index(rng, 24));
    for (char& c : w) c = static_cast<char>('a' + uniform_index(rng, 26));
  }
  std::vector<std::size_t> es, eo;
  const double es_ms = best_ms(reps, [&] { es = kernels::serial::edit_distances("kitchen knife set", words); });
  const double eo_ms = best_ms(reps, [&] { eo = kernels::omp::edit_distances("kitchen knife set", words); });
  row("edit_distances", es_ms, eo_ms, es == eo);
  ok &= es == eo;

  const std::size_t np = quick ? 100000 : 4000000;
  std::vector<double> g(np), p1(np), p2(np), m1(np, 0.0), v1(np, 0.0), m2(np, 0.0), v2(np, 0.0);
  for (std::size_t i = 0; i < np; ++i) {
    g[i] = standard_normal(rng);
    p1[i] = p2[i] = standard_normal(rng);
  }
  kernels::AdamHyper h;
  long s1 = 0, s2 = 0;
  const double as = best_ms(reps, [&] { kernels::serial::adam_update(p1, g, m1, v1, h, ++s1); });
  const double ao = best_ms(reps, [&] { kernels::omp::adam_update(p2, g, m2, v2, h, ++s2); });
  row("adam_update", as, ao, p1 == p2);
  ok &= p1 == p2;

  return ok ? 0 : 1;
}
