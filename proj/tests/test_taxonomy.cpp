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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"

#include "hiqc/taxonomy.hpp"

using namespace hiqc;

namespace {

// Cyclic Jacobi rotations; returns the eigenvalues of a small symmetric matrix.
std::vector<double> symmetric_eigenvalues(Matrix a) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-22) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  return ev;
}

}  // namespace

TEST_CASE("parse assigns dense ids: root, parents, children") {
  const auto t = Taxonomy::parse("# two groups\nb parent\n  zeta\n  alpha\na parent\n  mid\n  low\n");
  CHECK(t.size() == 7);
  CHECK(t.name(t.root()) == "<root>");
  CHECK(t.name(label_id(1)) == "a parent");
  CHECK(t.name(label_id(2)) == "b parent");
  CHECK(t.name(label_id(3)) == "alpha");
  CHECK(t.name(label_id(6)) == "zeta");
  CHECK(t.parent_of(t.id_of("alpha")) == t.id_of("b parent"));
  CHECK(t.parent_of(t.id_of("low")) == t.id_of("a parent"));
  CHECK(t.head_size() == 6);
  CHECK(t.leaf_parents().size() == 2);
  CHECK(t.children().size() == 4);
  CHECK(Taxonomy::parse(t.serialize()) == t);
}

TEST_CASE("from_groups counts nodes") {
  const auto t = Taxonomy::from_groups({{"p1", {"a", "b"}}, {"p2", {"c", "d"}}});
  CHECK(t.size() == 7);
}

TEST_CASE("invalid taxonomies") {
  CHECK_ERROR_CODE(Taxonomy::parse("weapons\n  adult products\nadult\n  adult products\n"),
                   ErrorCode::DuplicateLabel);
  CHECK_ERROR_CODE(Taxonomy::parse("# nothing\n\n"), ErrorCode::EmptyTaxonomy);
  CHECK_ERROR_CODE(Taxonomy::parse("  orphan\nparent\n  kid\n"), ErrorCode::OrphanChild);
  CHECK_ERROR_CODE(Taxonomy::parse("lonely\nparent\n  kid\n"), ErrorCode::ChildlessParent);
  const auto t = Taxonomy::parse("p\n  a\n");
  CHECK_ERROR_CODE(t.id_of("missing"), ErrorCode::UnknownLabel);
  CHECK_ERROR_CODE(t.siblings(t.id_of("p")), ErrorCode::NotAChild);
}

TEST_CASE("siblings") {
  const auto t = Taxonomy::parse("p\n  a\n  b\n  c\nq\n  single\n");
  CHECK(t.siblings(t.id_of("a")) == std::vector<LabelId>{t.id_of("b"), t.id_of("c")});
  CHECK(t.siblings(t.id_of("single")).empty());

  const auto harm = Taxonomy::from_groups({{"harmful", {"self-harm", "harm-to-others"}}});
  CHECK(harm.siblings(harm.id_of("self-harm")) == std::vector<LabelId>{harm.id_of("harm-to-others")});

  const auto wos = Taxonomy::load(test::data_path("wos_taxonomy.txt"));
  for (auto c : wos.children()) {
    for (auto s : wos.siblings(c)) {
      CHECK(s != c);
      CHECK(wos.parent_of(s) == wos.parent_of(c));
    }
  }
}

TEST_CASE("WOS-style fixture shape") {
  const auto t = Taxonomy::load(test::data_path("wos_taxonomy.txt"));
  CHECK(t.parents().size() == 7);
  CHECK(t.children().size() == 134);
  CHECK(t.size() == 142);
  CHECK(t.siblings(t.id_of("medical area 01")).size() == 52);
}

TEST_CASE("normalized adjacency hand cases") {
  const std::vector<std::pair<std::size_t, std::size_t>> chain{{0, 1}};
  const Matrix a = normalized_adjacency(2, chain);
  for (double x : a.flat()) CHECK(x == doctest::Approx(0.5));

  const auto t = Taxonomy::parse("p\n  c\n");
  const auto g = build_label_graph(t);
  REQUIRE(g.adjacency.rows() == 3);
  const auto root = idx(t.root()), child = idx(t.id_of("c")), parent = idx(t.id_of("p"));
  CHECK(g.adjacency(root, child) == 0.0);
  CHECK(g.adjacency(child, root) == 0.0);
  // degrees: root 2, parent 3, child 2 (self-loops included)
  CHECK(g.adjacency(root, parent) == doctest::Approx(1 / std::sqrt(6.0)));
  CHECK(g.adjacency(parent, parent) == doctest::Approx(1.0 / 3));
}

TEST_CASE("label graph is symmetric with spectrum in [-1, 1]") {
  const auto t = Taxonomy::parse("p\n  a\n  b\n  c\nq\n  d\nr\n  e\n  f\n");
  const auto g = build_label_graph(t);
  const Matrix& a = g.adjacency;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double rs = 0, cs = 0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      CHECK(a(i, j) == a(j, i));
      rs += a(i, j);
      cs += a(j, i);
    }
    CHECK(rs == doctest::Approx(cs));
  }
  for (double ev : symmetric_eigenvalues(a)) {
    CHECK(ev <= 1.0 + 1e-9);
    CHECK(ev >= -1.0 - 1e-9);
  }
}

TEST_CASE("deterministic construction and hash") {
  const std::string text = "b\n  y\n  x\na\n  z\n";
  const auto t1 = Taxonomy::parse(text), t2 = Taxonomy::parse(text);
  CHECK(t1.hash() == t2.hash());
  CHECK(build_label_graph(t1).adjacency == build_label_graph(t2).adjacency);
  CHECK(Taxonomy::parse("b\n  y\na\n  z\n").hash() != t1.hash());
}

TEST_CASE("deeper hierarchies chain parent_of") {
  const auto t = Taxonomy::parse("top\n  mid\n    leaf1\n    leaf2\n  mid2\n    leaf3\n");
  const auto leaf = t.id_of("leaf1");
  CHECK(t.parent_of(leaf) == t.id_of("mid"));
  CHECK(t.parent_of(t.id_of("mid")) == t.id_of("top"));
  CHECK(t.leaf_parents().size() == 2);
  CHECK(t.node(t.id_of("top")).depth == 1);
  CHECK(t.node(leaf).depth == 3);
}
