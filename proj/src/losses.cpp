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

#include "hiqc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hiqc/error.hpp"
#include "hiqc/kernels.hpp"

namespace hiqc {

void LossWeights::validate() const {
  if (!(lambda >= 0) || !(w_intra >= 0 && w_intra <= 1) ||
      !(w_contrastive >= 0 && w_contrastive <= 1) || !(tau > 0)) {
    throw Error(ErrorCode::InvalidConfig,
                "loss weights need lambda >= 0, w_intra and w_contrastive in [0,1], tau > 0");
  }
}

double classification_loss(const Matrix& probs, std::span<const LabelId> gold, const Taxonomy& t,
                           const LossWeights& w, Matrix* dlogits) {
  if (probs.rows() != gold.size()) {
    throw Error(ErrorCode::LengthMismatch, "one gold label per probability row required");
  }
  if (probs.cols() != t.head_size()) {
    throw Error(ErrorCode::DimensionMismatch, "probability rows must cover every non-root label");
  }
  if (dlogits) *dlogits = Matrix(probs.rows(), probs.cols());
  if (gold.empty()) return 0.0;

  const double inv_b = 1.0 / static_cast<double>(gold.size());
  constexpr double lo = kProbClamp;
  constexpr double hi = 1.0 - kProbClamp;
  double total = 0.0;
  std::vector<double> y(probs.cols());
  std::vector<double> sib(probs.cols());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!t.is_child(gold[i])) {
      throw Error(ErrorCode::UnknownLabel, "gold label " + std::to_string(idx(gold[i])) + " is not a child");
    }
    std::fill(y.begin(), y.end(), 0.0);
    std::fill(sib.begin(), sib.end(), 0.0);
    y[t.head_index(gold[i])] = 1.0;
    y[t.head_index(t.parent_of(gold[i]))] = 1.0;
    for (LabelId s : t.siblings(gold[i])) sib[t.head_index(s)] = 1.0;

    const auto p_row = probs.row(i);
    double row = 0.0;
    for (std::size_t k = 0; k < p_row.size(); ++k) {
      const double raw = p_row[k];
      const double p = std::clamp(raw, lo, hi);
      row -= y[k] * std::log(p) + (1.0 - y[k]) * std::log(1.0 - p);
      if (sib[k] != 0.0) row -= w.lambda * std::log(p);
      if (dlogits) {
        // dL/dp * dp/dz with dp/dz = p(1-p); the clamp passes no gradient.
        double g = 0.0;
        if (raw > lo && raw < hi) {
          g = p - y[k];
          if (sib[k] != 0.0) g -= w.lambda * (1.0 - p);
        }
        (*dlogits)(i, k) = g * inv_b;
      }
    }
    total += row;
  }
  return total * inv_b;
}

namespace {

enum class Relation : unsigned char { None, Positive, Negative };

struct Cosine {
  Matrix unit;  // normalized rows (zero rows stay zero)
  Vector norms;
  Matrix sims;
};

Cosine cosine_table(const Matrix& emb) {
  Cosine c;
  c.unit = emb;
  c.norms.resize(emb.rows());
  for (std::size_t i = 0; i < emb.rows(); ++i) {
    c.norms[i] = kernels::norm(emb.row(i));
    if (c.norms[i] > 0) {
      for (double& x : c.unit.row(i)) x /= c.norms[i];
    }
  }
  c.sims = kernels::gemm_nt(c.unit, c.unit);
  return c;
}

double log_sum_exp(std::span<const double> xs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : xs) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

// Shared engine: `relate(a, j)` classifies every ordered pair.
template <class Relate>
double contrastive(const Matrix& emb, double tau, bool literal, Matrix* demb, Relate relate) {
  const std::size_t b = emb.rows();
  if (demb) *demb = Matrix(b, emb.cols());
  if (b < 2) return 0.0;
  if (!(tau > 0)) throw Error(ErrorCode::InvalidConfig, "contrastive temperature must be positive");

  const Cosine cos = cosine_table(emb);
  Matrix dsim(b, b);
  double total = 0.0;
  std::size_t anchors = 0;
  std::vector<std::size_t> pos, neg;
  std::vector<double> logits, soft;
  for (std::size_t a = 0; a < b; ++a) {
    pos.clear();
    neg.clear();
    for (std::size_t j = 0; j < b; ++j) {
      if (j == a) continue;
      switch (relate(a, j)) {
        case Relation::Positive: pos.push_back(j); break;
        case Relation::Negative: neg.push_back(j); break;
        case Relation::None: break;
      }
    }
    if (pos.empty() || neg.empty()) continue;
    ++anchors;

    // Each numerator term j against denominator set D:
    //   l = -s_j / tau + logsumexp_{d in D} s_d / tau
    const auto& numerators = literal ? neg : pos;
    const double inv_terms = 1.0 / static_cast<double>(numerators.size());
    for (std::size_t num : numerators) {
      std::vector<std::size_t> denom;
      if (literal) {
        denom = pos;
      } else {
        denom.reserve(neg.size() + 1);
        denom.push_back(num);
        denom.insert(denom.end(), neg.begin(), neg.end());
      }
      logits.resize(denom.size());
      for (std::size_t d = 0; d < denom.size(); ++d) logits[d] = cos.sims(a, denom[d]) / tau;
      const double lse = log_sum_exp(logits);
      total += inv_terms * (-cos.sims(a, num) / tau + lse);
      if (demb) {
        dsim(a, num) -= inv_terms / tau;
        for (std::size_t d = 0; d < denom.size(); ++d) {
          dsim(a, denom[d]) += inv_terms * std::exp(logits[d] - lse) / tau;
        }
      }
    }
  }
  if (anchors == 0) return 0.0;
  const double inv_anchors = 1.0 / static_cast<double>(anchors);

  if (demb) {
    // s_ij = u_i.u_j / (|u_i||u_j|): ds/du_i = (n_j - s_ij n_i) / |u_i|.
    Matrix sym(b, b);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < b; ++j) sym(i, j) = (dsim(i, j) + dsim(j, i)) * inv_anchors;
    }
    const Matrix mixed = kernels::gemm(sym, cos.unit);
    for (std::size_t i = 0; i < b; ++i) {
      if (cos.norms[i] == 0) continue;
      double self = 0.0;
      for (std::size_t j = 0; j < b; ++j) self += sym(i, j) * cos.sims(i, j);
      auto out = demb->row(i);
      const auto m = mixed.row(i);
      const auto n = cos.unit.row(i);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = (m[k] - self * n[k]) / cos.norms[i];
    }
  }
  return total * inv_anchors;
}

void check_labels(const Matrix& emb, std::span<const LabelId> children, std::span<const LabelId> parents) {
  if (children.size() != emb.rows() || parents.size() != emb.rows()) {
    throw Error(ErrorCode::LengthMismatch, "one child and one parent label per embedding row required");
  }
}

}  // namespace

double intra_class_loss(const Matrix& emb, std::span<const LabelId> children,
                        std::span<const LabelId> parents, double tau, Matrix* demb, bool literal) {
  check_labels(emb, children, parents);
  return contrastive(emb, tau, literal, demb, [&](std::size_t a, std::size_t j) {
    if (children[a] == children[j]) return Relation::Positive;
    if (parents[a] == parents[j]) return Relation::Negative;
    return Relation::None;
  });
}

double inter_class_loss(const Matrix& emb, std::span<const LabelId> children,
                        std::span<const LabelId> parents, double tau, Matrix* demb, bool literal) {
  check_labels(emb, children, parents);
  return contrastive(emb, tau, literal, demb, [&](std::size_t a, std::size_t j) {
    if (parents[a] != parents[j]) return Relation::Negative;
    if (children[a] != children[j]) return Relation::Positive;
    return Relation::None;
  });
}

double combined_loss(double cls, double intra, double inter, const LossWeights& w) {
  const double contrastive = w.w_intra * intra + (1.0 - w.w_intra) * inter;
  return w.w_contrastive * contrastive + (1.0 - w.w_contrastive) * cls;
}

}  // namespace hiqc
