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

#include "hiqc/eval.hpp"

#include <map>
#include <sstream>

#include "hiqc/error.hpp"

namespace hiqc {

namespace {

double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

LevelScores score_level(std::span<const LabelId> labels, std::span<const LabelId> gold,
                        std::span<const LabelId> pred) {
  std::map<LabelId, ClassScore> table;
  for (LabelId l : labels) table[l].label = l;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == pred[i]) {
      ++table[gold[i]].tp;
    } else {
      ++table[gold[i]].fn;
      ++table[pred[i]].fp;
    }
  }
  std::vector<ClassScore> counts;
  counts.reserve(table.size());
  for (auto& [label, c] : table) {
    c.label = label;
    counts.push_back(c);
  }
  return level_scores(std::move(counts));
}

}  // namespace

LevelScores level_scores(std::vector<ClassScore> counts) {
  LevelScores out;
  std::size_t tp = 0, fp = 0, fn = 0;
  double macro = 0.0;
  for (auto& s : counts) {
    s.precision = ratio(s.tp, s.tp + s.fp);
    s.recall = ratio(s.tp, s.tp + s.fn);
    s.f1 = f1_from_counts(s.tp, s.fp, s.fn);
    tp += s.tp;
    fp += s.fp;
    fn += s.fn;
    macro += s.f1;
  }
  out.micro_f1 = f1_from_counts(tp, fp, fn);
  out.macro_f1 = counts.empty() ? 0.0 : macro / static_cast<double>(counts.size());
  out.per_class = std::move(counts);
  return out;
}

EvalResult micro_macro_f1(std::span<const LabelId> gold, std::span<const LabelId> predicted_child,
                          const Taxonomy& t) {
  if (gold.size() != predicted_child.size()) {
    throw Error(ErrorCode::LengthMismatch, "gold and predicted lists differ in length");
  }
  std::vector<LabelId> gold_parent, pred_parent;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!t.is_child(gold[i]) || !t.is_child(predicted_child[i])) {
      throw Error(ErrorCode::NotAChild, "metrics are computed over child labels");
    }
    gold_parent.push_back(t.parent_of(gold[i]));
    pred_parent.push_back(t.parent_of(predicted_child[i]));
  }
  EvalResult r;
  r.count = gold.size();
  r.child = score_level(t.children(), gold, predicted_child);
  r.parent = score_level(t.leaf_parents(), gold_parent, pred_parent);
  return r;
}

EvalResult micro_macro_f1(std::span<const LabelId> gold, std::span<const Prediction> predictions,
                          const Taxonomy& t) {
  std::vector<LabelId> pred;
  pred.reserve(predictions.size());
  for (const auto& p : predictions) pred.push_back(p.child);
  return micro_macro_f1(gold, pred, t);
}

EvalResult evaluate(const ModelContext& ctx, const ModelParams& p,
                    std::span<const QueryRecord> labeled) {
  std::vector<LabelId> gold;
  gold.reserve(labeled.size());
  for (const auto& r : labeled) {
    if (!r.child) throw Error(ErrorCode::UnknownLabel, "query '" + r.id + "' has no gold label");
    gold.push_back(*r.child);
  }
  const auto preds = predict(ctx, p, labeled);
  return micro_macro_f1(gold, preds, ctx.taxonomy);
}

nlohmann::json EvalResult::to_json(const Taxonomy& t) const {
  auto level = [&](const LevelScores& s) {
    nlohmann::json j;
    j["micro_f1"] = s.micro_f1;
    j["macro_f1"] = s.macro_f1;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : s.per_class) {
      rows.push_back({{"label", t.name(c.label)},
                      {"tp", c.tp},
                      {"fp", c.fp},
                      {"fn", c.fn},
                      {"precision", c.precision},
                      {"recall", c.recall},
                      {"f1", c.f1}});
    }
    j["per_class"] = std::move(rows);
    return j;
  };
  return {{"count", count}, {"child", level(child)}, {"parent", level(parent)}};
}

std::string EvalResult::per_class_tsv(const Taxonomy& t) const {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "level\tlabel\ttp\tfp\tfn\tprecision\trecall\tf1\n";
  auto emit = [&](const char* level, const LevelScores& s) {
    for (const auto& c : s.per_class) {
      out << level << '\t' << t.name(c.label) << '\t' << c.tp << '\t' << c.fp << '\t' << c.fn << '\t'
          << c.precision << '\t' << c.recall << '\t' << c.f1 << '\n';
    }
  };
  emit("child", child);
  emit("parent", parent);
  return out.str();
}

}  // namespace hiqc
