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

#include "hiqc/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "hiqc/error.hpp"

namespace hiqc {

void PipelineConfig::set_seed(std::uint64_t seed) {
  model.seed = mix_seed(seed, 1);
  train.seed = mix_seed(seed, 2);
  sampler.seed = mix_seed(seed, 3);
  sampler.hnsw.seed = mix_seed(seed, 4);
}

PipelineResult run_pipeline(const CorpusSplit& split, const ModelContext& ctx,
                            const PipelineConfig& cfg,
                            const std::map<std::string, LabelId>* truth) {
  PipelineResult res;
  auto init = init_model(ctx.taxonomy, cfg.model, ctx.store);
  auto [trained, report] = train(split, ctx, std::move(init), cfg.train);
  res.train_report = std::move(report);
  if (cfg.self_training) {
    res.selftrain = selftrain_loop(split, ctx, std::move(trained), cfg.train, cfg.sampler, truth);
    res.params = res.selftrain.params;
  } else {
    res.params = std::move(trained);
  }
  const auto& val = split.validation.empty() ? split.train : split.validation;
  res.validation = evaluate(ctx, res.params, val);
  res.test = split.test.empty() ? res.validation : evaluate(ctx, res.params, split.test);
  return res;
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoLabelHierarchy: return "w/o label hierarchy";
    case Variant::NoInstanceHierarchy: return "w/o instance hierarchy";
    case Variant::NoSelfTraining: return "w/o self-training";
  }
  return "?";
}

PipelineConfig apply_variant(PipelineConfig cfg, Variant v) {
  switch (v) {
    case Variant::Full: break;
    case Variant::NoLabelHierarchy: cfg.model.label_hierarchy = false; break;
    case Variant::NoInstanceHierarchy: cfg.train.weights.w_contrastive = 0.0; break;
    case Variant::NoSelfTraining: cfg.sampler.budget_count = 0; break;
  }
  return cfg;
}

std::vector<AblationRow> ablation_run(const CorpusSplit& split, const ModelContext& ctx,
                                      const PipelineConfig& cfg, std::span<const Variant> variants,
                                      const std::map<std::string, LabelId>* truth) {
  std::vector<AblationRow> rows;
  for (Variant v : variants) {
    const auto vc = apply_variant(cfg, v);
    auto res = run_pipeline(split, ctx, vc, truth);
    rows.push_back({v, res.test, res.params.trainable_parameter_count()});
  }
  return rows;
}

nlohmann::json ablation_json(std::span<const AblationRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"variant", to_string(r.variant)},
                   {"child_micro_f1", r.test.child.micro_f1},
                   {"child_macro_f1", r.test.child.macro_f1},
                   {"parent_micro_f1", r.test.parent.micro_f1},
                   {"parent_macro_f1", r.test.parent.macro_f1},
                   {"count", r.test.count},
                   {"trainable_parameters", r.trainable_parameters}});
  }
  return out;
}

std::vector<SweepAxis> default_sweep_axes() {
  return {{"w_intra", {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}},
          {"w_contrastive", {0.01, 0.1, 0.3, 0.5, 0.7, 0.9}},
          {"w_child", {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}}};
}

PipelineConfig apply_point(PipelineConfig cfg, const SweepPoint& p) {
  cfg.train.weights.w_intra = p.w_intra;
  cfg.train.weights.w_contrastive = p.w_contrastive;
  cfg.sampler.w_child = p.w_child;
  return cfg;
}

namespace {

SweepPoint with_axis(SweepPoint p, const std::string& axis, double v) {
  if (axis == "w_intra") {
    p.w_intra = v;
  } else if (axis == "w_contrastive") {
    p.w_contrastive = v;
  } else if (axis == "w_child") {
    p.w_child = v;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown sweep axis '" + axis + "'");
  }
  return p;
}

}  // namespace

std::vector<SweepRow> run_sweep(const CorpusSplit& split, const ModelContext& ctx,
                                const PipelineConfig& cfg, std::span<const SweepAxis> axes,
                                const SweepPoint& baseline, bool full_grid) {
  std::vector<std::pair<std::string, SweepPoint>> plan;
  if (full_grid) {
    std::vector<SweepPoint> pts{baseline};
    for (const auto& a : axes) {
      std::vector<SweepPoint> next;
      for (const auto& p : pts) {
        for (double v : a.values) next.push_back(with_axis(p, a.name, v));
      }
      pts = std::move(next);
    }
    for (const auto& p : pts) plan.emplace_back("grid", p);
  } else {
    for (const auto& a : axes) {
      for (double v : a.values) plan.emplace_back(a.name, with_axis(baseline, a.name, v));
    }
  }

  std::map<SweepPoint, EvalResult> cache;
  auto score = [&](const SweepPoint& p) -> const EvalResult& {
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, run_pipeline(split, ctx, apply_point(cfg, p)).test).first;
    return it->second;
  };
  const auto base = score(baseline);
  std::vector<SweepRow> rows;
  for (const auto& [axis, p] : plan) {
    const auto& ev = score(p);
    SweepRow r;
    r.axis = axis;
    r.point = p;
    r.micro_f1 = ev.child.micro_f1;
    r.macro_f1 = ev.child.macro_f1;
    r.delta_micro = 100.0 * (ev.child.micro_f1 - base.child.micro_f1);
    r.delta_macro = 100.0 * (ev.child.macro_f1 - base.child.macro_f1);
    r.baseline = p == baseline;
    rows.push_back(r);
  }
  return rows;
}

std::string format_delta(double delta_points, bool baseline) {
  if (baseline) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f", delta_points);
  std::string s = buf;
  if (s == "-0.00") s = "+0.00";
  return s;
}

namespace {

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string delta_table(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "parameter\tvalue\tdelta_micro_f1\tdelta_macro_f1\n";
  for (const auto& r : rows) {
    std::string value;
    if (r.axis == "w_intra") {
      value = short_number(r.point.w_intra);
    } else if (r.axis == "w_contrastive") {
      value = short_number(r.point.w_contrastive);
    } else if (r.axis == "w_child") {
      value = short_number(r.point.w_child);
    } else {
      value = short_number(r.point.w_intra) + "," + short_number(r.point.w_contrastive) + "," +
              short_number(r.point.w_child);
    }
    out << r.axis << '\t' << value << '\t' << format_delta(r.delta_micro, r.baseline) << '\t'
        << format_delta(r.delta_macro, r.baseline) << '\n';
  }
  return out.str();
}

}  // namespace hiqc
