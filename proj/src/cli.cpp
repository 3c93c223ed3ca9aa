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

#include "hiqc/cli.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>

#include "hiqc/error.hpp"
#include "hiqc/eval.hpp"
#include "hiqc/pipeline.hpp"

namespace hiqc {

namespace fs = std::filesystem;

namespace {

struct Inputs {
  Taxonomy taxonomy;
  LabelGraph graph;
  std::optional<EmbeddingStore> store;
  std::vector<QueryRecord> records;

  ModelContext context() const { return {taxonomy, graph, store ? &*store : nullptr}; }
};

void require(const fs::path& p, const char* flag) {
  if (p.empty()) throw Error(ErrorCode::InvalidConfig, std::string("missing ") + flag);
}

Inputs load_inputs(const RunConfig& cfg) {
  require(cfg.taxonomy, "--taxonomy");
  require(cfg.queries, "--queries");
  Inputs in;
  in.taxonomy = Taxonomy::load(cfg.taxonomy);
  in.graph = build_label_graph(in.taxonomy);
  in.records = load_queries(cfg.queries, in.taxonomy);
  if (!cfg.embeddings.empty()) {
    in.store = EmbeddingStore::load(cfg.embeddings);
    for (const auto& r : in.records) {
      if (!in.store->find(r.id)) {
        throw Error(ErrorCode::MissingEmbedding, "no embedding for query '" + r.id + "'");
      }
    }
  }
  return in;
}

RunConfig seeded(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.apply_seed();
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void write_manifest(const RunConfig& cfg, std::string_view command,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["inputs"] = {{"taxonomy", cfg.taxonomy.string()},
                 {"queries", cfg.queries.string()},
                 {"embeddings", cfg.embeddings.string()},
                 {"checkpoint", cfg.checkpoint.string()},
                 {"truth", cfg.truth.string()}};
  j["config"] = cfg.to_json();
  j["outputs"] = outputs;
  write_json(cfg.out / "manifest.json", j);
}

CorpusSplit split_of(const RunConfig& cfg, const Inputs& in, std::map<std::string, LabelId>& truth) {
  auto s = make_split(in.records, mix_seed(cfg.seed, 5), cfg.ratios, cfg.unlabeled_mode,
                      cfg.strip_fraction, &truth);
  if (!cfg.truth.empty()) {
    for (const auto& [id, label] : load_truth(cfg.truth, in.taxonomy)) truth.emplace(id, label);
  }
  return s;
}

std::string f1_line(const char* name, const EvalResult& ev) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s child micro %.4f macro %.4f | parent micro %.4f macro %.4f (n=%zu)\n",
                name, ev.child.micro_f1, ev.child.macro_f1, ev.parent.micro_f1, ev.parent.macro_f1,
                ev.count);
  return buf;
}

int guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

void write_eval(const fs::path& dir, const EvalResult& ev, const Taxonomy& t) {
  write_json(dir / "eval.json", ev.to_json(t));
  write_text(dir / "per_class.tsv", ev.per_class_tsv(t));
}

}  // namespace

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto in = load_inputs(cfg);
    std::size_t labeled = 0;
    for (const auto& r : in.records) labeled += r.labeled();
    out << "taxonomy: " << in.taxonomy.leaf_parents().size() << " parents, "
        << in.taxonomy.children().size() << " children\n"
        << "queries: " << labeled << " labeled, " << in.records.size() - labeled << " unlabeled\n";
    if (in.store) out << "embeddings: " << in.store->size() << " x " << in.store->dim() << '\n';
    out << "ok\n";
  });
}

int cmd_train(const RunConfig& cfg0, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = seeded(cfg0);
    const auto in = load_inputs(cfg);
    const auto ctx = in.context();
    std::map<std::string, LabelId> truth;
    const auto split = split_of(cfg, in, truth);
    fs::create_directories(cfg.out);

    auto init = init_model(in.taxonomy, cfg.pipeline.model, ctx.store);
    auto [params, report] = train(split, ctx, std::move(init), cfg.pipeline.train);
    const auto& eval_set = split.test.empty() ? split.validation : split.test;
    const auto ev = evaluate(ctx, params, eval_set);

    save_checkpoint(cfg.out / "checkpoint.bin", params);
    write_json(cfg.out / "train_report.json", report.to_json());
    write_eval(cfg.out, ev, in.taxonomy);
    write_manifest(cfg, "train", {"checkpoint.bin", "train_report.json", "eval.json", "per_class.tsv"});
    out << "best epoch " << report.best_epoch << " of " << report.stopped_epoch << '\n'
        << f1_line("test", ev);
  });
}

int cmd_selftrain(const RunConfig& cfg0, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = seeded(cfg0);
    const auto in = load_inputs(cfg);
    const auto ctx = in.context();
    std::map<std::string, LabelId> truth;
    const auto split = split_of(cfg, in, truth);
    fs::create_directories(cfg.out);

    auto init = init_model(in.taxonomy, cfg.pipeline.model, ctx.store);
    auto [params, report] = train(split, ctx, std::move(init), cfg.pipeline.train);
    auto st = selftrain_loop(split, ctx, std::move(params), cfg.pipeline.train, cfg.pipeline.sampler,
                             truth.empty() ? nullptr : &truth);
    const auto& eval_set = split.test.empty() ? split.validation : split.test;
    const auto ev = evaluate(ctx, st.params, eval_set);

    save_checkpoint(cfg.out / "checkpoint.bin", st.params);
    write_json(cfg.out / "train_report.json", report.to_json());
    {
      std::ofstream f(cfg.out / "rounds.jsonl", std::ios::binary);
      write_round_reports(f, st.rounds, in.taxonomy);
    }
    {
      std::ofstream f(cfg.out / "sampled.tsv", std::ios::binary);
      write_sampled_ledger(f, st.rounds, in.taxonomy);
    }
    write_json(cfg.out / "selftrain.json", {{"rounds", st.rounds.size()}, {"best_round", st.best_round}});
    write_eval(cfg.out, ev, in.taxonomy);
    write_manifest(cfg, "selftrain",
                   {"checkpoint.bin", "train_report.json", "rounds.jsonl", "sampled.tsv",
                    "selftrain.json", "eval.json", "per_class.tsv"});
    out << st.rounds.size() << " rounds, best round " << st.best_round << '\n' << f1_line("test", ev);
  });
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(cfg.checkpoint, "--checkpoint");
    const auto in = load_inputs(cfg);
    const auto ctx = in.context();
    const auto params = load_checkpoint(cfg.checkpoint, in.taxonomy);
    std::vector<QueryRecord> labeled;
    for (const auto& r : in.records) {
      if (r.labeled()) labeled.push_back(r);
    }
    const auto ev = evaluate(ctx, params, labeled);
    fs::create_directories(cfg.out);
    write_eval(cfg.out, ev, in.taxonomy);
    write_manifest(cfg, "eval", {"eval.json", "per_class.tsv"});
    out << f1_line("eval", ev);
  });
}

int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(cfg.checkpoint, "--checkpoint");
    const auto in = load_inputs(cfg);
    const auto ctx = in.context();
    const auto params = load_checkpoint(cfg.checkpoint, in.taxonomy);
    const auto preds = predict(ctx, params, in.records);
    std::string tsv;
    char buf[32];
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const auto& p = preds[i];
      std::snprintf(buf, sizeof buf, "%.6f", p.probs[in.taxonomy.head_index(p.child)]);
      tsv += in.records[i].id + '\t' + in.taxonomy.name(p.child) + '\t' + in.taxonomy.name(p.parent) +
             '\t' + buf + '\n';
    }
    fs::create_directories(cfg.out);
    write_text(cfg.out / "predictions.tsv", tsv);
    write_manifest(cfg, "predict", {"predictions.tsv"});
    out << tsv;
  });
}

int cmd_sweep(const RunConfig& cfg0, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = seeded(cfg0);
    const auto in = load_inputs(cfg);
    const auto ctx = in.context();
    std::map<std::string, LabelId> truth;
    const auto split = split_of(cfg, in, truth);
    fs::create_directories(cfg.out);

    const auto axes = default_sweep_axes();
    const auto rows = run_sweep(split, ctx, cfg.pipeline, axes, SweepPoint{}, cfg.full_grid);
    const auto table = delta_table(rows);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
      j.push_back({{"axis", r.axis},
                   {"w_intra", r.point.w_intra},
                   {"w_contrastive", r.point.w_contrastive},
                   {"w_child", r.point.w_child},
                   {"micro_f1", r.micro_f1},
                   {"macro_f1", r.macro_f1},
                   {"delta_micro_f1", r.delta_micro},
                   {"delta_macro_f1", r.delta_macro}});
    }
    write_text(cfg.out / "sweep.tsv", table);
    write_json(cfg.out / "sweep.json", j);
    write_manifest(cfg, "sweep", {"sweep.tsv", "sweep.json"});
    out << table;
  });
}

int cmd_ablate(const RunConfig& cfg0, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = seeded(cfg0);
    const auto in = load_inputs(cfg);
    const auto ctx = in.context();
    std::map<std::string, LabelId> truth;
    const auto split = split_of(cfg, in, truth);
    fs::create_directories(cfg.out);

    const auto rows = ablation_run(split, ctx, cfg.pipeline, kAllVariants, truth.empty() ? nullptr : &truth);
    write_json(cfg.out / "ablation.json", ablation_json(rows));
    write_manifest(cfg, "ablate", {"ablation.json"});
    for (const auto& r : rows) out << f1_line(std::string(to_string(r.variant)).c_str(), r.test);
  });
}

int cmd_gen_synthetic(const RunConfig& cfg0, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = seeded(cfg0);
    const auto corpus = gen_synthetic(cfg.synthetic);
    fs::create_directories(cfg.out);
    write_text(cfg.out / "taxonomy.txt", corpus.taxonomy.serialize());
    write_queries(cfg.out / "queries.tsv", corpus.records, corpus.taxonomy);
    write_truth(cfg.out / "truth.tsv", corpus.truth, corpus.taxonomy);
    nlohmann::json j;
    j["command"] = "gen-synthetic";
    j["seed"] = cfg.seed;
    j["synthetic"] = {{"parents", cfg.synthetic.parents},
                      {"children_per_parent", cfg.synthetic.children_per_parent},
                      {"queries_per_child", cfg.synthetic.queries_per_child},
                      {"imbalance", cfg.synthetic.imbalance},
                      {"typo_rate", cfg.synthetic.typo_rate},
                      {"unlabeled_fraction", cfg.synthetic.unlabeled_fraction},
                      {"stems_per_child", cfg.synthetic.stems_per_child}};
    j["outputs"] = {"taxonomy.txt", "queries.tsv", "truth.tsv"};
    write_json(cfg.out / "manifest.json", j);
    out << corpus.records.size() << " queries, " << corpus.truth.size() << " unlabeled\n";
  });
}

}  // namespace hiqc
