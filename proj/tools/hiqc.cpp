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

// hiqc command-line entry point.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hiqc/cli.hpp"
#include "hiqc/error.hpp"
#include "hiqc/kernels.hpp"

int main(int argc, char** argv) {
  if (const char* t = std::getenv("HIQC_THREADS")) hiqc::kernels::set_max_threads(std::atoi(t));

  CLI::App app{"Semi-supervised hierarchical query classification"};
  app.require_subcommand(1);

  std::string taxonomy, queries, embeddings, checkpoint, truth, config, out = "out";
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool full_grid = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--taxonomy", taxonomy, "Taxonomy file (indented text)");
    sub->add_option("--queries", queries, "Query TSV: id, text, child label");
    sub->add_option("--embeddings", embeddings, "Optional precomputed query embeddings");
    sub->add_option("--config", config, "key=value config file");
    sub->add_option("--set", overrides, "Extra key=value overrides, applied after --config");
    sub->add_option("--seed", seed, "Base seed")->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--out", out, "Output directory");
  };

  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(const hiqc::RunConfig&, std::ostream&, std::ostream&);
  };
  const std::vector<Cmd> cmds{
      {"validate", "Check taxonomy, queries and embeddings", hiqc::cmd_validate},
      {"train", "Train a classifier", hiqc::cmd_train},
      {"selftrain", "Train, then run neighborhood-aware self-training", hiqc::cmd_selftrain},
      {"eval", "Score a checkpoint on labeled queries", hiqc::cmd_eval},
      {"predict", "Predict child and parent labels", hiqc::cmd_predict},
      {"sweep", "One-factor sweep over the loss and sampler weights", hiqc::cmd_sweep},
      {"ablate", "Ablation table over the model variants", hiqc::cmd_ablate},
      {"gen-synthetic", "Write a synthetic corpus", hiqc::cmd_gen_synthetic},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    if (std::string(c.name) == "eval" || std::string(c.name) == "predict") {
      sub->add_option("--checkpoint", checkpoint, "Checkpoint written by train/selftrain")->required();
    }
    if (std::string(c.name) == "train" || std::string(c.name) == "selftrain" ||
        std::string(c.name) == "ablate" || std::string(c.name) == "sweep") {
      sub->add_option("--truth", truth, "Withheld labels for pseudo-label accuracy");
    }
    if (std::string(c.name) == "sweep") sub->add_flag("--full-grid", full_grid, "Run the full Cartesian grid");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  hiqc::RunConfig cfg;
  try {
    if (!config.empty()) cfg.apply_file(config);
    for (const auto& kv : overrides) cfg.apply_text(kv);
  } catch (const hiqc::Error& e) {
    std::cerr << "error: " << hiqc::to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  }
  if (!taxonomy.empty()) cfg.taxonomy = taxonomy;
  if (!queries.empty()) cfg.queries = queries;
  if (!embeddings.empty()) cfg.embeddings = embeddings;
  if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
  if (!truth.empty()) cfg.truth = truth;
  if (seed_given) cfg.seed = seed;
  if (full_grid) cfg.full_grid = true;
  cfg.out = out;

  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (subs[i]->parsed()) return cmds[i].fn(cfg, std::cout, std::cerr);
  }
  return 1;
}
