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

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "test_util.hpp"

#include "hiqc/cli.hpp"

using namespace hiqc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Small, fast settings shared by the training commands.
RunConfig small_config(const fs::path& data, const fs::path& out) {
  RunConfig cfg;
  cfg.taxonomy = data / "taxonomy.txt";
  cfg.queries = data / "queries.tsv";
  cfg.truth = data / "truth.tsv";
  cfg.out = out;
  cfg.apply_text(
      "model.buckets=1024\nmodel.query_dim=8\nmodel.hidden_dim=8\nmodel.graph_dim=8\n"
      "train.epochs=2\ntrain.batch_size=8\ntrain.learning_rate=0.02\n"
      "sampler.max_rounds=2\nsampler.budget=3\nsampler.k_neighbors=3\n");
  return cfg;
}

fs::path synthetic_data(const fs::path& dir) {
  RunConfig gen;
  gen.out = dir;
  gen.apply_text("synthetic.parents=2\nsynthetic.children_per_parent=2\nsynthetic.queries_per_child=15\n");
  std::ostringstream out, err;
  REQUIRE(cmd_gen_synthetic(gen, out, err) == 0);
  return dir;
}

}  // namespace

TEST_CASE("validate: clean WOS-style inputs") {
  RunConfig cfg;
  cfg.taxonomy = test::data_path("wos_taxonomy.txt");
  cfg.queries = test::data_path("wos_queries.tsv");
  std::ostringstream out, err;
  CHECK(cmd_validate(cfg, out, err) == 0);
  CHECK(out.str().find("7 parents, 134 children") != std::string::npos);
  CHECK(err.str().empty());
}

TEST_CASE("validate: unknown label names the row") {
  const auto dir = test::scratch_dir("cli_validate");
  spit(dir / "q.tsv", "q1\tok\tcs area 01\nq2\tbad\tweapons-x\n");
  RunConfig cfg;
  cfg.taxonomy = test::data_path("wos_taxonomy.txt");
  cfg.queries = dir / "q.tsv";
  std::ostringstream out, err;
  CHECK(cmd_validate(cfg, out, err) == 2);
  CHECK(err.str().find("UnknownLabel") != std::string::npos);
  CHECK(err.str().find("row 2") != std::string::npos);
}

TEST_CASE("validate: empty taxonomy") {
  const auto dir = test::scratch_dir("cli_empty");
  spit(dir / "t.txt", "# nothing here\n");
  spit(dir / "q.tsv", "");
  RunConfig cfg;
  cfg.taxonomy = dir / "t.txt";
  cfg.queries = dir / "q.tsv";
  std::ostringstream out, err;
  CHECK(cmd_validate(cfg, out, err) == 2);
  CHECK(err.str().find("EmptyTaxonomy") != std::string::npos);
}

TEST_CASE("config keys") {
  RunConfig cfg;
  cfg.apply_text("# comment\nloss.w_intra = 0.3\nsampler.index=levenshtein\nsplit.unlabeled_mode=separate\n");
  CHECK(cfg.pipeline.train.weights.w_intra == 0.3);
  CHECK(cfg.pipeline.sampler.index_kind == IndexKind::Levenshtein);
  CHECK(cfg.unlabeled_mode == UnlabeledMode::Separate);
  CHECK_ERROR_CODE(cfg.apply_text("no.such.key=1\n"), ErrorCode::InvalidConfig);
  CHECK_ERROR_CODE(cfg.apply_text("train.epochs=many\n"), ErrorCode::InvalidConfig);
  CHECK_ERROR_CODE(cfg.apply_text("just words\n"), ErrorCode::InvalidConfig);
}

TEST_CASE("train, eval and predict") {
  const auto data = synthetic_data(test::scratch_dir("cli_data"));
  const auto out_dir = test::scratch_dir("cli_train");
  auto cfg = small_config(data, out_dir);
  std::ostringstream out, err;
  REQUIRE(cmd_train(cfg, out, err) == 0);
  for (const char* f : {"checkpoint.bin", "train_report.json", "eval.json", "per_class.tsv", "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(out_dir / f), f);
  }
  const auto manifest = nlohmann::json::parse(slurp(out_dir / "manifest.json"));
  CHECK(manifest["command"] == "train");

  RunConfig ev = cfg;
  ev.checkpoint = out_dir / "checkpoint.bin";
  ev.out = test::scratch_dir("cli_eval");
  CHECK(cmd_eval(ev, out, err) == 0);
  CHECK(fs::exists(ev.out / "eval.json"));

  const auto one = test::scratch_dir("cli_one");
  spit(one / "q.tsv", "only\tsome query text\t\n");
  RunConfig pr = ev;
  pr.queries = one / "q.tsv";
  pr.out = one / "out";
  std::ostringstream pout;
  REQUIRE(cmd_predict(pr, pout, err) == 0);
  const auto line = pout.str();
  CHECK(line == slurp(pr.out / "predictions.tsv"));
  std::istringstream cols(line);
  std::string id, child, parent, prob;
  std::getline(cols, id, '\t');
  std::getline(cols, child, '\t');
  std::getline(cols, parent, '\t');
  std::getline(cols, prob, '\n');
  CHECK(id == "only");
  const auto t = Taxonomy::load(cfg.taxonomy);
  CHECK(t.is_child(t.id_of(child)));
  CHECK(t.parent_of(t.id_of(child)) == t.id_of(parent));
  const double p = std::stod(prob);
  CHECK(p >= 0.0);
  CHECK(p <= 1.0);
  CHECK(std::count(line.begin(), line.end(), '\n') == 1);

  RunConfig missing = pr;
  missing.checkpoint.clear();
  CHECK(cmd_predict(missing, pout, err) == 2);
}

TEST_CASE("reruns are byte-identical") {
  const auto data = synthetic_data(test::scratch_dir("cli_det_data"));
  const auto a = test::scratch_dir("cli_det_a"), b = test::scratch_dir("cli_det_b");
  std::ostringstream out, err;
  REQUIRE(cmd_selftrain(small_config(data, a), out, err) == 0);
  REQUIRE(cmd_selftrain(small_config(data, b), out, err) == 0);
  for (const char* f : {"checkpoint.bin", "train_report.json", "rounds.jsonl", "sampled.tsv", "eval.json"}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  CHECK(slurp(a / "sampled.tsv").rfind("round\tid\tpseudo_child\tpseudo_parent\tdist\n", 0) == 0);
}

TEST_CASE("inputs are never modified") {
  const auto data = synthetic_data(test::scratch_dir("cli_ro_data"));
  const auto before = slurp(data / "queries.tsv") + slurp(data / "taxonomy.txt");
  std::ostringstream out, err;
  REQUIRE(cmd_train(small_config(data, test::scratch_dir("cli_ro")), out, err) == 0);
  CHECK(slurp(data / "queries.tsv") + slurp(data / "taxonomy.txt") == before);
}
