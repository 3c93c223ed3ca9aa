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

#include "hiqc/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hiqc/error.hpp"

namespace hiqc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view want) {
  throw Error(ErrorCode::InvalidConfig, "config key '" + std::string(key) + "': cannot use '" +
                                            std::string(value) + "' (" + std::string(want) + ")");
}

double as_double(std::string_view key, std::string_view v) {
  double x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, v, "expected a number");
  return x;
}

std::uint64_t as_uint(std::string_view key, std::string_view v) {
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, v, "expected a non-negative integer");
  return x;
}

bool as_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, v, "expected true or false");
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  auto& m = pipeline.model;
  auto& tr = pipeline.train;
  auto& w = tr.weights;
  auto& s = pipeline.sampler;
  const auto v = trim(value);
  const auto k = trim(key);
  auto u = [&] { return static_cast<std::size_t>(as_uint(k, v)); };
  auto d = [&] { return as_double(k, v); };
  auto b = [&] { return as_bool(k, v); };

  if (k == "taxonomy") taxonomy = std::string(v);
  else if (k == "queries") queries = std::string(v);
  else if (k == "embeddings") embeddings = std::string(v);
  else if (k == "checkpoint") checkpoint = std::string(v);
  else if (k == "truth") truth = std::string(v);
  else if (k == "out") out = std::string(v);
  else if (k == "seed") seed = as_uint(k, v);
  else if (k == "full_grid") full_grid = b();
  else if (k == "model.buckets") m.buckets = u();
  else if (k == "model.query_dim") m.query_dim = u();
  else if (k == "model.hidden_dim") m.hidden_dim = u();
  else if (k == "model.graph_dim") m.graph_dim = u();
  else if (k == "model.encoder_scale") m.encoder_scale = d();
  else if (k == "model.mask_root_attention") m.mask_root_attention = b();
  else if (k == "model.label_hierarchy") m.label_hierarchy = b();
  else if (k == "model.identity_init") m.identity_init = b();
  else if (k == "model.align_gain") m.align_gain = d();
  else if (k == "model.label_head_init") m.label_head_init = d();
  else if (k == "train.epochs") tr.epochs = u();
  else if (k == "train.batch_size") tr.batch_size = u();
  else if (k == "train.learning_rate") tr.learning_rate = d();
  else if (k == "train.adam_beta1") tr.adam_beta1 = d();
  else if (k == "train.adam_beta2") tr.adam_beta2 = d();
  else if (k == "train.adam_eps") tr.adam_eps = d();
  else if (k == "train.early_stop_patience") tr.early_stop_patience = u();
  else if (k == "loss.lambda") w.lambda = d();
  else if (k == "loss.w_intra") w.w_intra = d();
  else if (k == "loss.w_contrastive") w.w_contrastive = d();
  else if (k == "loss.tau") w.tau = d();
  else if (k == "loss.literal_contrastive") w.literal_contrastive = b();
  else if (k == "sampler.k_neighbors") s.k_neighbors = u();
  else if (k == "sampler.w_child") s.w_child = d();
  else if (k == "sampler.epsilon") s.epsilon = d();
  else if (k == "sampler.temperature") s.temperature = d();
  else if (k == "sampler.budget") s.budget_count = u();
  else if (k == "sampler.budget_fraction") {
    s.budget_fraction = d();
    s.budget_count.reset();
  } else if (k == "sampler.max_rounds") s.max_rounds = u();
  else if (k == "sampler.patience_rounds") s.patience_rounds = u();
  else if (k == "sampler.index") s.index_kind = parse_index_kind(v);
  else if (k == "sampler.hnsw_m") s.hnsw.m = u();
  else if (k == "sampler.hnsw_ef_construction") s.hnsw.ef_construction = u();
  else if (k == "sampler.hnsw_ef_search") s.hnsw.ef_search = u();
  else if (k == "sampler.literal_prob_direction") s.literal_prob_direction = b();
  else if (k == "self_training") pipeline.self_training = b();
  else if (k == "split.train") ratios.train = d();
  else if (k == "split.validation") ratios.validation = d();
  else if (k == "split.test") ratios.test = d();
  else if (k == "split.unlabeled_mode") {
    if (v == "strip") unlabeled_mode = UnlabeledMode::Strip;
    else if (v == "separate") unlabeled_mode = UnlabeledMode::Separate;
    else bad(k, v, "expected strip or separate");
  } else if (k == "split.strip_fraction") strip_fraction = d();
  else if (k == "synthetic.parents") synthetic.parents = u();
  else if (k == "synthetic.children_per_parent") synthetic.children_per_parent = u();
  else if (k == "synthetic.queries_per_child") synthetic.queries_per_child = u();
  else if (k == "synthetic.imbalance") synthetic.imbalance = d();
  else if (k == "synthetic.typo_rate") synthetic.typo_rate = d();
  else if (k == "synthetic.unlabeled_fraction") synthetic.unlabeled_fraction = d();
  else if (k == "synthetic.stems_per_child") synthetic.stems_per_child = u();
  else throw Error(ErrorCode::InvalidConfig, "unknown config key '" + std::string(k) + "'");
}

void RunConfig::apply_text(std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig,
                  "config line " + std::to_string(line_no) + ": expected key=value");
    }
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_text(buf.str());
}

void RunConfig::apply_seed() {
  pipeline.set_seed(seed);
  synthetic.seed = seed;
}

nlohmann::json RunConfig::to_json() const {
  const auto& m = pipeline.model;
  const auto& tr = pipeline.train;
  const auto& w = tr.weights;
  const auto& s = pipeline.sampler;
  nlohmann::json j;
  j["seed"] = seed;
  j["model"] = {{"buckets", m.buckets},
                {"query_dim", m.query_dim},
                {"hidden_dim", m.hidden_dim},
                {"graph_dim", m.graph_dim},
                {"encoder_scale", m.encoder_scale},
                {"mask_root_attention", m.mask_root_attention},
                {"label_hierarchy", m.label_hierarchy},
                {"identity_init", m.identity_init},
                {"align_gain", m.align_gain},
                {"label_head_init", m.label_head_init}};
  j["train"] = {{"epochs", tr.epochs},
                {"batch_size", tr.batch_size},
                {"learning_rate", tr.learning_rate},
                {"adam_beta1", tr.adam_beta1},
                {"adam_beta2", tr.adam_beta2},
                {"adam_eps", tr.adam_eps},
                {"early_stop_patience", tr.early_stop_patience}};
  j["loss"] = {{"lambda", w.lambda},
               {"w_intra", w.w_intra},
               {"w_contrastive", w.w_contrastive},
               {"tau", w.tau},
               {"literal_contrastive", w.literal_contrastive}};
  j["sampler"] = {{"k_neighbors", s.k_neighbors},
                  {"w_child", s.w_child},
                  {"epsilon", s.epsilon},
                  {"temperature", s.temperature},
                  {"budget", s.budget_count ? nlohmann::json(*s.budget_count) : nlohmann::json()},
                  {"budget_fraction", s.budget_fraction},
                  {"max_rounds", s.max_rounds},
                  {"patience_rounds", s.patience_rounds},
                  {"index", to_string(s.index_kind)},
                  {"hnsw_m", s.hnsw.m},
                  {"hnsw_ef_construction", s.hnsw.ef_construction},
                  {"hnsw_ef_search", s.hnsw.ef_search},
                  {"literal_prob_direction", s.literal_prob_direction}};
  j["self_training"] = pipeline.self_training;
  j["split"] = {{"train", ratios.train},
                {"validation", ratios.validation},
                {"test", ratios.test},
                {"unlabeled_mode", unlabeled_mode == UnlabeledMode::Strip ? "strip" : "separate"},
                {"strip_fraction", strip_fraction}};
  return j;
}

}  // namespace hiqc
