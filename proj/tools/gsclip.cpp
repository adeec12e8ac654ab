// Copyright 2026 The gsclip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// gsclip: generate candidate corpora, explain the difference between two
// image-embedding sets, evaluate against an annotated catalog, and write
// synthetic planted-shift fixtures.

#include <cstdio>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gsclip/gsclip.hpp"
#include "gsclip/io/completion_client.hpp"
#include "gsclip/pipeline.hpp"
#include "json.hpp"
#include "params.hpp"

namespace {

using namespace gsclip;
using cli::ParamSet;
using ojson = nlohmann::ordered_json;

// Machine-parsable failure record on stderr.
int report_error(std::string_view code, std::string_view detail) {
  std::cerr << ojson{{"error", code}, {"detail", detail}}.dump() << "\n";
  return 2;
}

io::fs::path table_path_for(const ParamSet& p, const std::string& out) {
  if (p.given("table")) return p.str("table");
  io::fs::path t(out);
  t.replace_extension(".txt");
  return t;
}

void add_selector_params(ParamSet& p) {
  p.add("alpha", "0.05", "significance level");
  p.add("top-x", "5", "explanations shown per report");
  p.add("pairing", "negation", "contrast pairing: negation|general");
  p.add("antonyms", "", "antonym table (JSONL); built-in table when empty");
  p.add("normalize", "true", "L2-normalize image and text embeddings at load");
  p.add("min-diff-norm", "1e-8", "exclude candidates whose difference vector is shorter");
  p.add("projection", "absolute", "projection: absolute|signed");
  p.add("test", "welch", "two-sample test: welch|student");
  p.add("correction", "none", "multiple-comparison correction: none|bonferroni");
  p.add("cache-normalized", "true", "normalization flag of the cached text embeddings to use");
}

gen::ContrastPolicy contrast_policy(const ParamSet& p) {
  gen::ContrastPolicy policy;
  policy.mode = parse_contrast_mode(p.str("pairing"));
  if (p.given("antonyms")) policy.antonyms = io::decode_antonym_table(io::read_file(p.str("antonyms")));
  return policy;
}

SelectorConfig selector_config(const ParamSet& p) {
  SelectorConfig c;
  c.alpha = p.real("alpha");
  c.top_x = p.count("top-x");
  c.normalize = p.boolean("normalize");
  c.pairing = parse_contrast_mode(p.str("pairing"));
  c.min_diff_norm = p.real("min-diff-norm");
  const auto projection = p.str("projection");
  if (projection == "absolute") {
    c.projection = ProjectionMode::absolute;
  } else if (projection == "signed") {
    c.projection = ProjectionMode::signed_dot;
  } else {
    throw Error(ErrorCode::InvalidConfig, "--projection must be absolute or signed");
  }
  const auto test = p.str("test");
  if (test == "welch") {
    c.test = stats::TTestKind::welch;
  } else if (test == "student") {
    c.test = stats::TTestKind::student;
  } else {
    throw Error(ErrorCode::InvalidConfig, "--test must be welch or student");
  }
  const auto correction = p.str("correction");
  if (correction == "none") {
    c.correction = Correction::none;
  } else if (correction == "bonferroni") {
    c.correction = Correction::bonferroni;
  } else {
    throw Error(ErrorCode::InvalidConfig, "--correction must be none or bonferroni");
  }
  c.validate();
  return c;
}

// -- generate ------------------------------------------------------------------

void setup_generate(ParamSet& p) {
  p.add("object", "", "main object the candidates describe");
  p.add("vocab", "", "annotation vocabulary (JSON) for rule-based candidates");
  p.add("templates", "", "templates (JSONL); built-in templates when empty");
  p.add("lm-dump", "", "saved completion dump (JSONL)");
  p.add("lm-endpoint", "", "completion service URL, queried when no dump is given");
  p.add("lm-prefix", "", "completion prefix; the general statement when empty");
  p.add("lm-save", "", "write the fetched completions to this dump file");
  p.add("min-log-prob", "-inf", "drop completions below this log-probability");
  p.add("freq-list", "", "word-frequency list (JSONL) for the baseline");
  p.add("freq-template", "a photo of a [object] with [context]", "baseline template, one free slot");
  p.add("freq-pos", "NOUN", "comma-separated POS tags the baseline keeps");
  p.add("cap", std::to_string(gen::kDefaultCandidateCap), "per-source cap for lm and frequency candidates");
  p.add("pairing", "negation", "contrast pairing: negation|general");
  p.add("antonyms", "", "antonym table (JSONL); built-in table when empty");
  p.add("out", "", "corpus output (JSONL)");
}

int run_generate(const ParamSet& p) {
  const auto object = p.required("object");
  const auto out = p.required("out");
  const auto policy = contrast_policy(p);
  const std::size_t cap = p.count("cap");
  if (!p.given("vocab") && !p.given("lm-dump") && !p.given("lm-endpoint") && !p.given("freq-list")) {
    throw Error(ErrorCode::InvalidConfig, "give at least one of --vocab, --lm-dump, --lm-endpoint, --freq-list");
  }

  std::vector<CandidateExplanation> rule, lm, freq;
  if (p.given("vocab")) {
    const auto vocab = io::decode_vocabulary(io::read_file(p.str("vocab")));
    const auto templates =
        p.given("templates") ? io::decode_templates(io::read_file(p.str("templates"))) : gen::default_templates();
    rule = gen::rule_generate(vocab, templates, object, policy);
  }
  if (p.given("lm-dump") || p.given("lm-endpoint")) {
    io::CandidateDump dump;
    if (p.given("lm-dump")) {
      dump = io::decode_candidate_dump(io::read_file(p.str("lm-dump")));
    } else {
      const auto prefix = p.given("lm-prefix") ? p.str("lm-prefix") : gen::general_statement(object);
      dump.header = nlohmann::json{{"endpoint", p.str("lm-endpoint")}, {"prefix", prefix}};
      dump.records = io::fetch_completions(p.str("lm-endpoint"), prefix, object, cap, p.real("min-log-prob"));
      if (p.given("lm-save")) io::write_file_atomic(p.str("lm-save"), io::encode_candidate_dump(dump));
    }
    lm = gen::load_lm_candidates(dump.records, object, cap, p.real("min-log-prob"), policy);
  }
  if (p.given("freq-list")) {
    const auto words = io::decode_word_list(io::read_file(p.str("freq-list")));
    const auto tpl = gen::TemplateSpec::parse_named(p.str("freq-template"));
    const auto tags = p.list("freq-pos");
    freq = gen::frequency_generate(words, object, tpl, {tags.begin(), tags.end()}, cap, policy);
  }
  const auto corpus = gen::assemble_corpus(rule, lm, freq);
  io::write_file_atomic(out, io::encode_corpus(corpus));

  std::size_t counts[3] = {0, 0, 0};
  for (const auto& c : corpus) ++counts[static_cast<int>(c.source)];
  std::printf("wrote %zu candidates (rule %zu, lm %zu, frequency %zu) to %s\n", corpus.size(), counts[0], counts[1],
              counts[2], out.c_str());
  return 0;
}

// -- explain ---------------------------------------------------------------------

void setup_explain(ParamSet& p) {
  p.add("set-a", "", "first image-embedding set (GSCE)");
  p.add("set-b", "", "second image-embedding set (GSCE)");
  p.add("corpus", "", "candidate corpus (JSONL)");
  p.add("text-cache", "", "text-embedding cache (GSCE)");
  p.add("model-tag", "ViT-B/32", "model tag of the cached text embeddings");
  add_selector_params(p);
  p.add("out", "", "report output (JSON)");
  p.add("table", "", "text table output; <out>.txt when empty");
}

int run_explain(const ParamSet& p, ExecOptions exec) {
  const auto out = p.required("out");
  const auto config = selector_config(p);
  const auto set_a = io::read_embeddings(p.required("set-a"));
  const auto set_b = io::read_embeddings(p.required("set-b"));
  const auto corpus =
      pipeline::apply_pairing(io::decode_corpus(io::read_file(p.required("corpus"))), contrast_policy(p));
  const auto cache = io::TextEmbeddingCache::load(p.required("text-cache"));
  const auto text_embs =
      pipeline::text_pairs_from_cache(corpus, cache, p.str("model-tag"), p.boolean("cache-normalized"));

  auto report = explain(set_a, set_b, corpus, text_embs, config, exec);
  report.set_a_id = p.str("set-a");
  report.set_b_id = p.str("set-b");

  auto j = io::report_to_json(report);
  j["run_config"] = p.echo();
  const auto table = io::format_report_table(report);
  io::write_file_atomic(out, j.dump(2) + "\n");
  io::write_file_atomic(table_path_for(p, out), table);
  std::fputs(table.c_str(), stdout);
  return 0;
}

// -- evaluate --------------------------------------------------------------------

void setup_evaluate(ParamSet& p) {
  p.add("catalog", "", "evaluation catalog (JSON)");
  p.add("count", "100", "number of sampled set pairs");
  p.add("seed", "0", "pair-sampling seed");
  p.add("x", "1,3,5", "comma-separated Acc@x cutoffs");
  p.add("metrics", "Label,KeyWords", "comma-separated metrics: Label, KeyWords");
  p.add("synonyms", "", "synonym table (JSONL) for KeyWords");
  add_selector_params(p);
  p.add("out", "", "accuracy output (JSON)");
  p.add("table", "", "text table output; <out>.txt when empty");
}

int run_evaluate(const ParamSet& p, ExecOptions exec) {
  const auto out = p.required("out");
  const auto catalog_path = io::fs::path(p.required("catalog"));
  const auto catalog = io::decode_catalog(io::read_file(catalog_path), catalog_path.parent_path());

  pipeline::EvaluationOptions options;
  options.count = p.count("count");
  options.seed = p.count("seed");
  options.cutoffs.clear();
  for (const auto& x : p.list("x")) {
    char* end = nullptr;
    const auto v = std::strtoull(x.c_str(), &end, 10);
    if (end != x.c_str() + x.size() || v == 0) throw Error(ErrorCode::InvalidConfig, "bad cutoff '" + x + "'");
    options.cutoffs.push_back(v);
  }
  options.metrics.clear();
  for (const auto& m : p.list("metrics")) options.metrics.push_back(eval::parse_metric(m));
  if (options.cutoffs.empty() || options.metrics.empty()) {
    throw Error(ErrorCode::InvalidConfig, "--x and --metrics must be nonempty");
  }
  options.selector = selector_config(p);
  options.contrast = contrast_policy(p);
  options.cache_normalized = p.boolean("cache-normalized");
  const auto synonyms =
      p.given("synonyms") ? io::decode_synonym_table(io::read_file(p.str("synonyms"))) : eval::SynonymTable{};

  const auto run = pipeline::evaluate_catalog(catalog, synonyms, options, exec);

  auto j = io::accuracy_to_json(run.table);
  j["pairs"] = ojson::array();
  for (const auto& e : run.pairs) {
    ojson pj{{"set_a", e.pair.set_a_ref},
             {"set_b", e.pair.set_b_ref},
             {"object", e.pair.object},
             {"ground_truth", e.pair.ground_truth()},
             {"significant_count", e.report.significant_count}};
    pj["top"] = ojson::array();
    for (const auto& s : e.report.top()) pj["top"].push_back({{"text", s.candidate.text}, {"p_value", s.p_value}});
    for (auto m : run.table.metrics) {
      const auto rank = eval::first_hit_rank(e, m, synonyms);
      pj["first_hit_rank"][std::string(eval::to_string(m))] = rank ? ojson(*rank) : ojson(nullptr);
    }
    j["pairs"].push_back(std::move(pj));
  }
  j["run_config"] = p.echo();
  const auto table = eval::format_accuracy_table(run.table);
  io::write_file_atomic(out, j.dump(2) + "\n");
  io::write_file_atomic(table_path_for(p, out), table);
  std::fputs(table.c_str(), stdout);
  return 0;
}

// -- synth -------------------------------------------------------------------------

void setup_synth(ParamSet& p) {
  const synth::PlantedShiftSpec d;
  p.add("out-dir", "", "output directory");
  p.add("dim", std::to_string(d.dim), "embedding dimension");
  p.add("n", std::to_string(d.n), "rows in each A set");
  p.add("m", std::to_string(d.m), "rows in each B set");
  p.add("delta", "0.5", "planted shift magnitude");
  p.add("sigma", "1.0", "noise scale");
  p.add("distractors", std::to_string(d.distractor_count), "distractor candidates");
  p.add("seed", "0", "generator seed");
  p.add("object", d.object, "main object");
  p.add("planted-label", d.planted_label, "label of the planted attribute");
  p.add("replicates", "1", "independent A and B draws; the catalog pairs every A with every B");
  p.add("model-tag", "synthetic", "model tag written to the text cache and catalog");
}

int run_synth(const ParamSet& p) {
  const io::fs::path dir = p.required("out-dir");
  synth::PlantedShiftSpec spec;
  spec.dim = p.count("dim");
  spec.n = p.count("n");
  spec.m = p.count("m");
  spec.shift_magnitude = p.real("delta");
  spec.noise_scale = p.real("sigma");
  spec.distractor_count = p.count("distractors");
  spec.seed = p.count("seed");
  spec.object = p.str("object");
  spec.planted_label = p.str("planted-label");
  const std::size_t replicates = p.count("replicates");
  if (replicates == 0) throw Error(ErrorCode::InvalidSpec, "--replicates must be positive");
  const auto model_tag = p.str("model-tag");

  synth::PlantedShiftGenerator generator(spec);
  const auto fixture = generator.fixture();
  io::fs::create_directories(dir);

  io::Catalog catalog;
  catalog.model_tag = model_tag;
  catalog.text_cache = "text_cache.gsce";
  catalog.corpora[text::to_lower(spec.object)] = "corpus.jsonl";
  std::vector<eval::SetDescriptor> b_sets;
  for (std::size_t r = 0; r < replicates; ++r) {
    char tag[32];
    std::snprintf(tag, sizeof(tag), "%03zu", r);
    const auto sets = r == 0 ? std::pair{fixture.set_a, fixture.set_b} : generator.next_sets(std::string("r") + tag);
    const std::string a_name = std::string("a_") + tag, b_name = std::string("b_") + tag;
    io::write_embeddings(sets.first, dir / (a_name + ".gsce"));
    io::write_embeddings(sets.second, dir / (b_name + ".gsce"));
    catalog.sets.push_back({a_name, spec.object, {spec.planted_label}, a_name + ".gsce"});
    b_sets.push_back({b_name, spec.object, {}, b_name + ".gsce"});
  }
  catalog.sets.insert(catalog.sets.end(), b_sets.begin(), b_sets.end());

  io::TextEmbeddingCache cache;
  for (const auto& c : fixture.corpus) {
    const auto& pair = fixture.text_embs.at(c.id);
    cache.insert({model_tag, true, c.text}, pair.emb_text);
    cache.insert({model_tag, true, c.contrast_text}, pair.emb_contrast);
  }
  cache.save(dir / "text_cache.gsce");
  io::write_file_atomic(dir / "corpus.jsonl", io::encode_corpus(fixture.corpus));
  io::write_file_atomic(dir / "catalog.json", io::encode_catalog(catalog));

  ojson info{{"planted_id", fixture.planted_id}, {"replicates", replicates}, {"run_config", p.echo()}};
  io::write_file_atomic(dir / "fixture.json", info.dump(2) + "\n");
  std::printf("wrote %zu A and %zu B sets, %zu candidates (planted %s) to %s\n", replicates, replicates,
              fixture.corpus.size(), fixture.planted_id.c_str(), dir.c_str());
  return 0;
}

// -- cache-status ------------------------------------------------------------------

void setup_cache_status(ParamSet& p) {
  p.add("text-cache", "", "text-embedding cache (GSCE)");
  p.add("model-tag", "ViT-B/32", "model tag to check the corpus against");
  p.add("cache-normalized", "true", "normalization flag to check the corpus against");
  p.add("corpus", "", "corpus (JSONL) whose sentences should be cached");
  p.add("pairing", "negation", "contrast pairing used to derive the contrast sentences");
  p.add("antonyms", "", "antonym table (JSONL); built-in table when empty");
  p.add("misses-out", "", "write uncached sentences here, one JSON string per line");
}

int run_cache_status(const ParamSet& p) {
  const auto cache = io::TextEmbeddingCache::load(p.required("text-cache"));
  ojson j{{"entries", cache.size()}, {"dim", cache.dim()}, {"model_tags", cache.model_tags()}};
  if (p.given("corpus")) {
    const auto corpus =
        pipeline::apply_pairing(io::decode_corpus(io::read_file(p.str("corpus"))), contrast_policy(p));
    const auto found = cache.lookup(pipeline::required_sentences(corpus), p.str("model-tag"),
                                    p.boolean("cache-normalized"));
    j["hits"] = found.hits.size();
    j["misses"] = found.misses.size();
    if (p.given("misses-out")) {
      std::string lines;
      for (const auto& s : found.misses) lines += nlohmann::json(s).dump() + "\n";
      io::write_file_atomic(p.str("misses-out"), lines);
    }
  }
  std::printf("%s\n", j.dump().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gsclip: explain differences between image-embedding sets in words"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::string workers_flag;
  app.add_option("--config", config_path, "JSON config file (also GSCLIP_CONFIG)");
  app.add_option("--workers", workers_flag, "worker threads; never changes results (also GSCLIP_WORKERS)");

  auto* generate = app.add_subcommand("generate", "build a candidate corpus");
  auto* explain_cmd = app.add_subcommand("explain", "rank explanations for one pair of sets");
  auto* evaluate = app.add_subcommand("evaluate", "accuracy over sampled catalog pairs");
  auto* synth_cmd = app.add_subcommand("synth", "write a planted-shift fixture");
  auto* cache_status = app.add_subcommand("cache-status", "summarize a text-embedding cache");
  ParamSet p_generate(generate, "generate"), p_explain(explain_cmd, "explain"), p_evaluate(evaluate, "evaluate"),
      p_synth(synth_cmd, "synth"), p_cache(cache_status, "cache-status");
  setup_generate(p_generate);
  setup_explain(p_explain);
  setup_evaluate(p_evaluate);
  setup_synth(p_synth);
  setup_cache_status(p_cache);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("UsageError", e.what());
  }

  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv("GSCLIP_CONFIG")) config_path = env;
    }
    nlohmann::json config = nlohmann::json::object();
    if (!config_path.empty()) {
      try {
        config = nlohmann::json::parse(io::read_file(config_path));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, config_path + ": " + e.what());
      }
      if (!config.is_object()) throw Error(ErrorCode::InvalidConfig, config_path + ": not a JSON object");
    }

    ExecOptions exec;
    if (workers_flag.empty()) {
      if (const char* env = std::getenv("GSCLIP_WORKERS")) {
        workers_flag = env;
      } else if (config.contains("workers")) {
        workers_flag = cli::config_value_string(config["workers"]);
      }
    }
    if (!workers_flag.empty()) {
      char* end = nullptr;
      const auto w = std::strtoull(workers_flag.c_str(), &end, 10);
      if (end != workers_flag.c_str() + workers_flag.size() || w == 0) {
        throw Error(ErrorCode::InvalidConfig, "--workers must be a positive integer");
      }
      exec.workers = w;
    }

    if (generate->parsed()) {
      p_generate.resolve(config);
      return run_generate(p_generate);
    }
    if (explain_cmd->parsed()) {
      p_explain.resolve(config);
      return run_explain(p_explain, exec);
    }
    if (evaluate->parsed()) {
      p_evaluate.resolve(config);
      return run_evaluate(p_evaluate, exec);
    }
    if (synth_cmd->parsed()) {
      p_synth.resolve(config);
      return run_synth(p_synth);
    }
    p_cache.resolve(config);
    return run_cache_status(p_cache);
  } catch (const Error& e) {
    return report_error(to_string(e.code()), e.detail());
  } catch (const std::exception& e) {
    return report_error("InternalError", e.what());
  }
}
