// Copyright 2026 The SciSumm Authors. All Rights Reserved.
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

// Command-line front end: ingest, label, train, summarize, evaluate, bench.
// Exit codes: 0 success, 1 contract or validation failure, 2 I/O or usage.

#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scisumm/scisumm.hpp"

namespace scisumm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitContract = 1;
inline constexpr int kExitIo = 2;

// Raised for unreadable inputs or unwritable outputs.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SharedFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> window, layers, heads, d_model;
  std::optional<double> global_ratio, budget_ratio;
  std::optional<std::string> trigram_threshold;
  bool reinforced = false;
};

// Defaults, then the config file, then --set pairs, then dedicated flags.
inline RunConfig resolve_config(const SharedFlags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) {
    if (!std::filesystem::exists(f.config_path)) throw IoError("config file not found: " + f.config_path);
    cfg.merge_file(f.config_path);
  }
  for (const std::string& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got " + kv);
    cfg.set(trim(kv.substr(0, eq)), kv.substr(eq + 1));
  }
  auto num = [](auto v) {
    std::ostringstream oss;
    oss << std::setprecision(17) << v;
    return oss.str();
  };
  if (f.seed) cfg.set("seed", num(*f.seed));
  if (f.window) cfg.set("window", num(*f.window));
  if (f.layers) cfg.set("layers", num(*f.layers));
  if (f.heads) cfg.set("heads", num(*f.heads));
  if (f.d_model) cfg.set("d_model", num(*f.d_model));
  if (f.global_ratio) cfg.set("global_ratio", num(*f.global_ratio));
  if (f.budget_ratio) cfg.set("budget_ratio", num(*f.budget_ratio));
  if (f.trigram_threshold) cfg.set("trigram_threshold", *f.trigram_threshold);
  if (f.reinforced) cfg.set("reinforced", "true");
  cfg.model_config().check();
  return cfg;
}

inline TrainConfig train_config(const RunConfig& cfg) {
  TrainConfig t;
  t.lr_scale = cfg.get_double("lr_scale");
  t.warmup_steps = cfg.get_uint("warmup_steps");
  t.accumulation_steps = cfg.get_uint("accumulation_steps");
  t.clip_norm = cfg.get_double("clip_norm");
  t.epochs = cfg.get_uint("epochs");
  t.reinforced = cfg.get_bool("reinforced");
  t.candidates_k = cfg.get_uint("candidates_k");
  t.seed = cfg.get_uint("seed");
  t.selection = cfg.selection_config();
  return t;
}

namespace detail {

inline std::ofstream open_output(const std::string& path) {
  if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty())
    std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << std::setprecision(17);
  return out;
}

inline CorpusLoad read_corpus(const std::string& path, std::size_t max_sentences) {
  if (!std::filesystem::exists(path)) throw IoError("input not found: " + path);
  return load_corpus_file(path, max_sentences);
}

// Strict corpus read for commands other than ingest: any bad line fails.
inline std::vector<Document> read_clean_corpus(const std::string& path, const RunConfig& cfg,
                                               std::ostream& err) {
  CorpusLoad load = read_corpus(path, cfg.get_uint("max_sentences"));
  if (!load.errors.empty()) {
    for (const auto& e : load.errors) err << path << ": " << e << '\n';
    throw ValidationError(std::to_string(load.errors.size()) + " malformed document(s) in " + path +
                          "; run ingest first");
  }
  return std::move(load.documents);
}

inline std::map<std::string, std::vector<int>> read_labels(const std::string& path) {
  if (!std::filesystem::exists(path)) throw IoError("labels not found: " + path);
  std::map<std::string, std::vector<int>> out;
  for (LabelRecord& r : load_labels_file(path)) out[r.id] = std::move(r.labels);
  return out;
}

inline std::string config_sidecar(const std::string& checkpoint) { return checkpoint + ".config"; }

// Per-key differences between a stored canonical config and the current one.
inline std::string config_diff(const std::string& stored, const std::string& current) {
  auto parse = [](const std::string& text) {
    std::map<std::string, std::string> m;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
      if (auto eq = line.find('='); eq != std::string::npos) m[line.substr(0, eq)] = line.substr(eq + 1);
    return m;
  };
  const auto a = parse(stored), b = parse(current);
  std::ostringstream oss;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    const std::string now = it == b.end() ? "<unset>" : it->second;
    if (now != v) oss << "  " << k << ": checkpoint=" << v << " current=" << now << '\n';
  }
  return oss.str();
}

inline Model load_model(const std::string& path, const RunConfig& cfg, std::ostream& err,
                        std::uint64_t* seed_out = nullptr) {
  if (!std::filesystem::exists(path)) throw IoError("checkpoint not found: " + path);
  try {
    LoadedCheckpoint ck = load_checkpoint(path, cfg.model_hash());
    if (seed_out) *seed_out = ck.header.seed;
    return Model(cfg.model_config(), std::move(ck.params));
  } catch (const CheckpointError& e) {
    std::ifstream side(config_sidecar(path));
    if (side && std::string(e.what()).find("hash mismatch") != std::string::npos) {
      std::stringstream ss;
      ss << side.rdbuf();
      err << "config differences:\n" << config_diff(ss.str(), cfg.canonical_text(true));
    }
    throw;
  }
}

inline std::string fmt(double v) {
  std::ostringstream oss;
  oss << std::fixed << std::setprecision(6) << v;
  return oss.str();
}

}  // namespace detail

struct IngestArgs {
  std::string input, output;
  bool lenient = false;
};

inline int cmd_ingest(const IngestArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  CorpusLoad load = detail::read_corpus(a.input, cfg.get_uint("max_sentences"));
  for (const auto& e : load.errors) err << "warning: " << a.input << ": " << e << '\n';
  std::size_t sentences = 0, sections = 0;
  for (const Document& d : load.documents) {
    sentences += d.n_sentences();
    sections += d.sections.size();
  }
  out << "documents\t" << load.documents.size() << "\nsentences\t" << sentences << "\nsections\t" << sections
      << "\ntruncated\t" << load.truncated << "\nrejected\t" << load.errors.size() << '\n';
  if (load.documents.empty() && load.lines > 0) {
    err << "error: every line of " << a.input << " failed to parse\n";
    return kExitContract;
  }
  if (!load.errors.empty() && !a.lenient) {
    err << "error: " << load.errors.size() << " bad line(s); rerun with --lenient to keep the rest\n";
    return kExitContract;
  }
  std::ofstream o = detail::open_output(a.output);
  const std::string hash = hash_hex(cfg.hash());
  for (const Document& d : load.documents) {
    nlohmann::json j = to_json(d);
    j["config_hash"] = hash;
    o << j.dump() << '\n';
  }
  return kExitOk;
}

struct LabelArgs {
  std::string input, output;
};

inline int cmd_label(const LabelArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto docs = detail::read_clean_corpus(a.input, cfg, err);
  std::ofstream o = detail::open_output(a.output);
  const std::string hash = hash_hex(cfg.hash());
  const double ratio = cfg.get_double("budget_ratio");
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const OracleResult r = oracle_labels_by_ratio(docs[i], ratio);
    degenerate += r.degenerate;
    o << serialize_labels({docs[i].id, r.labels}, hash) << '\n';
    if ((i + 1) % 100 == 0) err << "labeled " << (i + 1) << "/" << docs.size() << '\n';
  }
  out << "labeled\t" << docs.size() << "\ndegenerate\t" << degenerate << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string input, labels, checkpoint, metrics;
};

// Holds out the last ceil(holdout_ratio * N) documents (at least one train
// document is kept).
inline std::size_t holdout_count(std::size_t n, double ratio) {
  if (n < 2 || ratio <= 0.0) return 0;
  const auto k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  return std::min(k, n - 1);
}

inline int cmd_train(const TrainArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto docs = detail::read_clean_corpus(a.input, cfg, err);
  if (docs.empty()) throw ValidationError("training corpus is empty: " + a.input);
  std::map<std::string, std::vector<int>> labels;
  if (!a.labels.empty()) labels = detail::read_labels(a.labels);

  const ModelConfig mc = cfg.model_config();
  const TrainConfig tc = train_config(cfg);
  const auto encoder = cfg.make_encoder();
  const std::size_t held = holdout_count(docs.size(), cfg.get_double("holdout_ratio"));
  std::vector<PreparedDocument> train_docs, heldout;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    LabeledDocument ld{docs[i], {}};
    if (!a.labels.empty()) {
      auto it = labels.find(docs[i].id);
      if (it == labels.end()) throw ValidationError("no labels for document " + docs[i].id);
      ld.labels = it->second;
    } else {
      ld.labels = oracle_labels_by_ratio(docs[i], tc.selection.budget_ratio).labels;
    }
    (i < docs.size() - held ? train_docs : heldout).push_back(prepare(std::move(ld), *encoder, mc));
  }

  Model model(mc, tc.seed);
  std::optional<std::ofstream> metrics;
  const std::string hash = hash_hex(cfg.hash());
  if (!a.metrics.empty()) {
    metrics = detail::open_output(a.metrics);
    *metrics << "# config_hash=" << hash << "\nepoch,split,loss,rouge1_recall,rouge2_recall,rougeL_recall,lr\n";
  }
  const TrainResult result = train(model, train_docs, heldout, tc, [&](const EpochMetrics& m) {
    err << "epoch " << m.epoch << " " << m.split << " loss " << detail::fmt(m.loss);
    if (m.split == "heldout")
      err << " R1 " << detail::fmt(m.rouge1_recall) << " acc " << detail::fmt(m.label_accuracy);
    err << '\n';
    if (metrics) {
      *metrics << m.epoch << ',' << m.split << ',' << m.loss << ',' << m.rouge1_recall << ','
               << m.rouge2_recall << ',' << m.rougeL_recall << ',' << m.lr << '\n';
    }
  });
  save_checkpoint(model.params(), {kCheckpointVersion, tc.seed, cfg.model_hash()}, a.checkpoint);
  detail::open_output(detail::config_sidecar(a.checkpoint)) << cfg.canonical_text(true);
  out << "train_documents\t" << train_docs.size() << "\nheldout_documents\t" << heldout.size()
      << "\nupdates\t" << result.updates << "\ncheckpoint\t" << a.checkpoint << '\n';
  return kExitOk;
}

struct SummarizeArgs {
  std::string input, checkpoint, output;
};

struct Summary {
  std::string id;
  std::vector<std::size_t> selected;
  std::vector<std::string> sentences;
  std::vector<double> scores;
};

inline std::vector<Summary> summarize_corpus(const std::vector<Document>& docs, const Model& model,
                                             const SentenceEncoder& enc, const SelectionConfig& sel,
                                             std::uint64_t seed) {
  std::vector<Summary> out;
  for (const Document& doc : docs) {
    const Tensor semantic = encode_sentences(doc, enc, model.config().max_chunk_tokens);
    const SentenceScores sc = model.score(doc, semantic, seed);
    Summary s{doc.id, select_sentences(doc, sc, sel), {}, sc.p};
    for (std::size_t i : s.selected) s.sentences.push_back(doc.sentence(i).text);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const Summary& a, const Summary& b) { return a.id < b.id; });
  return out;
}

inline int cmd_summarize(const SummarizeArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto docs = detail::read_clean_corpus(a.input, cfg, err);
  std::uint64_t seed = 0;
  const Model model = detail::load_model(a.checkpoint, cfg, err, &seed);
  const auto enc = cfg.make_encoder();
  std::ofstream o = detail::open_output(a.output);
  const std::string hash = hash_hex(cfg.hash());
  const auto summaries = summarize_corpus(docs, model, *enc, cfg.selection_config(), seed);
  for (const Summary& s : summaries) {
    nlohmann::json j = {{"id", s.id}, {"selected", s.selected}, {"sentences", s.sentences},
                        {"scores", s.scores}, {"config_hash", hash}};
    o << j.dump() << '\n';
  }
  out << "summarized\t" << summaries.size() << '\n';
  return kExitOk;
}

struct EvaluateArgs {
  std::string input, summaries, checkpoint, output;
};

inline int cmd_evaluate(const EvaluateArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto docs = detail::read_clean_corpus(a.input, cfg, err);
  std::map<std::string, std::string> candidates;
  if (!a.summaries.empty()) {
    std::ifstream in(a.summaries);
    if (!in) throw IoError("summaries not found: " + a.summaries);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (trim(line).empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(a.summaries + " line " + std::to_string(n) + ": " + e.what());
      }
      std::string text;
      if (j.contains("summary")) {
        text = j.at("summary").get<std::string>();
      } else {
        for (const auto& s : j.at("sentences")) text += s.get<std::string>() + " ";
      }
      candidates[j.at("id").get<std::string>()] = text;
    }
  } else if (!a.checkpoint.empty()) {
    std::uint64_t seed = 0;
    const Model model = detail::load_model(a.checkpoint, cfg, err, &seed);
    const auto enc = cfg.make_encoder();
    for (const Summary& s : summarize_corpus(docs, model, *enc, cfg.selection_config(), seed)) {
      std::string text;
      for (const auto& t : s.sentences) text += t + " ";
      candidates[s.id] = text;
    }
  } else {
    throw ArgumentError("evaluate needs --summaries or --checkpoint");
  }

  std::vector<const Document*> ordered;
  for (const Document& d : docs) ordered.push_back(&d);
  std::sort(ordered.begin(), ordered.end(), [](auto* x, auto* y) { return x->id < y->id; });
  std::optional<std::ofstream> tsv;
  if (!a.output.empty()) {
    tsv = detail::open_output(a.output);
    *tsv << "# config_hash=" << hash_hex(cfg.hash()) << "\nid\trouge1_recall\trouge2_recall\trougeL_recall\n";
  }
  double r1 = 0, r2 = 0, rl = 0;
  for (const Document* d : ordered) {
    auto it = candidates.find(d->id);
    if (it == candidates.end()) throw ValidationError("no summary for document " + d->id);
    const Tokens cand = tokenize(it->second), ref = tokenize(d->reference_summary);
    const double a1 = rouge_n(cand, ref, 1).recall, a2 = rouge_n(cand, ref, 2).recall, al = rouge_l(cand, ref).recall;
    r1 += a1, r2 += a2, rl += al;
    if (tsv) *tsv << d->id << '\t' << a1 << '\t' << a2 << '\t' << al << '\n';
  }
  const double n = ordered.empty() ? 1.0 : static_cast<double>(ordered.size());
  if (tsv) *tsv << "mean\t" << r1 / n << '\t' << r2 / n << '\t' << rl / n << '\n';
  out << "rouge1_recall\t" << detail::fmt(r1 / n) << "\nrouge2_recall\t" << detail::fmt(r2 / n)
      << "\nrougeL_recall\t" << detail::fmt(rl / n) << '\n';
  return kExitOk;
}

struct BenchArgs {
  std::vector<std::size_t> sizes = {100, 200, 400, 800};
  std::size_t repeats = 5;
  std::string output;
  bool global_ratio_given = false;
};

inline int cmd_bench(const BenchArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream&) {
  BenchConfig bc;
  bc.sizes = a.sizes;
  bc.repeats = a.repeats;
  bc.window = cfg.get_uint("window");
  bc.d_model = cfg.get_uint("d_model");
  bc.heads = cfg.get_uint("heads");
  bc.seed = cfg.get_uint("seed");
  // The timing sweep runs without globals unless asked: a fixed global
  // share adds an O(n) cost per global row.
  bc.global_ratio = a.global_ratio_given ? cfg.get_double("global_ratio") : 0.0;
  const auto rows = run_attention_bench(bc);
  if (!a.output.empty()) {
    std::ofstream o = detail::open_output(a.output);
    o << "# config_hash=" << hash_hex(cfg.hash()) << '\n';
    write_bench_tsv(o, rows);
  }
  write_bench_tsv(out, rows);
  auto print = [&](const char* what, const std::vector<double>& r) {
    out << what;
    for (double v : r) out << '\t' << std::fixed << std::setprecision(3) << v;
    out << '\n';
  };
  print("sparse_time_ratio", doubling_ratios(rows, [](const BenchRow& r) { return r.sparse_ms; }));
  print("dense_time_ratio", doubling_ratios(rows, [](const BenchRow& r) { return r.dense_ms; }));
  print("sparse_peak_ratio", doubling_ratios(rows, [](const BenchRow& r) { return double(r.sparse_peak_bytes); }));
  for (const BenchRow& r : rows)
    if (r.cross_check) out << "cross_check n=" << r.n << " max_abs_diff=" << *r.cross_check << '\n';
  return kExitOk;
}

// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Extractive summarization of long sectioned documents"};
  app.require_subcommand(1);
  SharedFlags flags;
  auto add_shared = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config_path, "key=value config file");
    sub->add_option("--set", flags.sets, "override any config key (key=value)");
    sub->add_option("--seed", flags.seed, "run seed");
    sub->add_option("--window", flags.window, "local attention window");
    sub->add_option("--global-ratio", flags.global_ratio, "percent of sentences attending globally");
    sub->add_option("--budget-ratio", flags.budget_ratio, "summary size as a fraction of sentences");
    sub->add_option("--trigram-threshold", flags.trigram_threshold, "blocking threshold or 'none'");
    sub->add_flag("--reinforced", flags.reinforced, "reward-weighted loss");
    sub->add_option("--layers", flags.layers, "transformer layers");
    sub->add_option("--heads", flags.heads, "attention heads");
    sub->add_option("--d-model", flags.d_model, "model width");
  };

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "validate and normalize a JSONL corpus");
  s_ingest->add_option("input", ingest.input)->required();
  s_ingest->add_option("-o,--output", ingest.output)->required();
  s_ingest->add_flag("--lenient", ingest.lenient, "keep going past bad lines");
  add_shared(s_ingest);

  LabelArgs label;
  auto* s_label = app.add_subcommand("label", "greedy ROUGE oracle labels");
  s_label->add_option("input", label.input)->required();
  s_label->add_option("-o,--output", label.output)->required();
  add_shared(s_label);

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "train a model and write a checkpoint");
  s_train->add_option("input", tr.input)->required();
  s_train->add_option("--labels", tr.labels, "labels JSONL (default: oracle labels)");
  s_train->add_option("-o,--checkpoint", tr.checkpoint)->required();
  s_train->add_option("--metrics", tr.metrics, "per-epoch CSV");
  add_shared(s_train);

  SummarizeArgs sm;
  auto* s_sum = app.add_subcommand("summarize", "select summary sentences");
  s_sum->add_option("input", sm.input)->required();
  s_sum->add_option("--checkpoint", sm.checkpoint)->required();
  s_sum->add_option("-o,--output", sm.output)->required();
  add_shared(s_sum);

  EvaluateArgs ev;
  auto* s_eval = app.add_subcommand("evaluate", "ROUGE recall against reference summaries");
  s_eval->add_option("input", ev.input)->required();
  auto* src = s_eval->add_option("--summaries", ev.summaries, "summaries JSONL");
  s_eval->add_option("--checkpoint", ev.checkpoint, "score with a model instead")->excludes(src);
  s_eval->add_option("-o,--output", ev.output, "per-document TSV");
  add_shared(s_eval);

  BenchArgs bench;
  auto* s_bench = app.add_subcommand("bench", "sparse vs dense attention scaling");
  s_bench->add_option("--sizes", bench.sizes, "sentence counts")->delimiter(',');
  s_bench->add_option("--repeats", bench.repeats, "timed repeats (median)");
  s_bench->add_option("-o,--output", bench.output, "TSV path");
  add_shared(s_bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitIo;
  }

  try {
    const RunConfig cfg = resolve_config(flags);
    if (*s_ingest) return cmd_ingest(ingest, cfg, out, err);
    if (*s_label) return cmd_label(label, cfg, out, err);
    if (*s_train) return cmd_train(tr, cfg, out, err);
    if (*s_sum) return cmd_summarize(sm, cfg, out, err);
    if (*s_eval) return cmd_evaluate(ev, cfg, out, err);
    bench.global_ratio_given = flags.global_ratio.has_value();
    return cmd_bench(bench, cfg, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitContract;
  }
}

}  // namespace scisumm::cli
