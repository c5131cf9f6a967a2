// Copyright 2026 The tlink Authors.
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

#pragma once

// The `tlink` command line. Every command writes its artifacts and a
// manifest.json into --out; `tlink replay <manifest>` reruns it.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tlink/bcdc.hpp"
#include "tlink/corpus_io.hpp"
#include "tlink/emtrl.hpp"
#include "tlink/eval.hpp"
#include "tlink/predictions.hpp"
#include "tlink/rules.hpp"
#include "tlink/synth.hpp"
#include "tlink/timeml.hpp"

namespace tlink {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

struct CliOptions {
  std::string scheme = "coarse3";
  std::string init = "supervised";
  double fraction = 0.1;
  std::string rules_file;
  std::string lexical_rules;
  std::string signal_rules;
  std::string repair = "none";
  std::size_t max_iters = 30;
  double param_tol = 1e-6;
  std::size_t related_docs = 25;
  std::size_t confident_per_round = 40;
  std::size_t max_rounds = 10;
  std::size_t folds = 0;
  std::vector<std::string> holdout;
  std::size_t shuffles = 10000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out;

  std::string corpus;
  std::string model;
  std::string train;
  std::string test;
  std::string pool;
  std::string predictions;
  std::string system_a;
  std::string system_b;
  std::vector<std::string> inputs;
  bool no_reuse = false;

  SynthConfig synth;
  std::map<std::string, double> synth_slot_informativeness;
};

namespace cli_detail {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Corpus read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  try {
    return parse_corpus(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline std::vector<Prediction> read_predictions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  return read_predictions(in);
}

class OutDir {
 public:
  explicit OutDir(const std::string& dir) : dir_(dir) {
    if (dir.empty()) throw ValidationError("--out is required");
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw ValidationError("cannot create output directory '" + dir + "'");
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  template <typename F>
  void write(const std::string& name, F&& body) const {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path(name) + "'");
    body(out);
    if (!out) throw ValidationError("write failed for '" + path(name) + "'");
  }

  void write_json(const std::string& name, const Json& j) const {
    write(name, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  }

 private:
  fs::path dir_;
};

inline Scheme em_scheme(const CliOptions& o) {
  const Scheme s = parse_scheme(o.scheme);
  if (s == Scheme::kRaw14) throw UnsupportedError("this command needs --scheme norm6 or coarse3");
  return s;
}

inline void require_scheme(const Corpus& corpus, Scheme scheme, const std::string& what) {
  for (const auto& doc : corpus) {
    for (const auto& t : doc.tlinks) {
      if (t.label.scheme != scheme) {
        throw ValidationError(what + " has " + std::string(scheme_name(t.label.scheme)) + " labels (document " +
                              doc.doc_id + "); run normalize --scheme " + std::string(scheme_name(scheme)) + " first");
      }
    }
  }
}

inline RuleBase load_rules(const CliOptions& o, Scheme scheme) {
  RuleBase rules;
  rules.scheme = scheme;
  if (!o.rules_file.empty()) rules.attribute_rules = parse_attribute_rules(read_text(o.rules_file), scheme);
  if (!o.lexical_rules.empty()) rules.lexical_rules = parse_lexical_rules(read_text(o.lexical_rules));
  if (!o.signal_rules.empty()) rules.signal_rules = parse_attribute_rules(read_text(o.signal_rules), scheme);
  if (rules.attribute_rules.empty() && rules.lexical_rules.empty() && rules.signal_rules.empty()) {
    throw ValidationError("--init rules needs --rules-file, --lexical-rules or --signal-rules");
  }
  return rules;
}

inline Assignment initial_assignment(const CliOptions& o, const EmProblem& problem, const Corpus& corpus) {
  const Scheme scheme = problem.scheme();
  if (o.init == "random") return init_random(problem.size(), scheme, o.seed);
  if (o.init == "supervised") {
    return init_supervised(gold_labels(corpus, problem.pairs(), scheme), scheme, o.fraction, o.seed);
  }
  if (o.init == "rules") return init_rules(problem, load_rules(o, scheme));
  throw ValidationError("unknown --init '" + o.init + "'");
}

inline EmConfig em_config(const CliOptions& o) {
  EmConfig c;
  c.max_iters = o.max_iters;
  c.param_tol = o.param_tol;
  c.repair = parse_repair_mode(o.repair);
  return c;
}

inline std::vector<Prediction> em_predictions(const Corpus& corpus, const std::vector<EventPair>& pairs,
                                              const Assignment& a) {
  std::vector<Prediction> out;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& pa = a.pairs[k];
    out.push_back({corpus[pairs[k].doc].doc_id, pairs[k].source, pairs[k].target, RelationLabel{a.scheme, *pa.label},
                   pa.posterior.at(*pa.label)});
  }
  return out;
}

inline Json em_trace_json(const EmResult& r) {
  Json trace = Json::array();
  for (const auto& it : r.trace) {
    trace.push_back({{"iteration", it.iteration},
                     {"flips", it.flips},
                     {"max_param_change", it.max_param_change},
                     {"log_likelihood", it.log_likelihood},
                     {"map_objective", it.map_objective},
                     {"repair_changed", it.repair.changed},
                     {"repair_flagged", it.repair.flagged}});
  }
  return trace;
}

inline BcdcConfig bcdc_config(const CliOptions& o) {
  BcdcConfig c;
  c.related_docs = o.related_docs;
  c.confident_per_round = o.confident_per_round;
  c.max_rounds = o.max_rounds;
  c.reuse_models_for_related_tests = !o.no_reuse;
  c.train.seed = o.seed;
  return c;
}

// Documents whose hard labels fail check_consistency.
inline std::size_t inconsistent_documents(const Corpus& corpus, const std::vector<EventPair>& pairs,
                                          const Assignment& a) {
  std::size_t bad = 0;
  std::vector<bool> has_doc(corpus.size(), false);
  for (const auto& p : pairs) has_doc[p.doc] = true;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (!has_doc[d]) continue;
    std::vector<std::size_t> members;
    const WeightedGraph g = document_graph(corpus, pairs, a.scheme, a, d, &members);
    TemporalGraph crisp(a.scheme, g.nodes());
    for (std::size_t k : members) {
      crisp.add_edge(*g.find_node(pairs[k].source), *g.find_node(pairs[k].target), *a.pairs[k].label);
    }
    bad += !check_consistency(crisp).consistent;
  }
  return bad;
}

// ---- commands ---------------------------------------------------------------

inline Json cmd_synth(const CliOptions& o, const OutDir& out) {
  SynthConfig c = o.synth;
  c.seed = o.seed;
  c.scheme = parse_scheme(o.scheme);
  c.slot_informativeness = o.synth_slot_informativeness;
  const auto s = generate(c);
  out.write("corpus.jsonl", [&](std::ostream& f) { write_corpus(f, s.corpus); });
  out.write("planted.txt", [&](std::ostream& f) { describe_planted(f, s.planted); });
  const auto stats = corpus_stats(s.corpus, c.scheme);
  return {{"documents", s.corpus.size()}, {"links", stats.total}, {"majority_fraction", stats.majority_fraction}};
}

inline Json cmd_import_timeml(const CliOptions& o, const OutDir& out) {
  if (o.inputs.empty()) throw ValidationError("import-timeml needs at least one input file");
  Corpus corpus;
  Json files = Json::array();
  for (const auto& path : o.inputs) {
    TimemlImport imp;
    try {
      imp = import_timeml_subset(read_text(path));
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what());
    }
    files.push_back({{"file", path},
                     {"doc_id", imp.document.doc_id},
                     {"events", imp.document.events.size()},
                     {"links", imp.document.tlinks.size()},
                     {"skipped_time_links", imp.skipped_time_links},
                     {"dropped_duplicate_links", imp.dropped_duplicate_links}});
    corpus.push_back(std::move(imp.document));
  }
  validate_corpus(corpus);
  const Scheme target = parse_scheme(o.scheme);
  std::size_t dropped = 0;
  if (target != Scheme::kRaw14) corpus = convert_corpus(corpus, target, &dropped);
  out.write("corpus.jsonl", [&](std::ostream& f) { write_corpus(f, corpus); });
  return {{"files", files}, {"scheme", scheme_name(target)}, {"dropped_on_normalize", dropped}};
}

inline Json cmd_normalize(const CliOptions& o, const OutDir& out) {
  const Corpus corpus = read_corpus_file(o.corpus);
  const Scheme target = parse_scheme(o.scheme);
  std::size_t dropped = 0;
  const Corpus converted = convert_corpus(corpus, target, &dropped);
  out.write("corpus.jsonl", [&](std::ostream& f) { write_corpus(f, converted); });
  const auto stats = corpus_stats(converted, target);
  Json counts = Json::object();
  for (std::size_t l = 0; l < stats.counts.size(); ++l) {
    counts[std::string(label_name(target, static_cast<LabelId>(l)))] = stats.counts[l];
  }
  return {{"scheme", scheme_name(target)}, {"links", stats.total}, {"dropped", dropped}, {"counts", counts}};
}

inline Json cmd_train_em(const CliOptions& o, const OutDir& out) {
  const Scheme scheme = em_scheme(o);
  const Corpus corpus = read_corpus_file(o.corpus);
  if (o.init != "rules") require_scheme(corpus, scheme, o.corpus);
  const auto problem = EmProblem::build(corpus, scheme);
  if (problem.size() == 0) throw ValidationError("corpus has no linked event pairs to learn from");
  const auto init = initial_assignment(o, problem, corpus);
  const auto result = run_em(problem, init, em_config(o));
  out.write("em.model", [&](std::ostream& f) { result.model.save(f); });
  out.write("predictions.tsv",
            [&](std::ostream& f) { write_predictions(f, em_predictions(corpus, problem.pairs(), result.assignment)); });

  Json report{{"pairs", problem.size()},
              {"iterations", result.trace.size()},
              {"converged", result.converged},
              {"trace", em_trace_json(result)}};
  bool gold = true;
  for (const auto& d : corpus) {
    for (const auto& t : d.tlinks) gold = gold && t.label.scheme == scheme;
  }
  if (gold) {
    const auto g = gold_labels(corpus, problem.pairs(), scheme);
    std::vector<LabelId> predicted;
    for (const auto& pa : result.assignment.pairs) predicted.push_back(*pa.label);
    const auto mapping = map_clusters_to_labels(predicted, g, scheme);
    report["accuracy"] = mapping.unmapped_accuracy;
    report["mapped_accuracy"] = mapping.accuracy;
    Json perm = Json::array();
    for (LabelId l : mapping.permutation) perm.push_back(label_name(scheme, l));
    report["cluster_mapping"] = perm;
  }
  return report;
}

inline Json cmd_predict_em(const CliOptions& o, const OutDir& out) {
  std::ifstream in(o.model);
  if (!in) throw ValidationError("cannot read '" + o.model + "'");
  const EmModel model = EmModel::load(in);
  const Corpus corpus = read_corpus_file(o.corpus);
  const auto pairs = collect_pairs(corpus);
  const auto mode = parse_repair_mode(o.repair);
  const auto a = predict_assignment(model, corpus, pairs, mode);
  const auto predictions = em_predictions(corpus, pairs, a);
  out.write("predictions.tsv", [&](std::ostream& f) { write_predictions(f, predictions); });
  return {{"pairs", pairs.size()},
          {"repair", repair_mode_name(mode)},
          {"inconsistent_documents", inconsistent_documents(corpus, pairs, a)}};
}

inline Json cmd_repair(const CliOptions& o, const OutDir& out) {
  const auto mode = parse_repair_mode(o.repair);
  if (mode == RepairMode::kNone) throw ValidationError("repair needs --repair greedy or ilp");
  std::ifstream in(o.model);
  if (!in) throw ValidationError("cannot read '" + o.model + "'");
  const EmModel model = EmModel::load(in);
  const Corpus corpus = read_corpus_file(o.corpus);
  const auto pairs = collect_pairs(corpus);
  Assignment a = predict_assignment(model, corpus, pairs, RepairMode::kNone);
  const auto before = em_predictions(corpus, pairs, a);
  const RepairStats stats = repair_assignment(corpus, pairs, a, mode);
  const auto after = em_predictions(corpus, pairs, a);
  out.write("predictions.tsv", [&](std::ostream& f) { write_predictions(f, after); });

  const std::size_t inconsistent = inconsistent_documents(corpus, pairs, a);
  std::size_t changed_pairs = 0;
  for (std::size_t k = 0; k < before.size(); ++k) changed_pairs += before[k].label != after[k].label;
  return {{"documents", stats.documents},
          {"pairs", pairs.size()},
          {"changed", stats.changed},
          {"flagged", stats.flagged},
          {"inconsistent_documents", inconsistent},
          {"repair", repair_mode_name(mode)}};
}

inline Json cmd_train_bcdc(const CliOptions& o, const OutDir& out) {
  const Scheme scheme = parse_scheme(o.scheme);
  const Corpus corpus = read_corpus_file(o.corpus);
  require_scheme(corpus, scheme, o.corpus);
  const auto cfg = bcdc_config(o);
  const auto data = labeled_pairs(corpus, scheme, cfg.features);
  const auto model = train_bcdc_model(data, scheme, cfg);
  out.write("bcdc.model", [&](std::ostream& f) { save_bcdc_model(f, model); });
  std::size_t right = 0;
  std::vector<Prediction> predictions;
  for (const auto& doc : corpus) {
    for (auto& p : classify_document(model, doc)) predictions.push_back(std::move(p));
  }
  const auto gold = gold_predictions(corpus);
  for (std::size_t k = 0; k < gold.size(); ++k) right += predictions[k].label == gold[k].label;
  return {{"pairs", data.size()},
          {"features", model.index.size()},
          {"training_accuracy", gold.empty() ? 0.0 : static_cast<double>(right) / static_cast<double>(gold.size())}};
}

inline Json cmd_run_bcdc(const CliOptions& o, const OutDir& out) {
  const Scheme scheme = parse_scheme(o.scheme);
  const Corpus train = read_corpus_file(o.train);
  const Corpus tests = read_corpus_file(o.test);
  const Corpus pool = o.pool.empty() ? Corpus{} : read_corpus_file(o.pool);
  require_scheme(train, scheme, o.train);
  const BcdcRun run = run_bcdc(train, tests, pool, scheme, bcdc_config(o));
  out.write("bcdc_report.txt", [&](std::ostream& f) { write_bcdc_report(f, run); });
  out.write_json("bcdc_report.json", bcdc_report_json(run));
  std::vector<Prediction> specialized;
  std::vector<Prediction> general;
  for (const auto& d : run.documents) {
    specialized.insert(specialized.end(), d.predictions.begin(), d.predictions.end());
    general.insert(general.end(), d.general_predictions.begin(), d.general_predictions.end());
  }
  out.write("predictions.tsv", [&](std::ostream& f) { write_predictions(f, specialized); });
  out.write("general_predictions.tsv", [&](std::ostream& f) { write_predictions(f, general); });
  const auto j = bcdc_report_json(run);
  return {{"tests", tests.size()},
          {"bootstraps", run.bootstraps},
          {"accuracy", j["accuracy"]},
          {"general_accuracy", j["general_accuracy"]}};
}

// EM trained on the training folds, labels for the test fold. Random
// initializations are mapped to labels through the training gold.
inline Learner em_learner(const CliOptions& o, Scheme scheme) {
  return [o, scheme](const Corpus& train, const Corpus& test, const std::vector<EventPair>& pairs) {
    const auto problem = EmProblem::build(train, scheme);
    const auto result = run_em(problem, initial_assignment(o, problem, train), em_config(o));
    auto predicted = predict(result.model, test, pairs, parse_repair_mode(o.repair));
    if (o.init == "random") {
      std::vector<LabelId> fitted;
      for (const auto& pa : result.assignment.pairs) fitted.push_back(*pa.label);
      const auto mapping = map_clusters_to_labels(fitted, gold_labels(train, problem.pairs(), scheme), scheme);
      predicted = apply_mapping(predicted, mapping.permutation);
    }
    return predicted;
  };
}

inline Json cmd_evaluate(const CliOptions& o, const OutDir& out) {
  const Scheme scheme = parse_scheme(o.scheme);
  const Corpus corpus = read_corpus_file(o.corpus);
  require_scheme(corpus, scheme, o.corpus);
  Json report = Json::object();
  const auto baseline = majority_baseline(corpus, scheme);
  report["majority_label"] = label_name(scheme, baseline.label);
  report["majority_baseline"] = baseline.accuracy;
  if (!o.predictions.empty()) {
    const auto predicted = read_predictions_file(o.predictions);
    const auto aligned = align_predictions({predicted}, gold_predictions(corpus));
    const ConfusionMatrix cm(scheme, aligned.systems[0], aligned.gold);
    report["pairs"] = aligned.gold.size();
    report["accuracy"] = accuracy(aligned.systems[0], aligned.gold);
    report["confusion"] = confusion_json(cm);
    out.write("confusion.tsv", [&](std::ostream& f) { write_confusion(f, cm); });
  }
  if (o.folds > 0) {
    if (scheme == Scheme::kRaw14) throw UnsupportedError("cross-validation runs the EM learner; use norm6 or coarse3");
    const auto cv = cross_validate(corpus, scheme, em_learner(o, scheme), o.folds, o.seed, o.holdout);
    report["cross_validation"] = cross_validation_json(cv);
  }
  if (o.predictions.empty() && o.folds == 0) {
    throw ValidationError("evaluate needs --predictions or --folds");
  }
  out.write_json("evaluation.json", report);
  return report;
}

inline Json cmd_significance(const CliOptions& o, const OutDir& out) {
  const Corpus corpus = read_corpus_file(o.corpus);
  const auto a = read_predictions_file(o.system_a);
  const auto b = read_predictions_file(o.system_b);
  const auto r = stratified_shuffling(a, b, gold_predictions(corpus), o.shuffles, o.seed, o.threads);
  const Json j = significance_json(r);
  out.write_json("significance.json", j);
  return j;
}

}  // namespace cli_detail

// Parses `args` (without the program name) and runs the command. Messages go
// to `log`; the return value is the process exit status.
inline int run_cli(const std::vector<std::string>& args, std::ostream& log = std::cout,
                   std::ostream& err = std::cerr);

namespace cli_detail {

inline Json manifest_json(const std::string& command, const std::vector<std::string>& args) {
  // The output directory is left out so reruns elsewhere match byte for byte.
  std::vector<std::string> kept;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--out") {
      ++k;
      continue;
    }
    if (args[k].rfind("--out=", 0) == 0) continue;
    kept.push_back(args[k]);
  }
  return {{"tool", "tlink"}, {"version", kToolVersion}, {"command", command}, {"args", kept}};
}

inline int replay(const std::string& manifest_path, const std::string& out, std::ostream& log, std::ostream& err) {
  Json m;
  try {
    m = Json::parse(read_text(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(manifest_path + ": " + e.what());
  }
  if (!m.contains("tool") || m["tool"] != "tlink" || !m.contains("args") || !m["args"].is_array()) {
    throw ValidationError(manifest_path + " is not a tlink manifest");
  }
  if (m.value("version", "") != kToolVersion) {
    err << "warning: manifest written by tlink " << m.value("version", "?") << ", running " << kToolVersion << '\n';
  }
  std::vector<std::string> args = m["args"].get<std::vector<std::string>>();
  if (args.empty() || args[0] == "replay") throw ValidationError(manifest_path + " has no command to replay");
  args.push_back("--out");
  args.push_back(out);
  return run_cli(args, log, err);
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& log, std::ostream& err) {
  using namespace cli_detail;
  CliOptions o;
  std::string replay_manifest;
  CLI::App app{"Temporal relation learning between events", "tlink"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  const auto common = [&](CLI::App* c) {
    c->add_option("--out", o.out, "Output directory")->required();
    c->add_option("--seed", o.seed, "Random seed");
    c->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  };
  const auto scheme_flag = [&](CLI::App* c) {
    c->add_option("--scheme", o.scheme, "Label scheme")
        ->check(CLI::IsMember({"raw14", "norm6", "coarse3"}, CLI::ignore_case));
  };
  const auto em_flags = [&](CLI::App* c) {
    c->add_option("--init", o.init, "EM initialization")
        ->check(CLI::IsMember({"random", "supervised", "rules"}));
    c->add_option("--fraction", o.fraction, "Gold fraction pinned by supervised init");
    c->add_option("--rules-file", o.rules_file, "Attribute rules");
    c->add_option("--lexical-rules", o.lexical_rules, "Lexical verb-order rules");
    c->add_option("--signal-rules", o.signal_rules, "Signal rules");
    c->add_option("--repair", o.repair, "Consistency repair inside EM")
        ->check(CLI::IsMember({"none", "greedy", "ilp"}));
    c->add_option("--max-iters", o.max_iters, "EM iteration cap");
    c->add_option("--param-tol", o.param_tol, "Stop when parameters move less than this");
  };
  const auto bcdc_flags = [&](CLI::App* c) {
    c->add_option("--related-docs", o.related_docs, "Related documents retrieved per test document (N)");
    c->add_option("--confident-per-round", o.confident_per_round, "Pseudo-labels added per round (K)");
    c->add_option("--max-rounds", o.max_rounds, "Bootstrapping rounds");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  common(synth);
  scheme_flag(synth);
  synth->add_option("--docs", o.synth.documents, "Documents");
  synth->add_option("--topics", o.synth.topics, "Topics");
  synth->add_option("--first-topic", o.synth.first_topic, "Number of the first topic");
  synth->add_option("--doc-prefix", o.synth.doc_prefix, "Document id prefix");
  synth->add_option("--events-min", o.synth.events_min, "Fewest events per document");
  synth->add_option("--events-max", o.synth.events_max, "Most events per document");
  synth->add_option("--link-density", o.synth.link_density, "Chance that an event pair is linked");
  synth->add_option("--informativeness", o.synth.informativeness, "Attribute informativeness");
  synth->add_option("--slot-informativeness", o.synth_slot_informativeness,
                    "Per-attribute informativeness, e.g. word 1.0");
  synth->add_option("--noise", o.synth.annotation_noise_rate, "Attribute annotation noise");
  synth->add_option("--intra", o.synth.intra_sentence_fraction, "Chance that an event stays in the sentence");
  synth->add_option("--slots", o.synth.timeline_slots, "Timeline slots");
  synth->add_option("--topic-skew", o.synth.topic_skew, "Spread of per-topic priors");
  synth->add_option("--words-per-cell", o.synth.words_per_cell, "Event words per timeline cell");
  synth->add_option("--narrative-order", o.synth.narrative_order, "Chance of topic-directed narration");

  auto* import = app.add_subcommand("import-timeml", "Import TimeML documents");
  common(import);
  import->add_option("files", o.inputs, "TimeML files")->required();
  import->add_option("--scheme", o.scheme, "Label scheme of the written corpus")
      ->check(CLI::IsMember({"raw14", "norm6", "coarse3"}, CLI::ignore_case));

  auto* normalize = app.add_subcommand("normalize", "Convert a corpus to another label scheme");
  common(normalize);
  normalize->add_option("--corpus", o.corpus, "Input corpus")->required();
  normalize->add_option("--scheme,--to", o.scheme, "Target scheme")
      ->check(CLI::IsMember({"raw14", "norm6", "coarse3"}, CLI::ignore_case));

  auto* train_em = app.add_subcommand("train-em", "Train the EM relation learner");
  common(train_em);
  scheme_flag(train_em);
  em_flags(train_em);
  train_em->add_option("--corpus", o.corpus, "Training corpus")->required();

  auto* predict_em = app.add_subcommand("predict-em", "Label a corpus's linked pairs with an EM model");
  common(predict_em);
  predict_em->add_option("--model", o.model, "EM model file")->required();
  predict_em->add_option("--corpus", o.corpus, "Corpus to label")->required();
  predict_em->add_option("--repair", o.repair, "Per-document repair")->check(CLI::IsMember({"none", "greedy", "ilp"}));

  auto* repair = app.add_subcommand("repair", "Make EM predictions consistent per document");
  common(repair);
  repair->add_option("--model", o.model, "EM model file")->required();
  repair->add_option("--corpus", o.corpus, "Corpus to label")->required();
  repair->add_option("--repair", o.repair, "greedy or ilp")->required()->check(CLI::IsMember({"greedy", "ilp"}));

  auto* train_bcdc = app.add_subcommand("train-bcdc", "Train the general BCDC model");
  common(train_bcdc);
  scheme_flag(train_bcdc);
  train_bcdc->add_option("--corpus", o.corpus, "Training corpus")->required();

  auto* run_bcdc_cmd = app.add_subcommand("run-bcdc", "Bootstrap a specialized model per test document");
  common(run_bcdc_cmd);
  scheme_flag(run_bcdc_cmd);
  bcdc_flags(run_bcdc_cmd);
  run_bcdc_cmd->add_option("--train", o.train, "Training corpus")->required();
  run_bcdc_cmd->add_option("--test", o.test, "Test corpus")->required();
  run_bcdc_cmd->add_option("--pool", o.pool, "Unlabelled document pool");
  run_bcdc_cmd->add_flag("--no-reuse", o.no_reuse, "Bootstrap every test document separately");

  auto* evaluate = app.add_subcommand("evaluate", "Accuracy, baseline and cross-validation");
  common(evaluate);
  scheme_flag(evaluate);
  em_flags(evaluate);
  evaluate->add_option("--corpus", o.corpus, "Gold corpus")->required();
  evaluate->add_option("--predictions", o.predictions, "Predictions to score");
  evaluate->add_option("--folds", o.folds, "Cross-validate the EM learner over this many folds");
  evaluate->add_option("--holdout", o.holdout, "Document ids kept out of every fold");

  auto* significance = app.add_subcommand("significance", "Stratified shuffling test between two systems");
  common(significance);
  significance->add_option("--corpus", o.corpus, "Gold corpus")->required();
  significance->add_option("--a", o.system_a, "Predictions of system A")->required();
  significance->add_option("--b", o.system_b, "Predictions of system B")->required();
  significance->add_option("--shuffles", o.shuffles, "Shuffles (nt)")->check(CLI::PositiveNumber);

  auto* replay_cmd = app.add_subcommand("replay", "Rerun the command recorded in a manifest");
  replay_cmd->add_option("manifest", replay_manifest, "manifest.json")->required();
  replay_cmd->add_option("--out", o.out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    log << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    log << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "tlink: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (replay_cmd->parsed()) return replay(replay_manifest, o.out, log, err);
    const OutDir out(o.out);
    CLI::App* cmd = app.get_subcommands().front();
    Json summary;
    if (cmd == synth) summary = cmd_synth(o, out);
    if (cmd == import) summary = cmd_import_timeml(o, out);
    if (cmd == normalize) summary = cmd_normalize(o, out);
    if (cmd == train_em) summary = cmd_train_em(o, out);
    if (cmd == predict_em) summary = cmd_predict_em(o, out);
    if (cmd == repair) summary = cmd_repair(o, out);
    if (cmd == train_bcdc) summary = cmd_train_bcdc(o, out);
    if (cmd == run_bcdc_cmd) summary = cmd_run_bcdc(o, out);
    if (cmd == evaluate) summary = cmd_evaluate(o, out);
    if (cmd == significance) summary = cmd_significance(o, out);
    out.write_json("report.json", summary);
    out.write_json("manifest.json", manifest_json(cmd->get_name(), args));
    Json brief = Json::object();
    for (const auto& [key, value] : summary.items()) {
      if (!value.is_structured()) brief[key] = value;
    }
    log << cmd->get_name() << ": " << brief.dump() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << "tlink: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "tlink: " << e.what() << '\n';
    return kExitDomain;
  }
}

inline int run_cli(int argc, char** argv) {
  return run_cli(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace tlink
