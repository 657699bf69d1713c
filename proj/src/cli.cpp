#include "bitext/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bitext/baseline.hpp"
#include "bitext/checkpoint.hpp"
#include "bitext/common.hpp"
#include "bitext/corpus.hpp"
#include "bitext/eval.hpp"
#include "bitext/extraction.hpp"
#include "bitext/io.hpp"
#include "bitext/nn.hpp"
#include "bitext/siamese.hpp"

namespace bitext::cli {

namespace {

Vocabulary vocab_from_file(const std::string& path, size_t max_size) {
  const auto lines = read_lines(path);
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(lines.size());
  for (const auto& line : lines) sentences.push_back(tokenize(line));
  return build_vocab(sentences, max_size);
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int i = 1; i <= 19; ++i) t.push_back(0.05 * i);
  t.insert(t.end(), {0.97, 0.99, 0.995, 0.999});
  return t;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

struct TrainOpts {
  std::string src, tgt, model, history;
  std::string scorer = "birnn";
  int negatives = 7;
  int batch = 128;
  int epochs = 15;  // birnn default; baseline maxent defaults to 200
  int iterations = 5;
  int embed_dim = 512, state_dim = 512, hidden_dim = 256;
  uint64_t seed = 1;
  double lr = 2e-4;
  double rho = 0.99;
  size_t vocab_size = 0;
  int threads = 1;  // accepted for flag symmetry; training is serial
};

void cmd_train_birnn(const TrainOpts& o, std::ostream& out) {
  const Vocabulary src_vocab = vocab_from_file(o.src, o.vocab_size);
  const Vocabulary tgt_vocab = vocab_from_file(o.tgt, o.vocab_size);
  LoadStats stats;
  const ParallelCorpus corpus = load_parallel(o.src, o.tgt, src_vocab, tgt_vocab, &stats);
  out << "corpus: " << stats.kept << " pairs kept, " << stats.dropped << " dropped\n";

  ModelDims dims;
  dims.src_vocab = src_vocab.size();
  dims.tgt_vocab = tgt_vocab.size();
  dims.embed_dim = o.embed_dim;
  dims.state_dim = o.state_dim;
  dims.hidden_dim = o.hidden_dim;

  HyperParams h;
  h.negatives = o.negatives;
  h.lr = o.lr;
  h.batch = o.batch;
  h.epochs = o.epochs;
  h.rho = o.rho;
  h.seed = o.seed;

  ModelParams model = ModelParams::create(dims, h.seed);
  const TrainHistory history = train_siamese(model, corpus, h, &out);
  save_siamese(o.model, model, h, src_vocab, tgt_vocab);
  write_history(history, o.history);
  out << "model written to " << o.model << "\n";
}

void cmd_train_baseline(const TrainOpts& o, std::ostream& out) {
  const Vocabulary src_vocab = vocab_from_file(o.src, o.vocab_size);
  const Vocabulary tgt_vocab = vocab_from_file(o.tgt, o.vocab_size);
  LoadStats stats;
  const ParallelCorpus corpus = load_parallel(o.src, o.tgt, src_vocab, tgt_vocab, &stats);
  out << "corpus: " << stats.kept << " pairs kept, " << stats.dropped << " dropped\n";

  ParallelCorpus reversed;
  reversed.src = corpus.tgt;
  reversed.tgt = corpus.src;

  BaselineBundle bundle;
  bundle.src_vocab = src_vocab;
  bundle.tgt_vocab = tgt_vocab;

  std::vector<double> ll;
  const TTable ibm1_fwd = train_ibm1(corpus, o.iterations, &ll);
  auto [t_fwd, a_fwd] = train_ibm2(corpus, o.iterations, ibm1_fwd, &ll);
  const TTable ibm1_rev = train_ibm1(reversed, o.iterations, &ll);
  auto [t_rev, a_rev] = train_ibm2(reversed, o.iterations, ibm1_rev, &ll);
  bundle.t_fwd = std::move(t_fwd);
  bundle.a_fwd = std::move(a_fwd);
  bundle.t_rev = std::move(t_rev);
  bundle.a_rev = std::move(a_rev);
  bundle.dicts.fwd = infer_dictionary(bundle.t_fwd);
  bundle.dicts.rev = infer_dictionary(bundle.t_rev);

  const auto triples = sample_negatives(corpus, o.negatives, mix_seed(o.seed, 0xfea7u));
  std::vector<std::pair<FeatureVector, int>> examples;
  examples.reserve(triples.size());
  for (const auto& tr : triples) {
    const auto links_fwd = viterbi_align(bundle.t_fwd, bundle.a_fwd, tr.src, tr.tgt);
    const auto links_rev = viterbi_align(bundle.t_rev, bundle.a_rev, tr.tgt, tr.src);
    examples.emplace_back(extract_features(tr.src, tr.tgt, links_fwd, links_rev, bundle.t_fwd,
                                           bundle.t_rev, bundle.a_fwd, bundle.a_rev, bundle.dicts),
                          tr.label);
  }
  bundle.maxent = train_maxent(examples, o.lr, o.epochs, 1.0, o.seed);

  save_baseline(o.model, bundle);

  TrainHistory hist;
  hist.epoch_loss = ll;  // EM log-likelihood trace, one row per iteration
  write_history(hist, o.history);
  out << "model written to " << o.model << "\n";
}

struct ExtractOpts {
  std::string model, docs, out_path, report;
  double rho = 0.99;
  bool rho_given = false;
  int min_tokens = 3;
  int threads = 1;
  bool filters = false, no_filters = false;
};

void cmd_extract(const ExtractOpts& o, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(o.model);
  const auto kind_it = ckpt.meta.find("kind");
  if (kind_it == ckpt.meta.end()) throw UsageError("checkpoint has no kind entry: " + o.model);
  const std::string kind = kind_it->second;

  ExtractionConfig cfg;
  cfg.min_tokens = o.min_tokens;
  cfg.threads = o.threads;

  std::unique_ptr<PairScorer> scorer;
  std::unique_ptr<SiameseBundle> siamese;
  std::unique_ptr<BaselineBundle> baseline;
  const Vocabulary* src_vocab = nullptr;
  const Vocabulary* tgt_vocab = nullptr;
  if (kind == "siamese") {
    siamese = std::make_unique<SiameseBundle>(load_siamese(o.model));
    scorer = std::make_unique<BirnnScorer>(&siamese->model);
    cfg.scorer = ScorerKind::kBirnn;
    cfg.rho = o.rho_given ? o.rho : siamese->hyper.rho;
    src_vocab = &siamese->src_vocab;
    tgt_vocab = &siamese->tgt_vocab;
  } else if (kind == "baseline") {
    baseline = std::make_unique<BaselineBundle>(load_baseline(o.model));
    scorer = std::make_unique<BaselineScorer>(baseline.get());
    cfg.scorer = ScorerKind::kBaseline;
    cfg.rho = o.rho_given ? o.rho : 0.99;
    src_vocab = &baseline->src_vocab;
    tgt_vocab = &baseline->tgt_vocab;
  } else {
    throw UsageError("unknown checkpoint kind: " + kind);
  }
  cfg.apply_candidate_filters = default_candidate_filters(cfg.scorer);
  if (o.filters) cfg.apply_candidate_filters = true;
  if (o.no_filters) cfg.apply_candidate_filters = false;

  const auto docs = load_documents(o.docs, *src_vocab, *tgt_vocab);
  const ExtractionReport report = run_pipeline(*scorer, docs, cfg, o.out_path);
  if (!o.report.empty()) {
    const bool json = o.report.size() >= 5 && o.report.rfind(".json") == o.report.size() - 5;
    const std::string text = json ? report.to_json() : report.to_text();
    atomic_write(o.report, [&](std::ostream& f) { f << text; });
  }
  out << report.to_text();
}

struct EvalOpts {
  std::string model, src, tgt, pool, report;
  bool oracle = false;
  bool pre_greedy = false;
  bool filters = false;
  std::vector<double> ratios{0.0};
  std::vector<double> thresholds;
  uint64_t seed = 1;
  int threads = 1;
};

std::vector<EvalReport> run_noise_eval(const EvalOpts& o) {
  if (!o.oracle && o.model.empty()) throw UsageError("either --model or --oracle is required");
  if (o.oracle && !o.model.empty()) throw UsageError("--model and --oracle are mutually exclusive");

  std::unique_ptr<SiameseBundle> siamese;
  std::unique_ptr<BaselineBundle> baseline;
  Vocabulary src_vocab, tgt_vocab;
  if (!o.oracle) {
    const Checkpoint ckpt = load_checkpoint(o.model);
    const auto kind_it = ckpt.meta.find("kind");
    if (kind_it == ckpt.meta.end()) throw UsageError("checkpoint has no kind entry: " + o.model);
    if (kind_it->second == "siamese") {
      siamese = std::make_unique<SiameseBundle>(load_siamese(o.model));
      src_vocab = siamese->src_vocab;
      tgt_vocab = siamese->tgt_vocab;
    } else if (kind_it->second == "baseline") {
      baseline = std::make_unique<BaselineBundle>(load_baseline(o.model));
      src_vocab = baseline->src_vocab;
      tgt_vocab = baseline->tgt_vocab;
    } else {
      throw UsageError("unknown checkpoint kind: " + kind_it->second);
    }
  } else {
    src_vocab = vocab_from_file(o.src, 0);
    tgt_vocab = vocab_from_file(o.tgt, 0);
  }

  const ParallelCorpus test = load_parallel(o.src, o.tgt, src_vocab, tgt_vocab);

  std::vector<EncodedSentence> pool;
  if (!o.pool.empty()) {
    for (const auto& line : read_lines(o.pool)) {
      if (auto enc = try_encode(tokenize(line), tgt_vocab)) pool.push_back(*enc);
    }
  } else {
    const bool noisy = std::any_of(o.ratios.begin(), o.ratios.end(),
                                   [](double r) { return r > 0.0; });
    if (noisy) throw UsageError("--pool is required when any noise ratio is positive");
  }

  std::unique_ptr<PairScorer> scorer;
  if (o.oracle) {
    scorer = std::make_unique<OracleScorer>(test);
  } else if (siamese) {
    scorer = std::make_unique<BirnnScorer>(&siamese->model);
  } else {
    scorer = std::make_unique<BaselineScorer>(baseline.get());
  }

  const auto thresholds = o.thresholds.empty() ? default_thresholds() : o.thresholds;
  return noise_sweep(*scorer, test, o.ratios, pool, thresholds, o.seed, o.threads, o.pre_greedy,
                     o.filters);
}

std::string render_reports(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  for (size_t i = 0; i < reports.size(); ++i) {
    if (i) os << "\n";
    write_eval_report(reports[i], os);
  }
  return os.str();
}

void cmd_evaluate(const EvalOpts& o, std::ostream& out) {
  const auto reports = run_noise_eval(o);
  const std::string text = render_reports(reports);
  if (!o.report.empty()) atomic_write(o.report, [&](std::ostream& f) { f << text; });
  out << text;
}

void cmd_sweep(const EvalOpts& o, std::ostream& out) {
  const auto reports = run_noise_eval(o);
  if (!o.report.empty()) {
    const std::string text = render_reports(reports);
    atomic_write(o.report, [&](std::ostream& f) { f << text; });
  }
  out << "noise_ratio rho precision recall f1 extracted\n";
  for (const auto& r : reports) {
    out << fmt("%g", r.noise_ratio) << " " << fmt("%g", r.best.rho) << " "
        << fmt("%.6f", r.best.precision) << " " << fmt("%.6f", r.best.recall) << " "
        << fmt("%.6f", r.best.f1) << " " << r.best.extracted << "\n";
  }
}

struct AlignOpts {
  std::string src, tgt, out_prefix;
  int iterations = 5;
  size_t vocab_size = 0;
};

void cmd_align_train(const AlignOpts& o, std::ostream& out) {
  const Vocabulary src_vocab = vocab_from_file(o.src, o.vocab_size);
  const Vocabulary tgt_vocab = vocab_from_file(o.tgt, o.vocab_size);
  const ParallelCorpus corpus = load_parallel(o.src, o.tgt, src_vocab, tgt_vocab);

  std::vector<double> ll1, ll2;
  const TTable ibm1 = train_ibm1(corpus, o.iterations, &ll1);
  const auto [t, a] = train_ibm2(corpus, o.iterations, ibm1, &ll2);
  for (size_t i = 0; i < ll1.size(); ++i) {
    out << "ibm1 iteration " << i + 1 << " loglik " << fmt("%.6f", ll1[i]) << "\n";
  }
  for (size_t i = 0; i < ll2.size(); ++i) {
    out << "ibm2 iteration " << i + 1 << " loglik " << fmt("%.6f", ll2[i]) << "\n";
  }

  src_vocab.save(o.out_prefix + ".src.vocab");
  tgt_vocab.save(o.out_prefix + ".tgt.vocab");
  save_ttable(t, src_vocab, tgt_vocab, o.out_prefix + ".ttable");
  save_atable(a, o.out_prefix + ".atable");
  out << "tables written to " << o.out_prefix << ".{ttable,atable}\n";
}

struct DictOpts {
  std::string src, tgt, out_path;
  int iterations = 10;
  double threshold = 0.1;
  size_t vocab_size = 0;
};

void cmd_dict(const DictOpts& o, std::ostream& out) {
  const Vocabulary src_vocab = vocab_from_file(o.src, o.vocab_size);
  const Vocabulary tgt_vocab = vocab_from_file(o.tgt, o.vocab_size);
  const ParallelCorpus corpus = load_parallel(o.src, o.tgt, src_vocab, tgt_vocab);
  const TTable t = train_ibm1(corpus, o.iterations);
  const Dictionary d = infer_dictionary(t, o.threshold);
  save_dictionary(d, src_vocab, tgt_vocab, o.out_path);
  size_t entries = 0;
  for (const auto& [key, values] : d) entries += values.size();
  out << "dictionary entries " << entries << " for " << d.size() << " source words\n";
}

EncodedSentence sent(std::vector<int32_t> ids) {
  EncodedSentence s;
  s.length = static_cast<int32_t>(ids.size());
  s.ids = std::move(ids);
  return s;
}

void cmd_selftest(uint64_t seed, std::ostream& out) {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    out << (ok ? "ok " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    ModelDims dims;
    dims.src_vocab = 12;
    dims.tgt_vocab = 10;
    dims.embed_dim = 4;
    dims.state_dim = 4;
    dims.hidden_dim = 4;
    ModelParams m = ModelParams::create(dims, mix_seed(seed, 1));
    TrainingTriple tr;
    tr.src = sent({2, 5, 7, 3});
    tr.tgt = sent({4, 2, 8});
    tr.label = 1;
    DropoutPlan plan;  // eval mode: deterministic loss
    ModelGrads grads;
    grads.reset(m);
    pair_forward_backward(m, tr, plan, grads);
    const std::vector<Tensor> analytic_store = grads.to_tensors(m, 1.0);
    std::vector<const Tensor*> analytic;
    for (const auto& t : analytic_store) analytic.push_back(&t);
    const double rel = grad_check([&] { return pair_forward(m, tr, plan).loss; }, m.tensors(),
                                  analytic, 20, mix_seed(seed, 2));
    check("gradient check (max relative error < 1e-4)", rel < 1e-4);
  }

  {
    const double p = 0.830, r = 0.696;
    const double f1 = 2.0 * p * r / (p + r);
    check("f1 harmonic mean spot check", std::fabs(f1 - 0.757) < 5e-4);
  }

  {
    std::vector<ScoredPair> pairs;
    pairs.push_back({"d", 0, 0, 0.9});
    pairs.push_back({"d", 0, 1, 0.8});
    pairs.push_back({"d", 1, 1, 0.7});
    const auto kept = greedy_one_to_one(pairs);
    const bool ok = kept.size() == 2 && kept[0].src_idx == 0 && kept[0].tgt_idx == 0 &&
                    kept[1].src_idx == 1 && kept[1].tgt_idx == 1;
    check("greedy one-to-one keeps best non-conflicting pairs", ok);
  }

  {
    const std::vector<std::vector<std::string>> same = {{"a", "b", "c", "d", "e"}};
    check("bleu identical corpora == 1", bleu(same, same) == 1.0);
    const std::vector<std::vector<std::string>> cand = {{"a", "b", "c", "d"}};
    const std::vector<std::vector<std::string>> ref = {{"e", "f", "g", "h"}};
    check("bleu disjoint unigrams == 0", bleu(cand, ref) == 0.0);
    const std::vector<std::vector<std::string>> rep = {{"the", "the", "the"}};
    const std::vector<std::vector<std::string>> cat = {{"the", "cat"}};
    check("bleu clipped unigram precision 1/3", std::fabs(bleu(rep, cat, 1) - 1.0 / 3.0) < 1e-12);
    check("bleu zero bigram overlap == 0", bleu(rep, cat) == 0.0);
  }

  {
    Vocabulary en, fr;
    const int32_t the = en.add("the"), house = en.add("house");
    const int32_t la = fr.add("la"), maison = fr.add("maison");
    (void)the;
    (void)la;
    ParallelCorpus corpus;
    corpus.src = {sent({en.lookup("the"), house}), sent({en.lookup("the")})};
    corpus.tgt = {sent({fr.lookup("la"), maison}), sent({fr.lookup("la")})};
    const TTable t = train_ibm1(corpus, 20);
    check("ibm1 t(maison|house) > 0.9 after 20 iterations", t.prob(house, maison) > 0.9);
  }

  if (failures > 0) {
    throw Error("selftest failed: " + std::to_string(failures) + " check(s)");
  }
  out << "selftest passed\n";
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"parallel sentence extraction toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --config appear after the subcommand name
  app.set_config("--config", "", "configuration file with one [section] per subcommand");

  auto topts = std::make_shared<TrainOpts>();
  CLI::App* train = app.add_subcommand("train", "train a sentence-pair scorer");
  train->add_option("--src", topts->src, "source-side training file, one sentence per line")
      ->required();
  train->add_option("--tgt", topts->tgt, "target-side training file, line-aligned with --src")
      ->required();
  train->add_option("--model", topts->model, "output checkpoint path")->required();
  train->add_option("--scorer", topts->scorer, "scorer family")
      ->check(CLI::IsMember({"birnn", "baseline"}));
  train->add_option("--negatives", topts->negatives, "negative samples per positive pair")
      ->check(CLI::PositiveNumber);
  CLI::Option* epochs_opt =
      train->add_option("--epochs", topts->epochs, "training epochs (birnn 15, baseline 200)");
  train->add_option("--batch", topts->batch, "minibatch size")->check(CLI::PositiveNumber);
  train->add_option("--lr", topts->lr, "Adam learning rate");
  train->add_option("--seed", topts->seed, "random seed");
  train->add_option("--rho", topts->rho, "decision threshold stored with the model");
  train->add_option("--iterations", topts->iterations,
                    "EM iterations per alignment model (baseline only)")
      ->check(CLI::PositiveNumber);
  train->add_option("--embed-dim", topts->embed_dim, "embedding size")->check(CLI::PositiveNumber);
  train->add_option("--state-dim", topts->state_dim, "GRU state size")->check(CLI::PositiveNumber);
  train->add_option("--hidden-dim", topts->hidden_dim, "classifier hidden size")
      ->check(CLI::PositiveNumber);
  train->add_option("--vocab-size", topts->vocab_size, "vocabulary cap, 0 = unbounded");
  train->add_option("--history", topts->history, "training history path (default <model>.history)");
  train->add_option("--threads", topts->threads, "accepted for symmetry; training is serial");
  train->callback([topts, epochs_opt, &out] {
    TrainOpts o = *topts;
    if (o.history.empty()) o.history = o.model + ".history";
    if (o.scorer == "baseline") {
      if (!epochs_opt->count()) o.epochs = 200;
      cmd_train_baseline(o, out);
    } else {
      cmd_train_birnn(o, out);
    }
  });

  auto xopts = std::make_shared<ExtractOpts>();
  CLI::App* extract = app.add_subcommand("extract", "mine parallel sentences from document pairs");
  extract->add_option("--model", xopts->model, "checkpoint path")->required();
  extract->add_option("--docs", xopts->docs, "JSON-lines document pairs")->required();
  extract->add_option("--out", xopts->out_path, "output TSV path")->required();
  extract->add_option("--report", xopts->report, "report path (.json selects JSON)");
  CLI::Option* rho_opt =
      extract->add_option("--rho", xopts->rho, "decision threshold (default: stored value)");
  extract->add_option("--min-tokens", xopts->min_tokens, "minimum tokens per extracted side")
      ->check(CLI::PositiveNumber);
  extract->add_option("--threads", xopts->threads, "scoring worker threads")
      ->check(CLI::PositiveNumber);
  extract->add_flag("--filters", xopts->filters, "force candidate pre-filters on");
  extract->add_flag("--no-filters", xopts->no_filters, "force candidate pre-filters off");
  extract->callback([xopts, rho_opt, &out] {
    ExtractOpts o = *xopts;
    o.rho_given = rho_opt->count() > 0;
    cmd_extract(o, out);
  });

  auto eopts = std::make_shared<EvalOpts>();
  CLI::App* evaluate = app.add_subcommand("evaluate", "precision/recall curves on a test corpus");
  auto add_eval_flags = [&](CLI::App* c, std::shared_ptr<EvalOpts> opts) {
    c->add_option("--model", opts->model, "checkpoint path");
    c->add_flag("--oracle", opts->oracle, "score with the built-in oracle instead of a model");
    c->add_option("--src", opts->src, "source-side test file")->required();
    c->add_option("--tgt", opts->tgt, "target-side test file, line-aligned")->required();
    c->add_option("--ratios", opts->ratios, "noise ratios in [0,1)")->delimiter(',');
    c->add_option("--thresholds", opts->thresholds, "decision thresholds in (0,1), ascending")
        ->delimiter(',');
    c->add_option("--pool", opts->pool, "replacement sentences for noise injection");
    c->add_option("--report", opts->report, "write the full report here");
    c->add_option("--seed", opts->seed, "noise-injection seed");
    c->add_option("--threads", opts->threads, "scoring worker threads")
        ->check(CLI::PositiveNumber);
    c->add_flag("--pre-greedy", opts->pre_greedy, "skip the greedy one-to-one post-processing");
    c->add_flag("--filters", opts->filters, "drop pairs failing the scorer's candidate filters");
  };
  add_eval_flags(evaluate, eopts);
  evaluate->callback([eopts, &out] { cmd_evaluate(*eopts, out); });

  auto sopts = std::make_shared<EvalOpts>();
  CLI::App* sweep = app.add_subcommand("sweep", "best-F1 summary across noise ratios");
  add_eval_flags(sweep, sopts);
  sweep->callback([sopts, &out] { cmd_sweep(*sopts, out); });

  auto aopts = std::make_shared<AlignOpts>();
  CLI::App* align = app.add_subcommand("align-train", "train IBM word-alignment tables");
  align->add_option("--src", aopts->src, "source-side training file")->required();
  align->add_option("--tgt", aopts->tgt, "target-side training file")->required();
  align->add_option("--out", aopts->out_prefix, "output path prefix")->required();
  align->add_option("--iterations", aopts->iterations, "EM iterations per model")
      ->check(CLI::PositiveNumber);
  align->add_option("--vocab-size", aopts->vocab_size, "vocabulary cap, 0 = unbounded");
  align->callback([aopts, &out] { cmd_align_train(*aopts, out); });

  auto dopts = std::make_shared<DictOpts>();
  CLI::App* dict = app.add_subcommand("dict", "infer a probabilistic dictionary");
  dict->add_option("--src", dopts->src, "source-side training file")->required();
  dict->add_option("--tgt", dopts->tgt, "target-side training file")->required();
  dict->add_option("--out", dopts->out_path, "output dictionary path")->required();
  dict->add_option("--iterations", dopts->iterations, "IBM Model 1 EM iterations")
      ->check(CLI::PositiveNumber);
  dict->add_option("--threshold", dopts->threshold, "inclusion threshold on t(tgt|src)");
  dict->add_option("--vocab-size", dopts->vocab_size, "vocabulary cap, 0 = unbounded");
  dict->callback([dopts, &out] { cmd_dict(*dopts, out); });

  auto st_seed = std::make_shared<uint64_t>(1);
  CLI::App* selftest = app.add_subcommand("selftest", "gradient and oracle self-checks");
  selftest->add_option("--seed", *st_seed, "random seed");
  selftest->callback([st_seed, &out] { cmd_selftest(*st_seed, out); });

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace bitext::cli
