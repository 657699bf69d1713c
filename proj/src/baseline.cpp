#include "bitext/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <set>
#include <stdexcept>

#include "bitext/common.hpp"
#include "bitext/io.hpp"
#include "bitext/nn.hpp"
#include "bitext/tensor.hpp"

namespace bitext {
namespace {

constexpr double kProbFloor = 1e-10;
constexpr const char* kNullToken = "<null>";

void require_alignable(const ParallelCorpus& corpus) {
  if (corpus.size() == 0) throw std::invalid_argument("alignment training: corpus is empty");
  for (size_t k = 0; k < corpus.size(); ++k) {
    if (!corpus.src[k].valid() || !corpus.tgt[k].valid()) {
      throw std::invalid_argument("alignment training: empty sentence at pair " +
                                  std::to_string(k));
    }
  }
}

double floored(double p) { return p > kProbFloor ? p : kProbFloor; }

}  // namespace

double TTable::prob(int32_t src, int32_t tgt) const {
  const auto row = rows_.find(src);
  if (row == rows_.end()) return 0.0;
  const auto it = row->second.find(tgt);
  return it == row->second.end() ? 0.0 : it->second;
}

void TTable::set(int32_t src, int32_t tgt, double p) { rows_[src][tgt] = p; }

size_t TTable::entry_count() const {
  size_t n = 0;
  for (const auto& [src, row] : rows_) n += row.size();
  return n;
}

void TTable::normalize_and_prune(double floor) {
  for (auto it = rows_.begin(); it != rows_.end();) {
    Row& row = it->second;
    double sum = 0.0;
    for (const auto& [tgt, p] : row) sum += p;
    if (sum <= 0.0) {
      it = rows_.erase(it);
      continue;
    }
    double kept = 0.0;
    for (auto e = row.begin(); e != row.end();) {
      e->second /= sum;
      if (e->second < floor) {
        e = row.erase(e);
      } else {
        kept += e->second;
        ++e;
      }
    }
    if (row.empty() || kept <= 0.0) {
      it = rows_.erase(it);
      continue;
    }
    for (auto& [tgt, p] : row) p /= kept;
    ++it;
  }
}

double ATable::prob(int i, int j, int l, int m) const {
  const auto it = slices_.find(Key{j, l, m});
  if (it == slices_.end()) return 1.0 / static_cast<double>(l + 1);
  if (i < 0 || i > l) return 0.0;
  return it->second[static_cast<size_t>(i)];
}

std::vector<double>& ATable::slice(int j, int l, int m) {
  const Key key{j, l, m};
  auto it = slices_.find(key);
  if (it == slices_.end()) {
    it = slices_.emplace(key, std::vector<double>(static_cast<size_t>(l + 1),
                                                  1.0 / static_cast<double>(l + 1)))
             .first;
  }
  return it->second;
}

void ATable::normalize() {
  for (auto& [key, slice] : slices_) {
    double sum = 0.0;
    for (double p : slice) sum += p;
    if (sum <= 0.0) {
      std::fill(slice.begin(), slice.end(), 1.0 / static_cast<double>(slice.size()));
    } else {
      for (double& p : slice) p /= sum;
    }
  }
}

TTable train_ibm1(const ParallelCorpus& corpus, int iters, std::vector<double>* likelihood) {
  require_alignable(corpus);
  if (iters < 1) throw std::invalid_argument("train_ibm1: iters must be >= 1");

  TTable t;
  for (size_t k = 0; k < corpus.size(); ++k) {
    for (int32_t s : corpus.src[k].ids) {
      for (int32_t u : corpus.tgt[k].ids) t.set(s, u, 1.0);
    }
  }
  t.normalize_and_prune();

  for (int iter = 0; iter < iters; ++iter) {
    std::map<int32_t, std::map<int32_t, double>> counts;
    double ll = 0.0;
    for (size_t k = 0; k < corpus.size(); ++k) {
      const auto& src = corpus.src[k].ids;
      const auto& tgt = corpus.tgt[k].ids;
      const double log_l = std::log(static_cast<double>(src.size()));
      for (int32_t u : tgt) {
        double denom = 0.0;
        for (int32_t s : src) denom += t.prob(s, u);
        if (denom <= 0.0) {
          ll += std::log(kProbFloor);
          continue;
        }
        ll += std::log(denom) - log_l;
        for (int32_t s : src) {
          const double p = t.prob(s, u);
          if (p > 0.0) counts[s][u] += p / denom;
        }
      }
    }
    if (likelihood) likelihood->push_back(ll);
    TTable next;
    for (auto& [s, row] : counts) {
      for (auto& [u, c] : row) next.set(s, u, c);
    }
    next.normalize_and_prune();
    t = std::move(next);
  }
  return t;
}

std::pair<TTable, ATable> train_ibm2(const ParallelCorpus& corpus, int iters, const TTable& init,
                                     std::vector<double>* likelihood) {
  if (iters < 0) throw std::invalid_argument("train_ibm2: iters must be >= 0");
  if (iters == 0) return {init, ATable{}};
  require_alignable(corpus);

  TTable t = init;
  {
    std::set<int32_t> tgt_types;
    for (const auto& s : corpus.tgt) tgt_types.insert(s.ids.begin(), s.ids.end());
    for (int32_t u : tgt_types) t.set(kNullWordId, u, 1.0);
    t.normalize_and_prune();
  }
  ATable a;

  for (int iter = 0; iter < iters; ++iter) {
    std::map<int32_t, std::map<int32_t, double>> tcounts;
    std::map<ATable::Key, std::vector<double>> acounts;
    double ll = 0.0;
    for (size_t k = 0; k < corpus.size(); ++k) {
      const auto& src = corpus.src[k].ids;
      const auto& tgt = corpus.tgt[k].ids;
      const int l = static_cast<int>(src.size());
      const int m = static_cast<int>(tgt.size());
      std::vector<double> post(static_cast<size_t>(l + 1), 0.0);
      for (int j = 0; j < m; ++j) {
        const int32_t u = tgt[static_cast<size_t>(j)];
        double denom = 0.0;
        for (int i = 0; i <= l; ++i) {
          const int32_t s = i == 0 ? kNullWordId : src[static_cast<size_t>(i - 1)];
          post[static_cast<size_t>(i)] = t.prob(s, u) * a.prob(i, j, l, m);
          denom += post[static_cast<size_t>(i)];
        }
        if (denom <= 0.0) {
          ll += std::log(kProbFloor);
          continue;
        }
        ll += std::log(denom);
        auto& aslice = acounts
                           .emplace(ATable::Key{j, l, m},
                                    std::vector<double>(static_cast<size_t>(l + 1), 0.0))
                           .first->second;
        for (int i = 0; i <= l; ++i) {
          const double c = post[static_cast<size_t>(i)] / denom;
          if (c <= 0.0) continue;
          const int32_t s = i == 0 ? kNullWordId : src[static_cast<size_t>(i - 1)];
          tcounts[s][u] += c;
          aslice[static_cast<size_t>(i)] += c;
        }
      }
    }
    if (likelihood) likelihood->push_back(ll);
    TTable tnext;
    for (auto& [s, row] : tcounts) {
      for (auto& [u, c] : row) tnext.set(s, u, c);
    }
    tnext.normalize_and_prune();
    t = std::move(tnext);
    ATable anext;
    for (auto& [key, counts] : acounts) anext.slice(key.j, key.l, key.m) = counts;
    anext.normalize();
    a = std::move(anext);
  }
  return {std::move(t), std::move(a)};
}

AlignmentLinks viterbi_align(const TTable& t, const ATable& a, const EncodedSentence& src,
                             const EncodedSentence& tgt) {
  if (!src.valid() || !tgt.valid()) {
    throw std::invalid_argument("viterbi_align: empty sentence");
  }
  const int l = src.length;
  const int m = tgt.length;
  AlignmentLinks links;
  links.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    const int32_t u = tgt.ids[static_cast<size_t>(j)];
    int best_i = -1;
    double best = floored(t.prob(kNullWordId, u)) * floored(a.prob(0, j, l, m));
    for (int i = 0; i < l; ++i) {
      const int32_t s = src.ids[static_cast<size_t>(i)];
      const double score = floored(t.prob(s, u)) * floored(a.prob(i + 1, j, l, m));
      if (score > best) {
        best = score;
        best_i = i;
      }
    }
    links.push_back({best_i, j});
  }
  return links;
}

Dictionary infer_dictionary(const TTable& t, double threshold) {
  Dictionary d;
  for (const auto& [src, row] : t.rows()) {
    if (src < 0) continue;
    for (const auto& [tgt, p] : row) {
      if (p > threshold) d[src].insert(tgt);
    }
  }
  return d;
}

bool length_ratio_filter(int64_t n, int64_t m) {
  if (n <= 0 || m <= 0) return false;
  return std::max(n, m) <= 2 * std::min(n, m);
}

bool length_ratio_filter(const EncodedSentence& s, const EncodedSentence& t) {
  return length_ratio_filter(s.length, t.length);
}

namespace {

// Fraction of `from` tokens (per occurrence) with a dictionary translation
// appearing in `to`.
double covered_fraction(const EncodedSentence& from, const EncodedSentence& to,
                        const Dictionary& dict) {
  if (from.length <= 0) return 0.0;
  const std::set<int32_t> to_types(to.ids.begin(), to.ids.end());
  int covered = 0;
  for (int32_t w : from.ids) {
    const auto it = dict.find(w);
    if (it == dict.end()) continue;
    for (int32_t tr : it->second) {
      if (to_types.count(tr)) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(from.length);
}

}  // namespace

bool word_overlap_filter(const EncodedSentence& s, const EncodedSentence& t,
                         const DictionaryPair& dicts) {
  if (!s.valid() || !t.valid()) return false;
  return covered_fraction(s, t, dicts.fwd) >= 0.5 && covered_fraction(t, s, dicts.rev) >= 0.5;
}

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n{
        "src_len", "tgt_len", "len_diff", "len_ratio", "src_coverage", "tgt_coverage",
    };
    for (const char* dir : {"fwd", "rev"}) {
      for (const char* f : {"connected", "pct_connected", "unconnected", "pct_unconnected",
                            "fertility_top1", "fertility_top2", "fertility_top3", "pct_fert1",
                            "pct_fert2", "pct_fert3plus", "longest_connected",
                            "longest_unconnected"}) {
        n.push_back(std::string(dir) + "_" + f);
      }
    }
    n.push_back("alignment_logprob_diff");
    return n;
  }();
  return names;
}

namespace {

// Per-direction alignment block. `links` carries one entry per linked-side
// position; fertilities are over the other side's words.
void direction_block(const AlignmentLinks& links, int linked_len, int fertile_len, double* out) {
  if (static_cast<int>(links.size()) != linked_len) {
    throw Error("extract_features: expected one link per position");
  }
  int connected = 0;
  std::vector<int> fert(static_cast<size_t>(fertile_len), 0);
  int longest_conn = 0, longest_unconn = 0, run_conn = 0, run_unconn = 0;
  for (int j = 0; j < linked_len; ++j) {
    const int i = links[static_cast<size_t>(j)].src;
    if (i >= 0) {
      if (i >= fertile_len) throw Error("extract_features: link index out of range");
      ++connected;
      ++fert[static_cast<size_t>(i)];
      run_conn += 1;
      run_unconn = 0;
    } else {
      run_unconn += 1;
      run_conn = 0;
    }
    longest_conn = std::max(longest_conn, run_conn);
    longest_unconn = std::max(longest_unconn, run_unconn);
  }
  const int unconnected = linked_len - connected;
  std::vector<int> sorted_fert(fert.begin(), fert.end());
  std::sort(sorted_fert.begin(), sorted_fert.end(), std::greater<int>());
  int f1 = 0, f2 = 0, f3 = 0;
  for (int f : fert) {
    if (f == 1) ++f1;
    else if (f == 2) ++f2;
    else if (f >= 3) ++f3;
  }
  const double linked_d = static_cast<double>(linked_len);
  const double fertile_d = static_cast<double>(fertile_len);
  out[0] = connected;
  out[1] = connected / linked_d;
  out[2] = unconnected;
  out[3] = unconnected / linked_d;
  out[4] = sorted_fert.size() > 0 ? sorted_fert[0] : 0;
  out[5] = sorted_fert.size() > 1 ? sorted_fert[1] : 0;
  out[6] = sorted_fert.size() > 2 ? sorted_fert[2] : 0;
  out[7] = f1 / fertile_d;
  out[8] = f2 / fertile_d;
  out[9] = f3 / fertile_d;
  out[10] = longest_conn;
  out[11] = longest_unconn;
}

double alignment_logprob(const TTable& t, const ATable& a, const EncodedSentence& model_src,
                         const EncodedSentence& model_tgt, const AlignmentLinks& links) {
  const int l = model_src.length;
  const int m = model_tgt.length;
  double lp = 0.0;
  for (const AlignmentLink& link : links) {
    const int32_t u = model_tgt.ids[static_cast<size_t>(link.tgt)];
    const int32_t s = link.src < 0 ? kNullWordId : model_src.ids[static_cast<size_t>(link.src)];
    const int ai = link.src < 0 ? 0 : link.src + 1;
    lp += std::log(floored(t.prob(s, u)) * floored(a.prob(ai, link.tgt, l, m)));
  }
  return lp;
}

}  // namespace

FeatureVector extract_features(const EncodedSentence& src, const EncodedSentence& tgt,
                               const AlignmentLinks& links_fwd, const AlignmentLinks& links_rev,
                               const TTable& t_fwd, const TTable& t_rev, const ATable& a_fwd,
                               const ATable& a_rev, const DictionaryPair& dicts) {
  if (!src.valid() || !tgt.valid()) {
    throw std::invalid_argument("extract_features: empty sentence");
  }
  FeatureVector fv{};
  const double n = src.length;
  const double m = tgt.length;
  fv[0] = n;
  fv[1] = m;
  fv[2] = std::abs(n - m);
  fv[3] = std::max(n, m) / std::min(n, m);
  fv[4] = covered_fraction(src, tgt, dicts.fwd);
  fv[5] = covered_fraction(tgt, src, dicts.rev);
  direction_block(links_fwd, tgt.length, src.length, fv.data() + 6);
  direction_block(links_rev, src.length, tgt.length, fv.data() + 18);
  const double lp_fwd = alignment_logprob(t_fwd, a_fwd, src, tgt, links_fwd);
  const double lp_rev = alignment_logprob(t_rev, a_rev, tgt, src, links_rev);
  fv[30] = lp_fwd - lp_rev;
  return fv;
}

MaxentModel train_maxent(const std::vector<std::pair<FeatureVector, int>>& examples, double lr,
                         int epochs, double neg_ratio, uint64_t seed) {
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < examples.size(); ++i) {
    const int y = examples[i].second;
    if (y != 0 && y != 1) throw std::invalid_argument("train_maxent: labels must be 0 or 1");
    (y == 1 ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw Error("train_maxent: need at least one example of each class");
  }
  if (epochs < 1) throw std::invalid_argument("train_maxent: epochs must be >= 1");

  Rng rng(mix_seed(seed, 0xba5e11f3u));
  rng.shuffle(neg);
  const size_t keep = std::min(
      neg.size(), static_cast<size_t>(std::llround(neg_ratio * static_cast<double>(pos.size()))));
  neg.resize(std::max<size_t>(keep, 1));

  std::vector<size_t> train = pos;
  train.insert(train.end(), neg.begin(), neg.end());
  std::sort(train.begin(), train.end());

  MaxentModel model;
  model.mean.assign(kFeatureCount, 0.0);
  model.stdev.assign(kFeatureCount, 1.0);
  for (size_t i : train) {
    for (int f = 0; f < kFeatureCount; ++f) model.mean[f] += examples[i].first[f];
  }
  for (int f = 0; f < kFeatureCount; ++f) model.mean[f] /= static_cast<double>(train.size());
  std::vector<double> var(kFeatureCount, 0.0);
  for (size_t i : train) {
    for (int f = 0; f < kFeatureCount; ++f) {
      const double d = examples[i].first[f] - model.mean[f];
      var[f] += d * d;
    }
  }
  for (int f = 0; f < kFeatureCount; ++f) {
    var[f] /= static_cast<double>(train.size());
    if (var[f] > 1e-24) model.stdev[f] = std::sqrt(var[f]);
  }

  auto standardized = [&](size_t i, int f) {
    return (examples[i].first[f] - model.mean[f]) / model.stdev[f];
  };

  Tensor w({kFeatureCount});
  Tensor b({1});
  std::vector<Tensor*> params{&w, &b};
  std::vector<const Tensor*> cparams{&w, &b};
  AdamState adam = AdamState::create(cparams);
  AdamConfig acfg;
  acfg.lr = lr;
  constexpr int kBatch = 128;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng epoch_rng(mix_seed(mix_seed(seed, 0x5eedu), static_cast<uint64_t>(epoch)));
    epoch_rng.shuffle(train);
    size_t idx = 0;
    while (idx < train.size()) {
      const size_t bsz = std::min(static_cast<size_t>(kBatch), train.size() - idx);
      Tensor gw = Tensor::zeros({kFeatureCount});
      Tensor gb = Tensor::zeros({1});
      std::vector<double> gacc(kFeatureCount + 1, 0.0);
      for (size_t k = 0; k < bsz; ++k) {
        const size_t i = train[idx + k];
        double logit = static_cast<double>(b[0]);
        for (int f = 0; f < kFeatureCount; ++f) {
          logit += static_cast<double>(w[f]) * standardized(i, f);
        }
        const double err = sigmoid(logit) - static_cast<double>(examples[i].second);
        for (int f = 0; f < kFeatureCount; ++f) gacc[f] += err * standardized(i, f);
        gacc[kFeatureCount] += err;
      }
      for (int f = 0; f < kFeatureCount; ++f) {
        gw[f] = static_cast<float>(gacc[f] / static_cast<double>(bsz));
      }
      gb[0] = static_cast<float>(gacc[kFeatureCount] / static_cast<double>(bsz));
      std::vector<Tensor*> gptrs{&gw, &gb};
      clip_gradients(gptrs, 5.0);
      std::vector<const Tensor*> cg{&gw, &gb};
      adam_step(params, adam, cg, acfg);
      idx += bsz;
    }
  }

  model.w.assign(kFeatureCount, 0.0);
  for (int f = 0; f < kFeatureCount; ++f) model.w[f] = static_cast<double>(w[f]);
  model.b = static_cast<double>(b[0]);
  return model;
}

double score_maxent(const MaxentModel& m, const FeatureVector& fv) {
  if (m.w.size() != kFeatureCount || m.mean.size() != kFeatureCount ||
      m.stdev.size() != kFeatureCount) {
    throw Error("score_maxent: model has wrong dimension");
  }
  double logit = m.b;
  for (int f = 0; f < kFeatureCount; ++f) {
    logit += m.w[f] * ((fv[f] - m.mean[f]) / m.stdev[f]);
  }
  return sigmoid(logit);
}

namespace {

std::string table_token(int32_t id, const Vocabulary& vocab) {
  return id == kNullWordId ? std::string(kNullToken) : vocab.token(id);
}

int32_t table_id(const std::string& token, const Vocabulary& vocab, const std::string& path) {
  if (token == kNullToken) return kNullWordId;
  if (!vocab.contains(token)) {
    throw UsageError("table token not in vocabulary: '" + token + "' (" + path + ")");
  }
  return vocab.lookup(token);
}

double parse_prob(const std::string& text, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw UsageError("bad probability '" + text + "' in " + path);
  }
  return v;
}

long parse_int(const std::string& text, const std::string& path) {
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0') {
    throw UsageError("bad integer '" + text + "' in " + path);
  }
  return v;
}

}  // namespace

void save_ttable(const TTable& t, const Vocabulary& row_vocab, const Vocabulary& col_vocab,
                 const std::string& path) {
  std::vector<std::pair<std::pair<std::string, std::string>, double>> lines;
  for (const auto& [src, row] : t.rows()) {
    for (const auto& [tgt, p] : row) {
      lines.push_back({{table_token(src, row_vocab), table_token(tgt, col_vocab)}, p});
    }
  }
  std::sort(lines.begin(), lines.end());
  atomic_write(path, [&](std::ostream& f) {
    for (const auto& [key, p] : lines) {
      f << key.first << '\t' << key.second << '\t' << format_g17(p) << '\n';
    }
  });
}

TTable load_ttable(const std::string& path, const Vocabulary& row_vocab,
                   const Vocabulary& col_vocab) {
  TTable t;
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 3) {
      throw UsageError(path + ":" + std::to_string(i + 1) + ": expected 3 tab-separated fields");
    }
    t.set(table_id(fields[0], row_vocab, path), table_id(fields[1], col_vocab, path),
          parse_prob(fields[2], path));
  }
  return t;
}

void save_atable(const ATable& a, const std::string& path) {
  atomic_write(path, [&](std::ostream& f) {
    for (const auto& [key, slice] : a.slices()) {
      for (size_t i = 0; i < slice.size(); ++i) {
        f << i << '\t' << key.j << '\t' << key.l << '\t' << key.m << '\t'
          << format_g17(slice[i]) << '\n';
      }
    }
  });
}

ATable load_atable(const std::string& path) {
  ATable a;
  const auto lines = read_lines(path);
  for (size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto fields = split_tabs(lines[n]);
    if (fields.size() != 5) {
      throw UsageError(path + ":" + std::to_string(n + 1) + ": expected 5 tab-separated fields");
    }
    const long i = parse_int(fields[0], path);
    const long j = parse_int(fields[1], path);
    const long l = parse_int(fields[2], path);
    const long m = parse_int(fields[3], path);
    if (l < 1 || l > kMaxSentenceTokens || m < 1 || m > kMaxSentenceTokens || i < 0 || i > l ||
        j < 0 || j >= m) {
      throw UsageError(path + ":" + std::to_string(n + 1) + ": positions out of range");
    }
    a.slice(static_cast<int>(j), static_cast<int>(l), static_cast<int>(m))[static_cast<size_t>(
        i)] = parse_prob(fields[4], path);
  }
  return a;
}

void save_dictionary(const Dictionary& d, const Vocabulary& key_vocab,
                     const Vocabulary& value_vocab, const std::string& path) {
  std::vector<std::pair<std::string, std::string>> lines;
  for (const auto& [key, values] : d) {
    for (int32_t v : values) {
      lines.push_back({table_token(key, key_vocab), table_token(v, value_vocab)});
    }
  }
  std::sort(lines.begin(), lines.end());
  atomic_write(path, [&](std::ostream& f) {
    for (const auto& [k, v] : lines) f << k << '\t' << v << '\n';
  });
}

Dictionary load_dictionary(const std::string& path, const Vocabulary& key_vocab,
                           const Vocabulary& value_vocab) {
  Dictionary d;
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 2) {
      throw UsageError(path + ":" + std::to_string(i + 1) + ": expected 2 tab-separated fields");
    }
    d[table_id(fields[0], key_vocab, path)].insert(table_id(fields[1], value_vocab, path));
  }
  return d;
}

}  // namespace bitext
