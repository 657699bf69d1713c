#include "bitext/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <thread>

#include "bitext/baseline.hpp"
#include "bitext/io.hpp"

#include "json.hpp"

namespace bitext {
namespace {

// Deterministic parallel map: slot i always receives fn(i)'s result.
void parallel_for(int64_t n, int threads, const std::function<void(int64_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<int64_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int64_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

void length_stats(const std::vector<int64_t>& lengths, double* mean, double* stdev) {
  *mean = 0.0;
  *stdev = 0.0;
  if (lengths.empty()) return;
  double sum = 0.0;
  for (int64_t l : lengths) sum += static_cast<double>(l);
  *mean = sum / static_cast<double>(lengths.size());
  double sq = 0.0;
  for (int64_t l : lengths) {
    const double d = static_cast<double>(l) - *mean;
    sq += d * d;
  }
  *stdev = std::sqrt(sq / static_cast<double>(lengths.size()));
}

}  // namespace

bool PairScorer::passes_filters(const EncodedSentence&, const EncodedSentence&) const {
  return true;
}

double BirnnScorer::score(const EncodedSentence& src, const EncodedSentence& tgt) const {
  return score_pair(*model_, src, tgt);
}

double BaselineScorer::score(const EncodedSentence& src, const EncodedSentence& tgt) const {
  const BaselineBundle& b = *bundle_;
  const AlignmentLinks fwd = viterbi_align(b.t_fwd, b.a_fwd, src, tgt);
  const AlignmentLinks rev = viterbi_align(b.t_rev, b.a_rev, tgt, src);
  const FeatureVector fv =
      extract_features(src, tgt, fwd, rev, b.t_fwd, b.t_rev, b.a_fwd, b.a_rev, b.dicts);
  return score_maxent(b.maxent, fv);
}

bool BaselineScorer::passes_filters(const EncodedSentence& src, const EncodedSentence& tgt) const {
  return length_ratio_filter(src, tgt) && word_overlap_filter(src, tgt, bundle_->dicts);
}

OracleScorer::OracleScorer(const ParallelCorpus& reference, double high, double low)
    : high_(high), low_(low) {
  for (size_t i = 0; i < reference.size(); ++i) {
    reference_[reference.src[i].ids] = reference.tgt[i].ids;
  }
}

double OracleScorer::score(const EncodedSentence& src, const EncodedSentence& tgt) const {
  const auto it = reference_.find(src.ids);
  return it != reference_.end() && it->second == tgt.ids ? high_ : low_;
}

std::vector<ScoredPair> score_candidates(const PairScorer& scorer,
                                         const std::vector<DocumentPair>& docs,
                                         const ExtractionConfig& cfg) {
  if (cfg.rho < 0.0 || cfg.rho >= 1.0) {
    throw std::invalid_argument("score_candidates: rho must be in [0, 1)");
  }
  struct Candidate {
    const DocumentPair* doc;
    int src_idx, tgt_idx;
  };
  std::vector<Candidate> candidates;
  for (const DocumentPair& doc : docs) {
    for (const auto& [i, j] : cartesian_candidates(doc)) {
      const EncodedSentence& s = doc.src[static_cast<size_t>(i)];
      const EncodedSentence& t = doc.tgt[static_cast<size_t>(j)];
      if (!s.valid() || !t.valid()) continue;
      if (cfg.apply_candidate_filters && !scorer.passes_filters(s, t)) continue;
      candidates.push_back({&doc, i, j});
    }
  }
  std::vector<double> scores(candidates.size(), 0.0);
  parallel_for(static_cast<int64_t>(candidates.size()), cfg.threads, [&](int64_t k) {
    const Candidate& c = candidates[static_cast<size_t>(k)];
    scores[static_cast<size_t>(k)] = scorer.score(c.doc->src[static_cast<size_t>(c.src_idx)],
                                                  c.doc->tgt[static_cast<size_t>(c.tgt_idx)]);
  });
  std::vector<ScoredPair> out;
  for (size_t k = 0; k < candidates.size(); ++k) {
    if (scores[k] >= cfg.rho) {
      out.push_back({candidates[k].doc->doc_id, candidates[k].src_idx, candidates[k].tgt_idx,
                     scores[k]});
    }
  }
  return out;
}

std::vector<ScoredPair> greedy_one_to_one(const std::vector<ScoredPair>& pairs) {
  std::vector<ScoredPair> sorted = pairs;
  std::stable_sort(sorted.begin(), sorted.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
    if (a.src_idx != b.src_idx) return a.src_idx < b.src_idx;
    return a.tgt_idx < b.tgt_idx;
  });
  std::map<std::string, std::pair<std::set<int>, std::set<int>>> used;
  std::vector<ScoredPair> kept;
  for (const ScoredPair& p : sorted) {
    auto& [src_used, tgt_used] = used[p.doc_id];
    if (src_used.count(p.src_idx) || tgt_used.count(p.tgt_idx)) continue;
    src_used.insert(p.src_idx);
    tgt_used.insert(p.tgt_idx);
    kept.push_back(p);
  }
  return kept;
}

std::vector<ScoredPair> min_length_filter(const std::vector<ScoredPair>& pairs,
                                          const std::vector<DocumentPair>& docs, int min_tokens) {
  if (min_tokens < 1) throw std::invalid_argument("min_length_filter: min_tokens must be >= 1");
  std::map<std::string, const DocumentPair*> by_id;
  for (const DocumentPair& doc : docs) by_id[doc.doc_id] = &doc;
  std::vector<ScoredPair> out;
  for (const ScoredPair& p : pairs) {
    const auto it = by_id.find(p.doc_id);
    if (it == by_id.end()) throw Error("min_length_filter: unknown document " + p.doc_id);
    const DocumentPair& doc = *it->second;
    if (p.src_idx < 0 || static_cast<size_t>(p.src_idx) >= doc.src.size() || p.tgt_idx < 0 ||
        static_cast<size_t>(p.tgt_idx) >= doc.tgt.size()) {
      throw Error("min_length_filter: pair indices out of range in document " + p.doc_id);
    }
    if (doc.src[static_cast<size_t>(p.src_idx)].length >= min_tokens &&
        doc.tgt[static_cast<size_t>(p.tgt_idx)].length >= min_tokens) {
      out.push_back(p);
    }
  }
  return out;
}

std::string ExtractionReport::to_text() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "pairs %zu\n"
                "src_tokens %zu\n"
                "tgt_tokens %zu\n"
                "src_len_mean %.6f\n"
                "src_len_stdev %.6f\n"
                "tgt_len_mean %.6f\n"
                "tgt_len_stdev %.6f\n",
                pairs, src_tokens, tgt_tokens, src_len_mean, src_len_stdev, tgt_len_mean,
                tgt_len_stdev);
  return buf;
}

std::string ExtractionReport::to_json() const {
  nlohmann::json j;
  j["pairs"] = pairs;
  j["src_tokens"] = src_tokens;
  j["tgt_tokens"] = tgt_tokens;
  j["src_len_mean"] = src_len_mean;
  j["src_len_stdev"] = src_len_stdev;
  j["tgt_len_mean"] = tgt_len_mean;
  j["tgt_len_stdev"] = tgt_len_stdev;
  return j.dump(2) + "\n";
}

ExtractionReport run_pipeline(const PairScorer& scorer, const std::vector<DocumentPair>& docs,
                              const ExtractionConfig& cfg, const std::string& tsv_path) {
  const std::vector<ScoredPair> scored = score_candidates(scorer, docs, cfg);
  const std::vector<ScoredPair> deduped = greedy_one_to_one(scored);
  const std::vector<ScoredPair> final_pairs = min_length_filter(deduped, docs, cfg.min_tokens);

  std::map<std::string, const DocumentPair*> by_id;
  for (const DocumentPair& doc : docs) by_id[doc.doc_id] = &doc;

  ExtractionReport report;
  std::vector<int64_t> src_lens, tgt_lens;
  atomic_write(tsv_path, [&](std::ostream& f) {
    char score_buf[32];
    for (const ScoredPair& p : final_pairs) {
      const DocumentPair& doc = *by_id.at(p.doc_id);
      std::snprintf(score_buf, sizeof(score_buf), "%.6f", p.score);
      f << score_buf << '\t' << p.doc_id << '\t' << doc.src_raw[static_cast<size_t>(p.src_idx)]
        << '\t' << doc.tgt_raw[static_cast<size_t>(p.tgt_idx)] << '\n';
      src_lens.push_back(doc.src[static_cast<size_t>(p.src_idx)].length);
      tgt_lens.push_back(doc.tgt[static_cast<size_t>(p.tgt_idx)].length);
    }
  });
  report.pairs = final_pairs.size();
  for (int64_t l : src_lens) report.src_tokens += static_cast<size_t>(l);
  for (int64_t l : tgt_lens) report.tgt_tokens += static_cast<size_t>(l);
  length_stats(src_lens, &report.src_len_mean, &report.src_len_stdev);
  length_stats(tgt_lens, &report.tgt_len_mean, &report.tgt_len_stdev);
  return report;
}

}  // namespace bitext
