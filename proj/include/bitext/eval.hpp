#ifndef BITEXT_EVAL_HPP
#define BITEXT_EVAL_HPP

#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bitext/corpus.hpp"
#include "bitext/extraction.hpp"

namespace bitext {

using PairSet = std::set<std::pair<int, int>>;

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// P = |predicted ∩ gold| / |predicted| (0 when nothing predicted),
// R = |predicted ∩ gold| / |gold|, F1 the harmonic mean (0 when P+R = 0).
// Empty gold is an error.
Metrics precision_recall_f1(const PairSet& predicted, const PairSet& gold);

struct PRPoint {
  double rho = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t extracted = 0;
};

struct EvalReport {
  std::vector<PRPoint> points;  // one per threshold, ascending rho
  PRPoint best;                 // max f1, ties toward larger rho
  double noise_ratio = 0.0;
};

// One PRPoint per threshold: keep scored pairs with score >= rho, apply
// greedy one-to-one (skipped in pre-greedy mode), compare index pairs
// against gold. Thresholds must be strictly ascending within (0, 1).
EvalReport pr_curve(const std::vector<ScoredPair>& scored, const PairSet& gold,
                    const std::vector<double>& thresholds, bool pre_greedy = false);

PRPoint optimal_f1_threshold(const EvalReport& report);

// For each ratio: corrupt the test targets via inject_noise with a
// per-ratio seed, score the full Cartesian product, build an EvalReport.
// With apply_filters, pairs rejected by the scorer's candidate filters are
// scored 0 and so never extracted.
std::vector<EvalReport> noise_sweep(const PairScorer& scorer, const ParallelCorpus& test,
                                    const std::vector<double>& ratios,
                                    const std::vector<EncodedSentence>& pool,
                                    const std::vector<double>& thresholds, uint64_t seed,
                                    int threads = 1, bool pre_greedy = false,
                                    bool apply_filters = false);

// Corpus-level BLEU, n-grams up to max_n, clipped counts, brevity penalty,
// no smoothing: any zero n-gram precision gives 0. Result in [0, 1].
double bleu(const std::vector<std::vector<std::string>>& candidates,
            const std::vector<std::vector<std::string>>& references, int max_n = 4);

// Plain-text report: comment header (noise ratio, best point), a column
// header, then "rho precision recall f1 extracted" rows.
void write_eval_report(const EvalReport& report, std::ostream& out);

}  // namespace bitext

#endif  // BITEXT_EVAL_HPP
