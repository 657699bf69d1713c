#ifndef BITEXT_EXTRACTION_HPP
#define BITEXT_EXTRACTION_HPP

#include <map>
#include <string>
#include <vector>

#include "bitext/checkpoint.hpp"
#include "bitext/corpus.hpp"
#include "bitext/siamese.hpp"

namespace bitext {

struct ScoredPair {
  std::string doc_id;
  int src_idx = 0;
  int tgt_idx = 0;
  double score = 0.0;
};

enum class ScorerKind { kBirnn, kBaseline, kOracle };

struct ExtractionConfig {
  double rho = 0.99;
  int min_tokens = 3;
  ScorerKind scorer = ScorerKind::kBirnn;
  // Length-ratio and word-overlap pre-filters; they belong to the
  // alignment-based scorer and stay off for the neural one.
  bool apply_candidate_filters = false;
  int threads = 1;
};

inline bool default_candidate_filters(ScorerKind kind) { return kind == ScorerKind::kBaseline; }

class PairScorer {
 public:
  virtual ~PairScorer() = default;
  // Probability that (src, tgt) are translations. Both sentences valid.
  virtual double score(const EncodedSentence& src, const EncodedSentence& tgt) const = 0;
  // Candidate pre-filter; the default accepts everything.
  virtual bool passes_filters(const EncodedSentence& src, const EncodedSentence& tgt) const;
};

class BirnnScorer : public PairScorer {
 public:
  explicit BirnnScorer(const ModelParams* model) : model_(model) {}
  double score(const EncodedSentence& src, const EncodedSentence& tgt) const override;

 private:
  const ModelParams* model_;
};

class BaselineScorer : public PairScorer {
 public:
  explicit BaselineScorer(const BaselineBundle* bundle) : bundle_(bundle) {}
  double score(const EncodedSentence& src, const EncodedSentence& tgt) const override;
  bool passes_filters(const EncodedSentence& src, const EncodedSentence& tgt) const override;

 private:
  const BaselineBundle* bundle_;
};

// Scores `high` when the target is the reference translation of the source
// (by exact token-id match) and `low` otherwise. Self-test plumbing.
class OracleScorer : public PairScorer {
 public:
  explicit OracleScorer(const ParallelCorpus& reference, double high = 0.99, double low = 0.01);
  double score(const EncodedSentence& src, const EncodedSentence& tgt) const override;

 private:
  std::map<std::vector<int32_t>, std::vector<int32_t>> reference_;
  double high_;
  double low_;
};

// Cartesian candidates per document; invalid sentences skipped; optional
// pre-filters; survivors scored (parallel across candidates when
// cfg.threads > 1, output order independent of thread count); pairs with
// score >= cfg.rho returned in document order, row-major.
std::vector<ScoredPair> score_candidates(const PairScorer& scorer,
                                         const std::vector<DocumentPair>& docs,
                                         const ExtractionConfig& cfg);

// Sort by descending score (ties: ascending doc_id, src_idx, tgt_idx), then
// keep a pair iff neither sentence was used by an earlier kept pair of the
// same document.
std::vector<ScoredPair> greedy_one_to_one(const std::vector<ScoredPair>& pairs);

// Keeps pairs whose sentences both have at least min_tokens tokens.
std::vector<ScoredPair> min_length_filter(const std::vector<ScoredPair>& pairs,
                                          const std::vector<DocumentPair>& docs, int min_tokens);

struct ExtractionReport {
  size_t pairs = 0;
  size_t src_tokens = 0;
  size_t tgt_tokens = 0;
  double src_len_mean = 0.0;
  double src_len_stdev = 0.0;
  double tgt_len_mean = 0.0;
  double tgt_len_stdev = 0.0;

  std::string to_text() const;
  std::string to_json() const;
};

// score -> threshold -> greedy one-to-one -> minimum length. Writes the
// surviving pairs to tsv_path ("score<TAB>doc_id<TAB>src<TAB>tgt", score
// with 6 decimals, atomic) and returns the corpus statistics.
ExtractionReport run_pipeline(const PairScorer& scorer, const std::vector<DocumentPair>& docs,
                              const ExtractionConfig& cfg, const std::string& tsv_path);

}  // namespace bitext

#endif  // BITEXT_EXTRACTION_HPP
