#ifndef BITEXT_BASELINE_HPP
#define BITEXT_BASELINE_HPP

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bitext/corpus.hpp"

namespace bitext {

// Source id used for the empty (NULL) word in alignment models. Serialized
// as the literal token "<null>", which the tokenizer can never produce.
inline constexpr int32_t kNullWordId = -1;

// t(target token | source token), sparse.
class TTable {
 public:
  using Row = std::map<int32_t, double>;

  double prob(int32_t src, int32_t tgt) const;
  void set(int32_t src, int32_t tgt, double p);
  Row& row(int32_t src) { return rows_[src]; }
  const std::map<int32_t, Row>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  size_t entry_count() const;

  // Per-row: divide by the row sum, drop entries below `floor`, renormalize
  // the survivors. Rows whose sum is zero are removed.
  void normalize_and_prune(double floor = 1e-6);

 private:
  std::map<int32_t, Row> rows_;
};

// a(i | j, l, m): distribution over source positions for each (target
// position, source length, target length). Index 0 is the NULL word and
// 1..l are the source positions. Slices not materialized are uniform
// 1/(l+1). Lengths are capped by the corpus sentence-length limit.
class ATable {
 public:
  struct Key {
    int j = 0, l = 0, m = 0;
    bool operator<(const Key& o) const {
      if (j != o.j) return j < o.j;
      if (l != o.l) return l < o.l;
      return m < o.m;
    }
  };

  double prob(int i, int j, int l, int m) const;
  std::vector<double>& slice(int j, int l, int m);  // materializes uniform
  const std::map<Key, std::vector<double>>& slices() const { return slices_; }
  bool empty() const { return slices_.empty(); }

  void normalize();

 private:
  std::map<Key, std::vector<double>> slices_;
};

struct AlignmentLink {
  int src = 0;  // -1 for NULL
  int tgt = 0;
};
using AlignmentLinks = std::vector<AlignmentLink>;

// word id -> set of translation ids, from entries strictly above threshold
using Dictionary = std::map<int32_t, std::set<int32_t>>;

struct DictionaryPair {
  Dictionary fwd;  // source id -> target ids
  Dictionary rev;  // target id -> source ids
};

// EM from a uniform initialization over each source word's co-occurring
// targets, no NULL word. `likelihood` (when given) receives one corpus
// log-likelihood per iteration, measured at the parameters entering that
// iteration's count collection; the sequence is non-decreasing.
TTable train_ibm1(const ParallelCorpus& corpus, int iters,
                  std::vector<double>* likelihood = nullptr);

// Joint EM over t and a with a NULL source word at alignment index 0.
// iters=0 returns (init, uniform ATable) untouched.
std::pair<TTable, ATable> train_ibm2(const ParallelCorpus& corpus, int iters, const TTable& init,
                                     std::vector<double>* likelihood = nullptr);

// One link per target position: argmax over NULL and every source position
// of t * a, ties toward the smaller source index with NULL (-1) first. Both
// factors floor at 1e-10, so unseen target tokens fall to NULL.
AlignmentLinks viterbi_align(const TTable& t, const ATable& a, const EncodedSentence& src,
                             const EncodedSentence& tgt);

// Entries with t(tgt|src) strictly above threshold; the NULL row is skipped.
Dictionary infer_dictionary(const TTable& t, double threshold = 0.1);

// max(n, m) / min(n, m) <= 2; non-positive lengths fail.
bool length_ratio_filter(int64_t n, int64_t m);
bool length_ratio_filter(const EncodedSentence& s, const EncodedSentence& t);

// At least half of each sentence's tokens (counted per occurrence) have a
// dictionary translation present in the other sentence.
bool word_overlap_filter(const EncodedSentence& s, const EncodedSentence& t,
                         const DictionaryPair& dicts);

inline constexpr int kFeatureCount = 31;
using FeatureVector = std::array<double, kFeatureCount>;

// Canonical feature order; index i names feature_names()[i].
const std::vector<std::string>& feature_names();

// The 31 features: 6 length/coverage features, a 12-feature alignment block
// per direction, and the difference of the two alignment log probabilities.
FeatureVector extract_features(const EncodedSentence& src, const EncodedSentence& tgt,
                               const AlignmentLinks& links_fwd, const AlignmentLinks& links_rev,
                               const TTable& t_fwd, const TTable& t_rev, const ATable& a_fwd,
                               const ATable& a_rev, const DictionaryPair& dicts);

struct MaxentModel {
  std::vector<double> w;  // kFeatureCount weights
  double b = 0.0;
  std::vector<double> mean;   // feature standardization, stored with the model
  std::vector<double> stdev;  // zero-variance features keep stdev 1
};

// Logistic regression by Adam on standardized features. Negatives are
// subsampled (seeded) to at most `neg_ratio` times the positive count.
// Throws on single-class input.
MaxentModel train_maxent(const std::vector<std::pair<FeatureVector, int>>& examples,
                         double lr = 2e-4, int epochs = 200, double neg_ratio = 1.0,
                         uint64_t seed = 1);

double score_maxent(const MaxentModel& m, const FeatureVector& fv);

// Text formats: ttable rows "src_token<TAB>tgt_token<TAB>prob" sorted by the
// token pair; atable rows "i<TAB>j<TAB>l<TAB>m<TAB>prob" sorted by (j,l,m,i);
// dictionaries "src<TAB>tgt" sorted. Probabilities carry 17 significant
// digits and round-trip exactly.
void save_ttable(const TTable& t, const Vocabulary& row_vocab, const Vocabulary& col_vocab,
                 const std::string& path);
TTable load_ttable(const std::string& path, const Vocabulary& row_vocab,
                   const Vocabulary& col_vocab);
void save_atable(const ATable& a, const std::string& path);
ATable load_atable(const std::string& path);
void save_dictionary(const Dictionary& d, const Vocabulary& key_vocab,
                     const Vocabulary& value_vocab, const std::string& path);
Dictionary load_dictionary(const std::string& path, const Vocabulary& key_vocab,
                           const Vocabulary& value_vocab);

}  // namespace bitext

#endif  // BITEXT_BASELINE_HPP
