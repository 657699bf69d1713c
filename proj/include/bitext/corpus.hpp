#ifndef BITEXT_CORPUS_HPP
#define BITEXT_CORPUS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bitext/common.hpp"

namespace bitext {

// Sentences longer than this many tokens are discarded, not truncated.
inline constexpr int kMaxSentenceTokens = 80;

inline constexpr int32_t kPadId = 0;
inline constexpr int32_t kUnkId = 1;
inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kUnkToken = "<unk>";

// Lowercases ASCII letters, splits ASCII punctuation into standalone tokens
// and collapses whitespace. Multi-byte UTF-8 sequences pass through as word
// characters. Stands in for the usual external tokenizer scripts; documented
// in the README so corpora stay reproducible.
std::vector<std::string> tokenize(const std::string& text);

// Token <-> index bijection. Index 0 is the padding symbol, index 1 the
// unknown symbol; real tokens start at index 2.
class Vocabulary {
 public:
  Vocabulary();

  // Appends a token; it must not already be present.
  int32_t add(const std::string& token);

  // Index of token, or kUnkId when absent.
  int32_t lookup(const std::string& token) const;

  bool contains(const std::string& token) const;

  const std::string& token(int32_t id) const;

  int32_t size() const { return static_cast<int32_t>(tokens_.size()); }

  const std::vector<std::string>& tokens() const { return tokens_; }

  // One real token per line, line number == index - 2.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> index_;
};

// Tokens ranked by descending corpus frequency, ties broken lexicographically,
// truncated to max_size real tokens (0 = unbounded).
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sentences,
                       size_t max_size = 0);

struct EncodedSentence {
  std::vector<int32_t> ids;
  int32_t length = 0;  // token count before any padding

  bool valid() const { return length > 0; }
};

// Out-of-vocabulary tokens map to the unknown index. Empty or overlong
// sentences yield nullopt.
std::optional<EncodedSentence> try_encode(const std::vector<std::string>& tokens,
                                          const Vocabulary& vocab);

// Throwing variant of try_encode for callers that treat failure as an error.
EncodedSentence encode(const std::vector<std::string>& tokens, const Vocabulary& vocab);

struct ParallelCorpus {
  std::vector<EncodedSentence> src;
  std::vector<EncodedSentence> tgt;

  size_t size() const { return src.size(); }
};

struct LoadStats {
  size_t lines = 0;    // line pairs in the input files
  size_t kept = 0;     // pairs surviving the length/emptiness filters
  size_t dropped = 0;  // pairs discarded
};

// Reads two line-aligned files, tokenizes and encodes each side, and drops
// pairs where either side fails to encode. Unequal line counts raise a
// UsageError.
ParallelCorpus load_parallel(const std::string& src_path, const std::string& tgt_path,
                             const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                             LoadStats* stats = nullptr);

// Raw sentences of one side of a line-aligned file, one sentence per line.
std::vector<std::string> read_lines(const std::string& path);

struct TrainingTriple {
  EncodedSentence src;
  EncodedSentence tgt;
  int label = 0;  // 1 iff the pair is an unmodified corpus pair
};

// For each corpus pair k emits one positive triple followed by m negatives
// (src_k, tgt_j, 0) with j != k drawn uniformly with replacement. Exactly
// n*(1+m) triples, deterministic given seed. Intended to be re-invoked with a
// fresh seed at the start of every epoch.
std::vector<TrainingTriple> sample_negatives(const ParallelCorpus& corpus, int m,
                                             uint64_t seed);

struct NoisyTestSet {
  std::vector<EncodedSentence> src;                  // untouched test sources
  std::vector<EncodedSentence> tgt;                  // targets with replacements
  std::vector<std::pair<int, int>> gold;             // unreplaced (i, i) pairs
  std::vector<int> replaced_positions;               // target slots overwritten
};

// Replaces round(ratio * n) target positions (half up) with distinct pool
// sentences. Pool sentences must be disjoint from the test targets.
NoisyTestSet inject_noise(const ParallelCorpus& test, double ratio,
                          const std::vector<EncodedSentence>& pool, uint64_t seed);

struct DocumentPair {
  std::string doc_id;
  std::vector<std::string> src_raw;  // original sentence strings
  std::vector<std::string> tgt_raw;
  std::vector<EncodedSentence> src;  // length 0 marks an unencodable sentence
  std::vector<EncodedSentence> tgt;
};

// All |src| x |tgt| index pairs in row-major order.
std::vector<std::pair<int, int>> cartesian_candidates(const DocumentPair& doc);

// JSON-lines input, one object per line:
//   {"doc_id": "...", "src": ["sentence", ...], "tgt": ["sentence", ...]}
// Sentences that are empty or longer than kMaxSentenceTokens keep their slot
// (indices must stay stable) but are flagged invalid and never scored.
std::vector<DocumentPair> load_documents(const std::string& path,
                                         const Vocabulary& src_vocab,
                                         const Vocabulary& tgt_vocab);

}  // namespace bitext

#endif  // BITEXT_CORPUS_HPP
