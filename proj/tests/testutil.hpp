#ifndef BITEXT_TESTUTIL_HPP
#define BITEXT_TESTUTIL_HPP

#include <set>
#include <string>
#include <vector>

#include "bitext/common.hpp"
#include "bitext/corpus.hpp"

namespace bitext::testutil {

// Synthetic pair language. Every target sentence is a deterministic
// token-by-token remapping of its source: 120 content words map one-to-one
// (c<i> -> d<i>) while 80 grammar words collapse sixteen-to-one onto five
// target words (g<j> -> h<j%5>). The collapse keeps the forward dictionary
// sharp but makes the reverse translation table diffuse for grammar words,
// so dictionary-based overlap filtering caps recall on grammar-heavy pairs
// while sequence models are unaffected.
struct ToyLanguage {
  Vocabulary src_vocab, tgt_vocab;
  ParallelCorpus train, test;
  std::vector<EncodedSentence> pool;  // extra target-side noise sentences

  std::vector<std::string> train_src_lines, train_tgt_lines;
  std::vector<std::string> test_src_lines, test_tgt_lines;
  std::vector<std::string> pool_lines;
};

inline constexpr int kToyContentWords = 120;
inline constexpr int kToyGrammarWords = 80;
inline constexpr int kToyGrammarTargets = 5;

inline ToyLanguage make_toy_language(int n_train = 2000, int n_test = 200, int n_pool = 400,
                                     uint64_t seed = 123) {
  ToyLanguage toy;
  std::vector<std::string> src_tokens, tgt_tokens;
  for (int i = 0; i < kToyContentWords; ++i) {
    src_tokens.push_back("c" + std::to_string(i));
    tgt_tokens.push_back("d" + std::to_string(i));
  }
  for (int j = 0; j < kToyGrammarWords; ++j) {
    src_tokens.push_back("g" + std::to_string(j));
    tgt_tokens.push_back("h" + std::to_string(j % kToyGrammarTargets));
  }
  for (const auto& t : src_tokens) toy.src_vocab.add(t);
  for (int i = 0; i < kToyContentWords; ++i) toy.tgt_vocab.add("d" + std::to_string(i));
  for (int j = 0; j < kToyGrammarTargets; ++j) toy.tgt_vocab.add("h" + std::to_string(j));

  Rng rng(seed);
  auto draw_pair = [&](std::string& src_line, std::string& tgt_line) {
    const int len = 4 + static_cast<int>(rng.below(9));  // uniform 4..12
    const double grammar_fraction = rng.uniform(0.25, 0.65);
    src_line.clear();
    tgt_line.clear();
    for (int k = 0; k < len; ++k) {
      int idx;
      if (rng.next_unit() < grammar_fraction) {
        idx = kToyContentWords + static_cast<int>(rng.below(kToyGrammarWords));
      } else {
        idx = static_cast<int>(rng.below(kToyContentWords));
      }
      if (k) {
        src_line += ' ';
        tgt_line += ' ';
      }
      src_line += src_tokens[static_cast<size_t>(idx)];
      tgt_line += tgt_tokens[static_cast<size_t>(idx)];
    }
  };

  auto encode_line = [](const std::string& line, const Vocabulary& vocab) {
    return encode(tokenize(line), vocab);
  };

  for (int i = 0; i < n_train; ++i) {
    std::string s, t;
    draw_pair(s, t);
    toy.train_src_lines.push_back(s);
    toy.train_tgt_lines.push_back(t);
    toy.train.src.push_back(encode_line(s, toy.src_vocab));
    toy.train.tgt.push_back(encode_line(t, toy.tgt_vocab));
  }
  std::set<std::vector<int32_t>> test_targets;
  for (int i = 0; i < n_test; ++i) {
    std::string s, t;
    draw_pair(s, t);
    toy.test_src_lines.push_back(s);
    toy.test_tgt_lines.push_back(t);
    toy.test.src.push_back(encode_line(s, toy.src_vocab));
    toy.test.tgt.push_back(encode_line(t, toy.tgt_vocab));
    test_targets.insert(toy.test.tgt.back().ids);
  }
  while (static_cast<int>(toy.pool.size()) < n_pool) {
    std::string s, t;
    draw_pair(s, t);
    EncodedSentence enc = encode_line(t, toy.tgt_vocab);
    if (test_targets.count(enc.ids)) continue;  // noise must stay disjoint from test targets
    toy.pool_lines.push_back(t);
    toy.pool.push_back(std::move(enc));
  }
  return toy;
}

// Writes one sentence per line.
void write_lines(const std::vector<std::string>& lines, const std::string& path);

// Unique fresh directory under the system temp root; created, never cleaned.
std::string make_temp_dir(const std::string& tag);

}  // namespace bitext::testutil

#endif  // BITEXT_TESTUTIL_HPP
