#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitext/baseline.hpp"
#include "bitext/common.hpp"
#include "bitext/corpus.hpp"
#include "bitext/nn.hpp"
#include "doctest.h"
#include "testutil.hpp"

using namespace bitext;
using namespace bitext::testutil;

namespace {

EncodedSentence sent(std::vector<int32_t> ids) {
  EncodedSentence s;
  s.length = static_cast<int32_t>(ids.size());
  s.ids = std::move(ids);
  return s;
}

ParallelCorpus lines_corpus(const std::vector<std::string>& src_lines,
                            const std::vector<std::string>& tgt_lines, Vocabulary& src_vocab,
                            Vocabulary& tgt_vocab) {
  std::vector<std::vector<std::string>> src_tok, tgt_tok;
  for (const auto& l : src_lines) src_tok.push_back(tokenize(l));
  for (const auto& l : tgt_lines) tgt_tok.push_back(tokenize(l));
  src_vocab = build_vocab(src_tok);
  tgt_vocab = build_vocab(tgt_tok);
  ParallelCorpus c;
  for (size_t i = 0; i < src_tok.size(); ++i) {
    c.src.push_back(encode(src_tok[i], src_vocab));
    c.tgt.push_back(encode(tgt_tok[i], tgt_vocab));
  }
  return c;
}

void check_rows_normalized(const TTable& t, double tol = 1e-6) {
  for (const auto& [src, row] : t.rows()) {
    double sum = 0.0;
    for (const auto& [tgt, p] : row) {
      CHECK(p >= 1e-6);  // pruning floor
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(tol));
  }
}

ParallelCorpus toy_corpus(int n, uint64_t seed) {
  const auto toy = make_toy_language(n, 2, 4, seed);
  ParallelCorpus c;
  for (int i = 0; i < n; ++i) {
    c.src.push_back(toy.train.src[static_cast<size_t>(i)]);
    c.tgt.push_back(toy.train.tgt[static_cast<size_t>(i)]);
  }
  return c;
}

}  // namespace

TEST_CASE("ttable normalize_and_prune") {
  TTable t;
  t.set(1, 1, 3.0);
  t.set(1, 2, 1.0);
  t.set(2, 1, 5.0);
  t.set(3, 1, 0.0);       // zero row disappears
  t.set(4, 1, 1.0);
  t.set(4, 2, 1e-9);      // below the floor after normalization
  t.normalize_and_prune();
  CHECK(t.prob(1, 1) == doctest::Approx(0.75));
  CHECK(t.prob(1, 2) == doctest::Approx(0.25));
  CHECK(t.prob(2, 1) == doctest::Approx(1.0));
  CHECK(t.rows().count(3) == 0);
  CHECK(t.prob(4, 2) == 0.0);
  CHECK(t.prob(4, 1) == doctest::Approx(1.0));  // survivors renormalized
  check_rows_normalized(t, 1e-12);
}

TEST_CASE("atable defaults to uniform and normalizes slices") {
  ATable a;
  CHECK(a.prob(0, 2, 3, 5) == doctest::Approx(0.25));
  CHECK(a.prob(3, 2, 3, 5) == doctest::Approx(0.25));
  auto& slice = a.slice(1, 2, 2);
  REQUIRE(slice.size() == 3);
  slice = {1.0, 2.0, 1.0};
  a.normalize();
  CHECK(a.prob(0, 1, 2, 2) == doctest::Approx(0.25));
  CHECK(a.prob(1, 1, 2, 2) == doctest::Approx(0.5));
  CHECK(a.prob(-1, 1, 2, 2) == 0.0);
  CHECK(a.prob(3, 1, 2, 2) == 0.0);
}

TEST_CASE("ibm1 concentrates on the co-occurrence structure") {
  Vocabulary sv, tv;
  const auto corpus =
      lines_corpus({"the house", "the flower"}, {"la maison", "la fleur"}, sv, tv);
  const auto t = train_ibm1(corpus, 20);

  const int32_t the = sv.lookup("the"), house = sv.lookup("house");
  const int32_t la = tv.lookup("la"), maison = tv.lookup("maison");

  // "la" is the most likely translation of "the"
  double best = 0.0;
  int32_t best_tgt = -1;
  for (const auto& [tgt, p] : t.rows().at(the)) {
    if (p > best) {
      best = p;
      best_tgt = tgt;
    }
  }
  CHECK(best_tgt == la);
  CHECK(t.prob(the, la) > 0.5);
  CHECK(t.prob(house, maison) > 0.9);
  check_rows_normalized(t);
}

TEST_CASE("ibm1 on a single one-token pair is exact") {
  ParallelCorpus c;
  c.src.push_back(sent({2}));
  c.tgt.push_back(sent({3}));
  const auto t = train_ibm1(c, 1);
  CHECK(t.prob(2, 3) == 1.0);
  CHECK(t.entry_count() == 1);
}

TEST_CASE("ibm1 log-likelihood never decreases") {
  const auto corpus = toy_corpus(120, 31);
  std::vector<double> ll;
  const auto t = train_ibm1(corpus, 10, &ll);
  REQUIRE(ll.size() == 10);
  for (size_t i = 1; i < ll.size(); ++i) {
    CHECK(ll[i] >= ll[i - 1] - 1e-9);
  }
  check_rows_normalized(t);
}

TEST_CASE("ibm1 validates its inputs") {
  CHECK_THROWS_AS(train_ibm1(ParallelCorpus{}, 5), std::invalid_argument);
  ParallelCorpus c;
  c.src.push_back(sent({2}));
  c.tgt.push_back(sent({3}));
  CHECK_THROWS_AS(train_ibm1(c, 0), std::invalid_argument);
  ParallelCorpus bad = c;
  bad.src.push_back(EncodedSentence{});
  bad.tgt.push_back(sent({3}));
  CHECK_THROWS_AS(train_ibm1(bad, 1), std::invalid_argument);
}

TEST_CASE("ibm2 with zero iterations returns the initializer untouched") {
  const auto corpus = toy_corpus(30, 5);
  const auto init = train_ibm1(corpus, 3);
  const auto [t, a] = train_ibm2(corpus, 0, init);
  CHECK(a.empty());
  CHECK(a.prob(1, 0, 3, 3) == doctest::Approx(0.25));
  CHECK(t.entry_count() == init.entry_count());
  for (const auto& [src, row] : init.rows()) {
    for (const auto& [tgt, p] : row) CHECK(t.prob(src, tgt) == p);
  }
}

TEST_CASE("ibm2 learns the identity permutation") {
  // target sequence equals the source sequence, so position j aligns to j;
  // ids are distinct within a sentence, leaving no word-level ambiguity
  Rng rng(77);
  ParallelCorpus c;
  for (int k = 0; k < 40; ++k) {
    const int len = 2 + static_cast<int>(rng.below(3));
    std::vector<size_t> order(12);
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<int32_t> ids;
    for (int i = 0; i < len; ++i) ids.push_back(static_cast<int32_t>(2 + order[static_cast<size_t>(i)]));
    c.src.push_back(sent(ids));
    c.tgt.push_back(sent(ids));
  }
  const auto init = train_ibm1(c, 5);
  const auto [t, a] = train_ibm2(c, 5, init);
  for (const auto& [key, slice] : a.slices()) {
    // argmax over alignment positions points at the diagonal
    size_t best = 0;
    for (size_t i = 1; i < slice.size(); ++i) {
      if (slice[i] > slice[best]) best = i;
    }
    CHECK(best == static_cast<size_t>(key.j + 1));
    double sum = 0.0;
    for (double p : slice) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
  check_rows_normalized(t);
}

TEST_CASE("ibm2 log-likelihood never decreases") {
  const auto corpus = toy_corpus(120, 32);
  const auto init = train_ibm1(corpus, 5);
  std::vector<double> ll;
  train_ibm2(corpus, 10, init, &ll);
  REQUIRE(ll.size() == 10);
  for (size_t i = 1; i < ll.size(); ++i) {
    CHECK(ll[i] >= ll[i - 1] - 1e-9);
  }
}

TEST_CASE("viterbi alignment") {
  SUBCASE("diagonal table aligns monotonically") {
    TTable t;
    for (int32_t w = 2; w <= 5; ++w) {
      t.set(w, w, 0.9);
      t.set(w, w == 5 ? 2 : w + 1, 0.1);
    }
    const ATable a;
    const auto s = sent({2, 3, 4, 5});
    const auto links = viterbi_align(t, a, s, s);
    REQUIRE(links.size() == 4);
    for (int j = 0; j < 4; ++j) {
      CHECK(links[static_cast<size_t>(j)].src == j);
      CHECK(links[static_cast<size_t>(j)].tgt == j);
    }
  }

  SUBCASE("unseen target tokens fall to the empty word") {
    TTable t;
    t.set(2, 2, 1.0);
    const ATable a;
    const auto links = viterbi_align(t, a, sent({2}), sent({9}));
    REQUIRE(links.size() == 1);
    CHECK(links[0].src == -1);
    CHECK(links[0].tgt == 0);
  }

  SUBCASE("single token with unit probability links (0,0)") {
    TTable t;
    t.set(2, 3, 1.0);
    const ATable a;
    const auto links = viterbi_align(t, a, sent({2}), sent({3}));
    REQUIRE(links.size() == 1);
    CHECK(links[0].src == 0);
    CHECK(links[0].tgt == 0);
  }

  SUBCASE("exact ties keep the earlier candidate") {
    TTable t;
    t.set(kNullWordId, 7, 0.5);
    t.set(2, 7, 0.5);
    t.set(3, 7, 0.5);
    const ATable a;  // uniform, so scores tie exactly
    const auto links = viterbi_align(t, a, sent({2, 3}), sent({7}));
    REQUIRE(links.size() == 1);
    CHECK(links[0].src == -1);  // the empty word wins the tie

    TTable t2;
    t2.set(2, 7, 0.5);
    t2.set(3, 7, 0.5);
    const auto links2 = viterbi_align(t2, a, sent({2, 3}), sent({7}));
    CHECK(links2[0].src == 0);  // smaller source index wins among equals
  }

  SUBCASE("empty sentences are rejected") {
    TTable t;
    const ATable a;
    CHECK_THROWS_AS(viterbi_align(t, a, EncodedSentence{}, sent({2})), std::invalid_argument);
  }
}

TEST_CASE("dictionary inference keeps entries strictly above threshold") {
  TTable t;
  t.set(2, 10, 0.6);
  t.set(2, 11, 0.05);
  t.set(3, 10, 0.1);              // boundary stays out
  t.set(kNullWordId, 10, 0.99);   // the empty word never enters
  const auto d = infer_dictionary(t, 0.1);
  REQUIRE(d.count(2) == 1);
  CHECK(d.at(2) == std::set<int32_t>{10});
  CHECK(d.count(3) == 0);
  CHECK(d.count(kNullWordId) == 0);
  CHECK(infer_dictionary(TTable{}).empty());
}

TEST_CASE("length ratio filter") {
  CHECK(length_ratio_filter(10, 20));
  CHECK_FALSE(length_ratio_filter(10, 21));
  CHECK(length_ratio_filter(21, 11));
  CHECK(length_ratio_filter(5, 5));
  CHECK(length_ratio_filter(1, 2));
  CHECK_FALSE(length_ratio_filter(0, 5));
  CHECK_FALSE(length_ratio_filter(5, -1));
  CHECK(length_ratio_filter(sent({2, 2, 2, 2}), sent({3, 3})));
  CHECK_FALSE(length_ratio_filter(sent({2, 2, 2, 2, 2}), sent({3, 3})));
}

TEST_CASE("word overlap filter needs half of each side covered") {
  DictionaryPair dicts;
  dicts.fwd[2] = {20};
  dicts.fwd[3] = {21};
  dicts.rev[20] = {2};
  dicts.rev[21] = {3};

  // both sides exactly 50% covered: passes
  CHECK(word_overlap_filter(sent({2, 9}), sent({20, 90}), dicts));
  // target side at 40%: fails
  CHECK_FALSE(word_overlap_filter(sent({2, 3}), sent({20, 21, 90, 91, 92}), dicts));
  // coverage counts occurrences, not types
  CHECK(word_overlap_filter(sent({2, 2, 9}), sent({20, 20}), dicts));
  // no dictionary: nothing is covered
  CHECK_FALSE(word_overlap_filter(sent({2}), sent({20}), DictionaryPair{}));
  // empty sentences never pass
  CHECK_FALSE(word_overlap_filter(EncodedSentence{}, sent({20}), dicts));
}

TEST_CASE("feature vector layout") {
  REQUIRE(feature_names().size() == kFeatureCount);
  CHECK(feature_names()[0] == "src_len");
  CHECK(feature_names()[6] == "fwd_connected");
  CHECK(feature_names()[18] == "rev_connected");
  CHECK(feature_names()[30] == "alignment_logprob_diff");
}

TEST_CASE("length features for a 3 x 2 pair") {
  const auto src = sent({2, 3, 4});
  const auto tgt = sent({2, 3});
  const AlignmentLinks links_fwd{{-1, 0}, {-1, 1}};
  const AlignmentLinks links_rev{{-1, 0}, {-1, 1}, {-1, 2}};
  const auto fv = extract_features(src, tgt, links_fwd, links_rev, TTable{}, TTable{}, ATable{},
                                   ATable{}, DictionaryPair{});
  CHECK(fv[0] == 3.0);
  CHECK(fv[1] == 2.0);
  CHECK(fv[2] == 1.0);
  CHECK(fv[3] == 1.5);
  CHECK(fv[4] == 0.0);
  CHECK(fv[5] == 0.0);
}

TEST_CASE("fully linked monotone pair maxes the connectivity block") {
  const auto src = sent({2, 3, 4, 5});
  const auto tgt = sent({2, 3, 4, 5});
  AlignmentLinks diag;
  for (int j = 0; j < 4; ++j) diag.push_back({j, j});
  const auto fv = extract_features(src, tgt, diag, diag, TTable{}, TTable{}, ATable{}, ATable{},
                                   DictionaryPair{});
  // forward block
  CHECK(fv[6] == 4.0);    // connected
  CHECK(fv[7] == 1.0);
  CHECK(fv[8] == 0.0);    // unconnected
  CHECK(fv[9] == 0.0);
  CHECK(fv[10] == 1.0);   // top fertilities are all one
  CHECK(fv[11] == 1.0);
  CHECK(fv[12] == 1.0);
  CHECK(fv[13] == 1.0);   // every word has fertility exactly one
  CHECK(fv[14] == 0.0);
  CHECK(fv[15] == 0.0);
  CHECK(fv[16] == 4.0);   // longest connected run spans the sentence
  CHECK(fv[17] == 0.0);
  // reverse block mirrors it
  for (int i = 0; i < 12; ++i) CHECK(fv[18 + i] == fv[6 + i]);
}

TEST_CASE("hand-built 3 x 3 pair matches the feature oracle") {
  // s3 and t3 stay unaligned; s1<->t1, s2<->t2 in both directions
  const auto src = sent({2, 3, 4});
  const auto tgt = sent({2, 3, 4});
  const AlignmentLinks links{{0, 0}, {1, 1}, {-1, 2}};

  TTable t_fwd;
  t_fwd.set(2, 2, 0.5);
  t_fwd.set(3, 3, 0.25);
  TTable t_rev;
  t_rev.set(2, 2, 0.8);
  t_rev.set(3, 3, 0.1);
  DictionaryPair dicts;
  dicts.fwd[2] = {2};
  dicts.fwd[3] = {3};
  dicts.rev[2] = {2};
  dicts.rev[3] = {3};

  const auto fv = extract_features(src, tgt, links, links, t_fwd, t_rev, ATable{}, ATable{}, dicts);

  CHECK(fv[0] == 3.0);
  CHECK(fv[1] == 3.0);
  CHECK(fv[2] == 0.0);
  CHECK(fv[3] == 1.0);
  CHECK(fv[4] == doctest::Approx(2.0 / 3.0));
  CHECK(fv[5] == doctest::Approx(2.0 / 3.0));
  for (int base : {6, 18}) {
    CHECK(fv[base + 0] == 2.0);                          // connected
    CHECK(fv[base + 1] == doctest::Approx(2.0 / 3.0));   // share connected
    CHECK(fv[base + 2] == 1.0);                          // unconnected
    CHECK(fv[base + 3] == doctest::Approx(1.0 / 3.0));
    CHECK(fv[base + 4] == 1.0);                          // fertility top-3: 1, 1, 0
    CHECK(fv[base + 5] == 1.0);
    CHECK(fv[base + 6] == 0.0);
    CHECK(fv[base + 7] == doctest::Approx(2.0 / 3.0));   // fertility-one share
    CHECK(fv[base + 8] == 0.0);
    CHECK(fv[base + 9] == 0.0);
    CHECK(fv[base + 10] == 2.0);                         // runs
    CHECK(fv[base + 11] == 1.0);
  }
  // alignment log-probability difference, uniform a = 1/4 everywhere,
  // unaligned tokens priced at the 1e-10 floor
  const double lp_fwd =
      std::log(0.5 * 0.25) + std::log(0.25 * 0.25) + std::log(1e-10 * 0.25);
  const double lp_rev =
      std::log(0.8 * 0.25) + std::log(0.1 * 0.25) + std::log(1e-10 * 0.25);
  CHECK(fv[30] == doctest::Approx(lp_fwd - lp_rev).epsilon(1e-12));
}

TEST_CASE("extract_features validates the link inventory") {
  const auto src = sent({2, 3});
  const auto tgt = sent({2});
  const AlignmentLinks ok_fwd{{0, 0}};
  const AlignmentLinks ok_rev{{0, 0}, {-1, 1}};
  CHECK_NOTHROW(extract_features(src, tgt, ok_fwd, ok_rev, TTable{}, TTable{}, ATable{}, ATable{},
                                 DictionaryPair{}));
  CHECK_THROWS(extract_features(src, tgt, ok_rev, ok_rev, TTable{}, TTable{}, ATable{}, ATable{},
                                DictionaryPair{}));
  CHECK_THROWS_AS(extract_features(EncodedSentence{}, tgt, ok_fwd, ok_rev, TTable{}, TTable{},
                                   ATable{}, ATable{}, DictionaryPair{}),
                  std::invalid_argument);
}

namespace {

std::vector<std::pair<FeatureVector, int>> one_feature_examples(
    const std::vector<std::pair<double, int>>& rows) {
  std::vector<std::pair<FeatureVector, int>> out;
  for (const auto& [x, y] : rows) {
    FeatureVector fv{};
    fv[0] = x;
    out.push_back({fv, y});
  }
  return out;
}

}  // namespace

TEST_CASE("maxent separates a separable toy set") {
  std::vector<std::pair<double, int>> rows;
  for (int i = 0; i < 50; ++i) rows.push_back({1.0 + 0.01 * i, 1});
  for (int i = 0; i < 50; ++i) rows.push_back({-1.0 - 0.01 * i, 0});
  const auto examples = one_feature_examples(rows);
  const auto m = train_maxent(examples, 2e-4, 200, 1.0, 1);
  int correct = 0;
  for (const auto& [fv, y] : examples) {
    const double p = score_maxent(m, fv);
    correct += (p >= 0.5 ? 1 : 0) == y;
  }
  CHECK(correct == 100);
}

TEST_CASE("maxent with all-zero features predicts the class prior") {
  SUBCASE("balanced classes sit at one half") {
    std::vector<std::pair<double, int>> rows;
    for (int i = 0; i < 30; ++i) rows.push_back({0.0, 1});
    for (int i = 0; i < 30; ++i) rows.push_back({0.0, 0});
    const auto m = train_maxent(one_feature_examples(rows), 2e-4, 200, 1.0, 1);
    FeatureVector probe{};
    CHECK(score_maxent(m, probe) == doctest::Approx(0.5).epsilon(1e-9));
  }

  SUBCASE("two-to-one prior shows up in the bias") {
    std::vector<std::pair<double, int>> rows;
    for (int i = 0; i < 40; ++i) rows.push_back({0.0, 1});
    for (int i = 0; i < 20; ++i) rows.push_back({0.0, 0});
    // higher lr and epoch count so the bias actually reaches its optimum
    const auto m = train_maxent(one_feature_examples(rows), 0.02, 2000, 2.0, 1);
    FeatureVector probe{};
    CHECK(score_maxent(m, probe) == doctest::Approx(2.0 / 3.0).epsilon(0.05));
  }
}

TEST_CASE("duplicating the training set moves the boundary less than 1e-3") {
  // noisy, non-separable labels keep the optimum finite; 60 rows so both the
  // set and its duplicate fit in a single gradient batch
  Rng rng(5);
  std::vector<std::pair<double, int>> rows;
  int positives = 0;
  for (int i = 0; i < 60; ++i) {
    const double x = -2.0 + 4.0 * i / 59.0;
    const int y = rng.next_unit() < sigmoid(3.0 * x) ? 1 : 0;
    positives += y;
    rows.push_back({x, y});
  }
  REQUIRE(positives >= 5);
  REQUIRE(positives <= 55);
  const auto examples = one_feature_examples(rows);
  auto doubled = examples;
  doubled.insert(doubled.end(), examples.begin(), examples.end());

  const auto a = train_maxent(examples, 0.05, 400, 10.0, 1);
  const auto b = train_maxent(doubled, 0.05, 400, 10.0, 1);
  // zero crossing of the logit in raw feature units
  const auto boundary = [](const MaxentModel& m) {
    return m.mean[0] - m.stdev[0] * m.b / m.w[0];
  };
  CHECK(std::abs(boundary(a) - boundary(b)) < 1e-3);
}

TEST_CASE("maxent rejects degenerate inputs") {
  std::vector<std::pair<double, int>> pos_only;
  for (int i = 0; i < 10; ++i) pos_only.push_back({1.0, 1});
  CHECK_THROWS_AS(train_maxent(one_feature_examples(pos_only)), Error);
  std::vector<std::pair<double, int>> bad{{0.0, 1}, {1.0, 2}};
  CHECK_THROWS_AS(train_maxent(one_feature_examples(bad)), std::invalid_argument);
  std::vector<std::pair<double, int>> ok{{0.0, 1}, {1.0, 0}};
  CHECK_THROWS_AS(train_maxent(one_feature_examples(ok), 2e-4, 0), std::invalid_argument);
}

TEST_CASE("maxent negative subsampling is seeded") {
  std::vector<std::pair<double, int>> rows;
  Rng rng(9);
  for (int i = 0; i < 20; ++i) rows.push_back({rng.uniform(0.5, 2.0), 1});
  for (int i = 0; i < 200; ++i) rows.push_back({rng.uniform(-2.0, -0.5), 0});
  const auto examples = one_feature_examples(rows);
  const auto a = train_maxent(examples, 2e-4, 50, 1.0, 3);
  const auto b = train_maxent(examples, 2e-4, 50, 1.0, 3);
  CHECK(a.w[0] == b.w[0]);
  CHECK(a.b == b.b);
  // standardization reflects the subsampled set: roughly 20 + 20 examples
  CHECK(a.mean[0] > -0.6);
}

TEST_CASE("score_maxent") {
  MaxentModel m;
  m.w.assign(kFeatureCount, 0.0);
  m.mean.assign(kFeatureCount, 0.0);
  m.stdev.assign(kFeatureCount, 1.0);
  FeatureVector fv{};

  SUBCASE("zero model scores one half") { CHECK(score_maxent(m, fv) == doctest::Approx(0.5)); }

  SUBCASE("monotone in a positively weighted feature") {
    m.w[0] = 1.0;
    double prev = 0.0;
    for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      fv[0] = x;
      const double p = score_maxent(m, fv);
      CHECK(p > prev);
      prev = p;
    }
  }

  SUBCASE("matches the standardized logistic form") {
    m.w[0] = 0.7;
    m.w[5] = -1.2;
    m.b = 0.3;
    m.mean[0] = 2.0;
    m.stdev[0] = 4.0;
    fv[0] = 3.0;
    fv[5] = 0.5;
    const double logit = 0.7 * (3.0 - 2.0) / 4.0 + (-1.2) * 0.5 + 0.3;
    CHECK(score_maxent(m, fv) == doctest::Approx(sigmoid(logit)).epsilon(1e-12));
  }
}

TEST_CASE("alignment tables round-trip through their text formats") {
  const std::filesystem::path dir = make_temp_dir("tables");
  Vocabulary sv, tv;
  const auto corpus =
      lines_corpus({"the house", "the flower"}, {"la maison", "la fleur"}, sv, tv);
  const auto init = train_ibm1(corpus, 5);
  const auto [t, a] = train_ibm2(corpus, 5, init);

  const std::string tpath = (dir / "t.tsv").string();
  save_ttable(t, sv, tv, tpath);
  const auto t2 = load_ttable(tpath, sv, tv);
  CHECK(t2.entry_count() == t.entry_count());
  for (const auto& [src, row] : t.rows()) {
    for (const auto& [tgt, p] : row) CHECK(t2.prob(src, tgt) == p);  // exact round trip
  }

  const std::string apath = (dir / "a.tsv").string();
  save_atable(a, apath);
  const auto a2 = load_atable(apath);
  REQUIRE(a2.slices().size() == a.slices().size());
  for (const auto& [key, slice] : a.slices()) {
    for (size_t i = 0; i < slice.size(); ++i) {
      CHECK(a2.prob(static_cast<int>(i), key.j, key.l, key.m) == slice[i]);
    }
  }

  const auto dict = infer_dictionary(t, 0.1);
  const std::string dpath = (dir / "d.tsv").string();
  save_dictionary(dict, sv, tv, dpath);
  CHECK(load_dictionary(dpath, sv, tv) == dict);

  CHECK_THROWS_AS(load_ttable((dir / "absent.tsv").string(), sv, tv), UsageError);
  std::filesystem::remove_all(dir);
}
