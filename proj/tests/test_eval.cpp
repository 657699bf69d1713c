#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bitext/common.hpp"
#include "bitext/eval.hpp"
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

// n pairs of unique single-content sentences: src k = [k+2, k+3, k+4, k+5],
// tgt k = [k+100, k+101, k+102, k+103]
ParallelCorpus unique_corpus(int n) {
  ParallelCorpus c;
  for (int k = 0; k < n; ++k) {
    c.src.push_back(sent({k + 2, k + 3, k + 4, k + 5}));
    c.tgt.push_back(sent({k + 100, k + 101, k + 102, k + 103}));
  }
  return c;
}

std::vector<EncodedSentence> unique_pool(int n) {
  std::vector<EncodedSentence> pool;
  for (int k = 0; k < n; ++k) {
    pool.push_back(sent({k + 5000, k + 5001, k + 5002, k + 5003}));
  }
  return pool;
}

class RejectAllFilters : public PairScorer {
 public:
  explicit RejectAllFilters(const ParallelCorpus& reference) : oracle_(reference) {}
  double score(const EncodedSentence& s, const EncodedSentence& t) const override {
    return oracle_.score(s, t);
  }
  bool passes_filters(const EncodedSentence&, const EncodedSentence&) const override {
    return false;
  }

 private:
  OracleScorer oracle_;
};

ScoredPair sp(int s, int t, double score) { return ScoredPair{"", s, t, score}; }

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool points_equal(const PRPoint& a, const PRPoint& b) {
  return a.rho == b.rho && a.precision == b.precision && a.recall == b.recall && a.f1 == b.f1 &&
         a.extracted == b.extracted;
}

}  // namespace

TEST_CASE("precision and recall count set overlap") {
  SUBCASE("half right") {
    const PairSet predicted{{0, 0}, {1, 1}};
    const PairSet gold{{0, 0}, {2, 2}};
    const Metrics m = precision_recall_f1(predicted, gold);
    CHECK(m.precision == 0.5);
    CHECK(m.recall == 0.5);
    CHECK(m.f1 == 0.5);
  }
  SUBCASE("perfect") {
    const PairSet both{{0, 1}, {2, 3}, {4, 4}};
    const Metrics m = precision_recall_f1(both, both);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
  }
  SUBCASE("nothing predicted") {
    const Metrics m = precision_recall_f1({}, {{0, 0}});
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);
  }
  SUBCASE("empty gold is an error") {
    CHECK_THROWS_AS(precision_recall_f1({{0, 0}}, {}), Error);
  }
  SUBCASE("harmonic mean") {
    // 7221 of 8700 predictions right, out of a 10375-pair gold set:
    // precision 0.830 and recall 0.696 land exactly on those doubles
    PairSet predicted, gold;
    for (int i = 0; i < 7221; ++i) {
      predicted.insert({i, i});
      gold.insert({i, i});
    }
    for (int i = 7221; i < 8700; ++i) predicted.insert({i, i + 20000});
    for (int i = 7221; i < 10375; ++i) gold.insert({i, i});
    const Metrics m = precision_recall_f1(predicted, gold);
    CHECK(m.precision == 0.830);
    CHECK(m.recall == 0.696);
    const double p = 0.830;
    const double r = 0.696;
    CHECK(m.f1 == doctest::Approx(2.0 * p * r / (p + r)));
    CHECK(std::abs(m.f1 - 0.757) < 5e-4);
  }
}

TEST_CASE("metrics match a counting oracle on random sets") {
  Rng rng(4242);
  for (int inst = 0; inst < 300; ++inst) {
    PairSet predicted, gold;
    const int universe = 12;
    for (int i = 0; i < universe; ++i) {
      for (int j = 0; j < universe; ++j) {
        if (rng.next_unit() < 0.2) predicted.insert({i, j});
        if (rng.next_unit() < 0.2) gold.insert({i, j});
      }
    }
    if (gold.empty()) gold.insert({0, 0});

    size_t tp = 0;
    for (const auto& p : predicted) tp += gold.count(p);
    const Metrics m = precision_recall_f1(predicted, gold);

    if (predicted.empty()) {
      CHECK(m.precision == 0.0);
    } else {
      CHECK(m.precision == static_cast<double>(tp) / static_cast<double>(predicted.size()));
    }
    CHECK(m.recall == static_cast<double>(tp) / static_cast<double>(gold.size()));

    // f1 vanishes exactly when either component does, and the harmonic mean
    // sits between min and max
    if (m.precision == 0.0 || m.recall == 0.0) {
      CHECK(m.f1 == 0.0);
    } else {
      CHECK(m.f1 == doctest::Approx(2.0 * m.precision * m.recall / (m.precision + m.recall)));
      CHECK(m.f1 >= std::min(m.precision, m.recall) - 1e-12);
      CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-12);
    }
  }
}

TEST_CASE("pr_curve sweeps thresholds over the scored pairs") {
  SUBCASE("uniform scores cross one threshold") {
    std::vector<ScoredPair> scored;
    PairSet gold;
    for (int i = 0; i < 4; ++i) {
      scored.push_back(sp(i, i, 0.7));
      gold.insert({i, i});
    }
    const EvalReport report = pr_curve(scored, gold, {0.5, 0.9});
    REQUIRE(report.points.size() == 2);
    CHECK(report.points[0].rho == 0.5);
    CHECK(report.points[0].extracted == 4);
    CHECK(report.points[0].f1 == 1.0);
    CHECK(report.points[1].extracted == 0);
    CHECK(report.points[1].recall == 0.0);
    CHECK(report.points[1].f1 == 0.0);
    CHECK(report.best.rho == 0.5);
  }

  SUBCASE("greedy dedup inside the curve") {
    // the off-gold pair outscores a gold pair that shares its source
    const std::vector<ScoredPair> scored{sp(0, 1, 0.9), sp(0, 0, 0.8), sp(1, 1, 0.6)};
    const PairSet gold{{0, 0}, {1, 1}};
    const EvalReport greedy = pr_curve(scored, gold, {0.5});
    // greedy keeps (0,1) then (1,1) is blocked on target 1: only (0,1) left
    CHECK(greedy.points[0].extracted == 1);
    CHECK(greedy.points[0].recall == 0.0);

    const EvalReport raw = pr_curve(scored, gold, {0.5}, true);
    CHECK(raw.points[0].extracted == 3);
    CHECK(raw.points[0].recall == 1.0);
    CHECK(raw.points[0].precision == doctest::Approx(2.0 / 3.0));
  }

  SUBCASE("recall and extraction shrink as rho rises") {
    Rng rng(88);
    std::vector<ScoredPair> scored;
    PairSet gold;
    for (int i = 0; i < 30; ++i) {
      for (int j = 0; j < 30; ++j) {
        scored.push_back(sp(i, j, rng.next_unit()));
      }
      gold.insert({i, i});
    }
    const std::vector<double> thresholds{0.1, 0.3, 0.5, 0.7, 0.9, 0.99};
    for (bool pre_greedy : {false, true}) {
      const EvalReport report = pr_curve(scored, gold, thresholds, pre_greedy);
      for (size_t k = 1; k < report.points.size(); ++k) {
        CHECK(report.points[k].recall <= report.points[k - 1].recall);
        CHECK(report.points[k].extracted <= report.points[k - 1].extracted);
      }
    }
  }

  SUBCASE("threshold validation") {
    const std::vector<ScoredPair> scored{sp(0, 0, 0.5)};
    const PairSet gold{{0, 0}};
    CHECK_THROWS_AS(pr_curve(scored, gold, {}), std::invalid_argument);
    CHECK_THROWS_AS(pr_curve(scored, gold, {0.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(pr_curve(scored, gold, {0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(pr_curve(scored, gold, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(pr_curve(scored, gold, {0.7, 0.3}), std::invalid_argument);
  }
}

TEST_CASE("optimal threshold prefers the largest rho among ties") {
  EvalReport report;
  PRPoint p;
  p.rho = 0.3;
  p.f1 = 0.3;
  report.points.push_back(p);
  p.rho = 0.6;
  p.f1 = 0.7;
  report.points.push_back(p);
  p.rho = 0.9;
  p.f1 = 0.7;
  report.points.push_back(p);
  CHECK(optimal_f1_threshold(report).rho == 0.9);

  report.points.clear();
  p.rho = 0.4;
  p.f1 = 0.0;
  report.points.push_back(p);
  p.rho = 0.8;
  p.f1 = 0.0;
  report.points.push_back(p);
  CHECK(optimal_f1_threshold(report).rho == 0.8);

  report.points.resize(1);
  CHECK(optimal_f1_threshold(report).rho == 0.4);

  report.points.clear();
  CHECK_THROWS_AS(optimal_f1_threshold(report), Error);
}

TEST_CASE("noise_sweep corrupts targets and reports per-ratio curves") {
  const ParallelCorpus test = unique_corpus(20);
  const auto pool = unique_pool(30);
  const OracleScorer oracle(test);
  const std::vector<double> thresholds{0.2, 0.5, 0.8};

  SUBCASE("a perfect scorer stays at f1 1.0 under noise") {
    const auto reports = noise_sweep(oracle, test, {0.0, 0.5, 0.9}, pool, thresholds, 11);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].noise_ratio == 0.0);
    CHECK(reports[2].noise_ratio == 0.9);
    for (const auto& r : reports) {
      CHECK(r.best.f1 == 1.0);
      CHECK(r.best.precision == 1.0);
      CHECK(r.best.recall == 1.0);
    }
    // gold shrinks to the unreplaced pairs: round(0.9 * 20) = 18 replaced
    CHECK(reports[0].points[1].extracted == 20);
    CHECK(reports[1].points[1].extracted == 10);
    CHECK(reports[2].points[1].extracted == 2);
  }

  SUBCASE("deterministic given the seed") {
    const auto a = noise_sweep(oracle, test, {0.4, 0.7}, pool, thresholds, 99);
    const auto b = noise_sweep(oracle, test, {0.4, 0.7}, pool, thresholds, 99);
    REQUIRE(a.size() == b.size());
    for (size_t k = 0; k < a.size(); ++k) {
      REQUIRE(a[k].points.size() == b[k].points.size());
      CHECK(points_equal(a[k].best, b[k].best));
      for (size_t i = 0; i < a[k].points.size(); ++i) {
        CHECK(points_equal(a[k].points[i], b[k].points[i]));
      }
    }
  }

  SUBCASE("threaded sweep equals the serial one") {
    const auto serial = noise_sweep(oracle, test, {0.3, 0.6}, pool, thresholds, 7, 1);
    const auto threaded = noise_sweep(oracle, test, {0.3, 0.6}, pool, thresholds, 7, 4);
    REQUIRE(serial.size() == threaded.size());
    for (size_t k = 0; k < serial.size(); ++k) {
      for (size_t i = 0; i < serial[k].points.size(); ++i) {
        CHECK(points_equal(serial[k].points[i], threaded[k].points[i]));
      }
    }
  }

  SUBCASE("candidate filters can zero out every score") {
    const RejectAllFilters filtered(test);
    const auto off = noise_sweep(filtered, test, {0.0}, pool, thresholds, 5, 1, false, false);
    CHECK(off[0].best.f1 == 1.0);
    const auto on = noise_sweep(filtered, test, {0.0}, pool, thresholds, 5, 1, false, true);
    for (const auto& p : on[0].points) {
      CHECK(p.extracted == 0);
      CHECK(p.f1 == 0.0);
    }
  }

  SUBCASE("ratio validation") {
    CHECK_THROWS_AS(noise_sweep(oracle, test, {1.0}, pool, thresholds, 1), std::invalid_argument);
    CHECK_THROWS_AS(noise_sweep(oracle, test, {-0.1}, pool, thresholds, 1), std::invalid_argument);
  }
}

TEST_CASE("bleu matches hand-computed scores") {
  SUBCASE("identical corpora score exactly one") {
    const std::vector<std::vector<std::string>> corpus{words("the cat sat on the mat"),
                                                       words("a long enough sentence here")};
    CHECK(bleu(corpus, corpus) == 1.0);
  }

  SUBCASE("disjoint corpora score exactly zero") {
    const std::vector<std::vector<std::string>> cand{words("aa bb cc dd")};
    const std::vector<std::vector<std::string>> ref{words("ee ff gg hh")};
    CHECK(bleu(cand, ref) == 0.0);
  }

  SUBCASE("clipping caps repeated tokens") {
    const std::vector<std::vector<std::string>> cand{words("the the the")};
    const std::vector<std::vector<std::string>> ref{words("the cat")};
    // candidate is longer than the reference, so no brevity penalty
    CHECK(bleu(cand, ref, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    // no candidate 4-gram exists, so the full score collapses to zero
    CHECK(bleu(cand, ref, 4) == 0.0);
  }

  SUBCASE("brevity penalty") {
    const std::vector<std::vector<std::string>> cand{words("a b c d")};
    const std::vector<std::vector<std::string>> ref{words("a b c d e")};
    CHECK(bleu(cand, ref) == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
  }

  SUBCASE("corpus-level pooling") {
    const std::vector<std::vector<std::string>> cand{words("a b c d"), words("x y z w")};
    const std::vector<std::vector<std::string>> ref{words("a b c d"), words("x q z w")};
    // pooled precisions: 7/8 unigrams, 4/6 bigrams, 2/4 trigrams, 1/2 4-grams
    const double expected = std::pow((7.0 / 8.0) * (4.0 / 6.0) * (2.0 / 4.0) * (1.0 / 2.0), 0.25);
    CHECK(bleu(cand, ref) == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("sentence order does not matter") {
    const std::vector<std::vector<std::string>> cand{words("a b c d"), words("x y z w")};
    const std::vector<std::vector<std::string>> ref{words("a b c d"), words("x q z w")};
    const std::vector<std::vector<std::string>> cand_r{cand[1], cand[0]};
    const std::vector<std::vector<std::string>> ref_r{ref[1], ref[0]};
    CHECK(bleu(cand, ref) == bleu(cand_r, ref_r));
  }

  SUBCASE("validation") {
    const std::vector<std::vector<std::string>> one{words("a b")};
    const std::vector<std::vector<std::string>> two{words("a b"), words("c d")};
    CHECK_THROWS_AS(bleu({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(bleu(one, two), std::invalid_argument);
    CHECK_THROWS_AS(bleu(one, one, 0), std::invalid_argument);
  }
}

TEST_CASE("eval report renders a readable table") {
  EvalReport report;
  report.noise_ratio = 0.3;
  PRPoint p;
  p.rho = 0.5;
  p.precision = 1.0;
  p.recall = 0.25;
  p.f1 = 0.4;
  p.extracted = 5;
  report.points.push_back(p);
  report.best = p;

  std::ostringstream out;
  write_eval_report(report, out);
  const std::string text = out.str();
  CHECK(text.find("# noise_ratio 0.3\n") != std::string::npos);
  CHECK(text.find("# best rho 0.5 ") != std::string::npos);
  CHECK(text.find("rho precision recall f1 extracted\n") != std::string::npos);
  CHECK(text.find("0.5 1.000000 0.250000 0.400000 5\n") != std::string::npos);
}
