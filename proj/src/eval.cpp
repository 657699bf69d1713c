#include "bitext/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "bitext/common.hpp"

namespace bitext {

namespace {

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& body) {
  if (threads <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const size_t workers = std::min<size_t>(static_cast<size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

Metrics precision_recall_f1(const PairSet& predicted, const PairSet& gold) {
  if (gold.empty()) throw Error("precision_recall_f1: gold set is empty");
  size_t tp = 0;
  for (const auto& p : predicted) {
    if (gold.count(p)) ++tp;
  }
  Metrics m;
  m.precision = predicted.empty() ? 0.0
                                  : static_cast<double>(tp) / static_cast<double>(predicted.size());
  m.recall = static_cast<double>(tp) / static_cast<double>(gold.size());
  m.f1 = (m.precision + m.recall > 0.0)
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

EvalReport pr_curve(const std::vector<ScoredPair>& scored, const PairSet& gold,
                    const std::vector<double>& thresholds, bool pre_greedy) {
  if (thresholds.empty()) throw std::invalid_argument("pr_curve: no thresholds");
  for (size_t i = 0; i < thresholds.size(); ++i) {
    const double t = thresholds[i];
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("pr_curve: threshold outside (0,1)");
    if (i > 0 && !(t > thresholds[i - 1])) {
      throw std::invalid_argument("pr_curve: thresholds not strictly ascending");
    }
  }

  EvalReport report;
  report.points.reserve(thresholds.size());
  for (double rho : thresholds) {
    std::vector<ScoredPair> kept;
    for (const auto& p : scored) {
      if (p.score >= rho) kept.push_back(p);
    }
    if (!pre_greedy) kept = greedy_one_to_one(kept);

    PairSet predicted;
    for (const auto& p : kept) predicted.emplace(p.src_idx, p.tgt_idx);
    const Metrics m = precision_recall_f1(predicted, gold);

    PRPoint point;
    point.rho = rho;
    point.precision = m.precision;
    point.recall = m.recall;
    point.f1 = m.f1;
    point.extracted = kept.size();
    report.points.push_back(point);
  }
  report.best = optimal_f1_threshold(report);
  return report;
}

PRPoint optimal_f1_threshold(const EvalReport& report) {
  if (report.points.empty()) throw Error("optimal_f1_threshold: empty report");
  PRPoint best = report.points.front();
  for (const auto& p : report.points) {
    if (p.f1 >= best.f1) best = p;  // points ascend in rho, so ties land on the larger rho
  }
  return best;
}

std::vector<EvalReport> noise_sweep(const PairScorer& scorer, const ParallelCorpus& test,
                                    const std::vector<double>& ratios,
                                    const std::vector<EncodedSentence>& pool,
                                    const std::vector<double>& thresholds, uint64_t seed,
                                    int threads, bool pre_greedy, bool apply_filters) {
  for (double r : ratios) {
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("noise_sweep: ratio outside [0,1)");
  }

  std::vector<EvalReport> reports;
  reports.reserve(ratios.size());
  for (size_t k = 0; k < ratios.size(); ++k) {
    const NoisyTestSet noisy =
        inject_noise(test, ratios[k], pool, mix_seed(seed, static_cast<uint64_t>(k)));
    const size_t n_src = noisy.src.size();
    const size_t n_tgt = noisy.tgt.size();

    std::vector<ScoredPair> scored(n_src * n_tgt);
    parallel_for(n_src * n_tgt, threads, [&](size_t flat) {
      const size_t i = flat / n_tgt;
      const size_t j = flat % n_tgt;
      ScoredPair& out = scored[flat];
      out.src_idx = static_cast<int>(i);
      out.tgt_idx = static_cast<int>(j);
      out.score = (apply_filters && !scorer.passes_filters(noisy.src[i], noisy.tgt[j]))
                      ? 0.0
                      : scorer.score(noisy.src[i], noisy.tgt[j]);
    });

    PairSet gold(noisy.gold.begin(), noisy.gold.end());
    EvalReport report = pr_curve(scored, gold, thresholds, pre_greedy);
    report.noise_ratio = ratios[k];
    reports.push_back(std::move(report));
  }
  return reports;
}

double bleu(const std::vector<std::vector<std::string>>& candidates,
            const std::vector<std::vector<std::string>>& references, int max_n) {
  if (candidates.empty()) throw std::invalid_argument("bleu: empty corpus");
  if (candidates.size() != references.size()) {
    throw std::invalid_argument("bleu: candidate/reference count mismatch");
  }
  if (max_n < 1) throw std::invalid_argument("bleu: max_n must be positive");

  auto ngram_counts = [](const std::vector<std::string>& tokens, int n) {
    std::map<std::string, long long> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (size_t i = 0; i + static_cast<size_t>(n) <= tokens.size(); ++i) {
      std::string key = tokens[i];
      for (int k = 1; k < n; ++k) {
        key.push_back('\x1f');
        key += tokens[i + static_cast<size_t>(k)];
      }
      ++counts[key];
    }
    return counts;
  };

  long long cand_len = 0;
  long long ref_len = 0;
  std::vector<long long> matched(static_cast<size_t>(max_n), 0);
  std::vector<long long> total(static_cast<size_t>(max_n), 0);

  for (size_t s = 0; s < candidates.size(); ++s) {
    const auto& cand = candidates[s];
    const auto& ref = references[s];
    cand_len += static_cast<long long>(cand.size());
    ref_len += static_cast<long long>(ref.size());
    for (int n = 1; n <= max_n; ++n) {
      const auto cand_counts = ngram_counts(cand, n);
      const auto ref_counts = ngram_counts(ref, n);
      for (const auto& [key, count] : cand_counts) {
        total[static_cast<size_t>(n - 1)] += count;
        auto it = ref_counts.find(key);
        if (it != ref_counts.end()) {
          matched[static_cast<size_t>(n - 1)] += std::min(count, it->second);
        }
      }
    }
  }

  if (cand_len == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < max_n; ++n) {
    if (total[static_cast<size_t>(n)] == 0 || matched[static_cast<size_t>(n)] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched[static_cast<size_t>(n)]) /
                        static_cast<double>(total[static_cast<size_t>(n)]));
  }
  const double bp = cand_len > ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  return bp * std::exp(log_sum / static_cast<double>(max_n));
}

void write_eval_report(const EvalReport& report, std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "# noise_ratio %g\n", report.noise_ratio);
  out << buf;
  std::snprintf(buf, sizeof(buf), "# best rho %g precision %.6f recall %.6f f1 %.6f extracted %zu\n",
                report.best.rho, report.best.precision, report.best.recall, report.best.f1,
                report.best.extracted);
  out << buf;
  out << "rho precision recall f1 extracted\n";
  for (const auto& p : report.points) {
    std::snprintf(buf, sizeof(buf), "%g %.6f %.6f %.6f %zu\n", p.rho, p.precision, p.recall, p.f1,
                  p.extracted);
    out << buf;
  }
}

}  // namespace bitext
