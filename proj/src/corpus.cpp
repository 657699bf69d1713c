#include "bitext/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bitext {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (unsigned char c : text) {
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
    } else if (c < 0x80) {
      current += static_cast<char>(std::tolower(c));
    } else {
      current += static_cast<char>(c);
    }
  }
  flush();
  return tokens;
}

Vocabulary::Vocabulary() {
  tokens_ = {kPadToken, kUnkToken};
  index_ = {{kPadToken, kPadId}, {kUnkToken, kUnkId}};
}

int32_t Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, size());
  if (!inserted) throw Error("Vocabulary::add: duplicate token '" + token + "'");
  tokens_.push_back(token);
  return it->second;
}

int32_t Vocabulary::lookup(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  return index_.count(token) > 0;
}

const std::string& Vocabulary::token(int32_t id) const {
  if (id < 0 || id >= size()) throw Error("Vocabulary::token: index out of range");
  return tokens_[static_cast<size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write vocabulary file: " + path);
  for (size_t i = 2; i < tokens_.size(); ++i) out << tokens_[i] << "\n";
  if (!out.good()) throw Error("write failure on vocabulary file: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open vocabulary file: " + path);
  Vocabulary vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw UsageError("empty token in vocabulary file: " + path);
    vocab.add(line);
  }
  return vocab;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sentences,
                       size_t max_size) {
  if (sentences.empty()) throw std::invalid_argument("build_vocab: no sentences");
  std::unordered_map<std::string, int64_t> freq;
  for (const auto& sent : sentences) {
    for (const auto& tok : sent) ++freq[tok];
  }
  std::vector<std::pair<std::string, int64_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (max_size > 0 && ranked.size() > max_size) ranked.resize(max_size);
  Vocabulary vocab;
  for (const auto& [token, count] : ranked) vocab.add(token);
  return vocab;
}

std::optional<EncodedSentence> try_encode(const std::vector<std::string>& tokens,
                                          const Vocabulary& vocab) {
  if (tokens.empty() || tokens.size() > kMaxSentenceTokens) return std::nullopt;
  EncodedSentence sent;
  sent.ids.reserve(tokens.size());
  for (const auto& tok : tokens) sent.ids.push_back(vocab.lookup(tok));
  sent.length = static_cast<int32_t>(tokens.size());
  return sent;
}

EncodedSentence encode(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  auto sent = try_encode(tokens, vocab);
  if (!sent) {
    if (tokens.empty()) throw Error("encode: empty sentence");
    throw Error("encode: sentence exceeds " + std::to_string(kMaxSentenceTokens) + " tokens");
  }
  return *sent;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

ParallelCorpus load_parallel(const std::string& src_path, const std::string& tgt_path,
                             const Vocabulary& src_vocab, const Vocabulary& tgt_vocab,
                             LoadStats* stats) {
  const auto src_lines = read_lines(src_path);
  const auto tgt_lines = read_lines(tgt_path);
  if (src_lines.size() != tgt_lines.size()) {
    throw UsageError("line count mismatch: " + src_path + " has " +
                     std::to_string(src_lines.size()) + " lines, " + tgt_path + " has " +
                     std::to_string(tgt_lines.size()));
  }
  ParallelCorpus corpus;
  LoadStats local;
  local.lines = src_lines.size();
  for (size_t i = 0; i < src_lines.size(); ++i) {
    auto s = try_encode(tokenize(src_lines[i]), src_vocab);
    auto t = try_encode(tokenize(tgt_lines[i]), tgt_vocab);
    if (s && t) {
      corpus.src.push_back(std::move(*s));
      corpus.tgt.push_back(std::move(*t));
      ++local.kept;
    } else {
      ++local.dropped;
      log_warn("dropping pair at line " + std::to_string(i + 1) +
               " (empty or longer than " + std::to_string(kMaxSentenceTokens) + " tokens)");
    }
  }
  if (stats) *stats = local;
  return corpus;
}

std::vector<TrainingTriple> sample_negatives(const ParallelCorpus& corpus, int m,
                                             uint64_t seed) {
  const size_t n = corpus.size();
  if (m < 0) throw std::invalid_argument("sample_negatives: m must be non-negative");
  if (n < 2 && m > 0) {
    throw std::invalid_argument("sample_negatives: need at least 2 pairs to sample negatives");
  }
  Rng rng(seed);
  std::vector<TrainingTriple> triples;
  triples.reserve(n * static_cast<size_t>(1 + m));
  for (size_t k = 0; k < n; ++k) {
    triples.push_back({corpus.src[k], corpus.tgt[k], 1});
    for (int d = 0; d < m; ++d) {
      size_t j = static_cast<size_t>(rng.below(n - 1));
      if (j >= k) ++j;
      triples.push_back({corpus.src[k], corpus.tgt[j], 0});
    }
  }
  return triples;
}

NoisyTestSet inject_noise(const ParallelCorpus& test, double ratio,
                          const std::vector<EncodedSentence>& pool, uint64_t seed) {
  if (ratio < 0.0 || ratio > 1.0) throw std::invalid_argument("inject_noise: ratio outside [0,1]");
  const size_t n = test.size();
  const size_t replace = static_cast<size_t>(std::floor(ratio * static_cast<double>(n) + 0.5));
  if (pool.size() < replace) {
    throw std::invalid_argument("inject_noise: pool smaller than replacement count");
  }
  Rng rng(seed);

  std::vector<int> positions(n);
  for (size_t i = 0; i < n; ++i) positions[i] = static_cast<int>(i);
  rng.shuffle(positions);
  positions.resize(replace);
  std::sort(positions.begin(), positions.end());

  std::vector<int> pool_order(pool.size());
  for (size_t i = 0; i < pool.size(); ++i) pool_order[i] = static_cast<int>(i);
  rng.shuffle(pool_order);

  NoisyTestSet out;
  out.src = test.src;
  out.tgt = test.tgt;
  out.replaced_positions = positions;
  std::vector<bool> is_replaced(n, false);
  for (size_t i = 0; i < replace; ++i) {
    out.tgt[static_cast<size_t>(positions[i])] = pool[static_cast<size_t>(pool_order[i])];
    is_replaced[static_cast<size_t>(positions[i])] = true;
  }
  for (size_t i = 0; i < n; ++i) {
    if (!is_replaced[i]) out.gold.emplace_back(static_cast<int>(i), static_cast<int>(i));
  }
  return out;
}

std::vector<std::pair<int, int>> cartesian_candidates(const DocumentPair& doc) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(doc.src.size() * doc.tgt.size());
  for (size_t i = 0; i < doc.src.size(); ++i) {
    for (size_t j = 0; j < doc.tgt.size(); ++j) {
      pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return pairs;
}

namespace {

EncodedSentence encode_or_invalid(const std::string& raw, const Vocabulary& vocab) {
  auto sent = try_encode(tokenize(raw), vocab);
  if (sent) return *sent;
  return EncodedSentence{};  // length 0: kept for index stability, never scored
}

}  // namespace

std::vector<DocumentPair> load_documents(const std::string& path,
                                         const Vocabulary& src_vocab,
                                         const Vocabulary& tgt_vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open document file: " + path);
  std::vector<DocumentPair> docs;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
    }
    if (!obj.contains("doc_id") || !obj.contains("src") || !obj.contains("tgt")) {
      throw UsageError(path + ":" + std::to_string(lineno) +
                       ": object needs doc_id, src and tgt fields");
    }
    DocumentPair doc;
    doc.doc_id = obj.at("doc_id").get<std::string>();
    doc.src_raw = obj.at("src").get<std::vector<std::string>>();
    doc.tgt_raw = obj.at("tgt").get<std::vector<std::string>>();
    if (doc.src_raw.empty() || doc.tgt_raw.empty()) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": empty sentence list");
    }
    doc.src.reserve(doc.src_raw.size());
    doc.tgt.reserve(doc.tgt_raw.size());
    for (const auto& s : doc.src_raw) doc.src.push_back(encode_or_invalid(s, src_vocab));
    for (const auto& t : doc.tgt_raw) doc.tgt.push_back(encode_or_invalid(t, tgt_vocab));
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace bitext
