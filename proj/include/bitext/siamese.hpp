#ifndef BITEXT_SIAMESE_HPP
#define BITEXT_SIAMESE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bitext/corpus.hpp"
#include "bitext/nn.hpp"
#include "bitext/tensor.hpp"

namespace bitext {

struct ModelDims {
  int64_t src_vocab = 0;
  int64_t tgt_vocab = 0;
  int64_t embed_dim = 512;   // word embedding size
  int64_t state_dim = 512;   // GRU state size per direction
  int64_t hidden_dim = 256;  // matching head size
};

// Siamese bidirectional GRU scorer. Each language has its own embedding
// table; the recurrent weights are tied across languages. A sentence vector
// is the concatenation of the forward GRU final state and the backward GRU
// final state (2 * state_dim). The head combines elementwise product and
// absolute difference of the two sentence vectors through one tanh layer and
// a sigmoid output.
struct ModelParams {
  ModelDims dims;
  Tensor embed_src;  // src_vocab x embed_dim
  Tensor embed_tgt;  // tgt_vocab x embed_dim
  GruParams gru_fwd;
  GruParams gru_bwd;
  Tensor head_prod;  // hidden_dim x 2*state_dim
  Tensor head_diff;  // hidden_dim x 2*state_dim
  Tensor head_bias;  // hidden_dim
  Tensor out_w;      // hidden_dim
  Tensor out_b;      // 1

  static ModelParams create(const ModelDims& dims, uint64_t seed);

  // Canonical tensor order, shared by gradients, Adam state and checkpoints.
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  static std::vector<std::string> tensor_names();
};

struct HyperParams {
  int negatives = 7;      // negatives per positive
  double lr = 2e-4;
  int batch = 128;
  int epochs = 15;
  double clip_norm = 5.0;
  double drop_in = 0.2;   // on embedded inputs
  double drop_out = 0.3;  // on sentence vectors
  double rho = 0.99;      // decision threshold
  uint64_t seed = 1;
};

struct TrainHistory {
  std::vector<double> epoch_loss;     // mean loss over the epoch's triples
  std::vector<double> epoch_seconds;  // wall clock, never serialized
  std::vector<std::string> snapshots;  // free-form evaluation notes
  int64_t triples_per_epoch = 0;
};

// Tab-separated history file: one "epoch<TAB>loss" row per epoch, losses
// printed with 17 significant digits. Contains nothing run-dependent.
void write_history(const TrainHistory& h, const std::string& path);

// Double-precision gradient accumulators aligned with ModelParams.
struct ModelGrads {
  std::vector<double> embed_src, embed_tgt;
  GruGrads gru_fwd, gru_bwd;
  std::vector<double> head_prod, head_diff, head_bias, out_w, out_b;

  void reset(const ModelParams& m);
  // Flattens into float32 tensors in canonical order, scaled by `scale`.
  std::vector<Tensor> to_tensors(const ModelParams& m, double scale) const;
};

struct DropoutPlan {
  double drop_in = 0.0;
  double drop_out = 0.0;
  RunMode mode = RunMode::kEval;
  uint64_t seed = 0;  // masks are a pure function of this
};

struct PairResult {
  double loss = 0.0;
  double prob = 0.0;
};

// One labeled pair: forward, then backward accumulating into `grads`.
PairResult pair_forward_backward(const ModelParams& m, const TrainingTriple& t,
                                 const DropoutPlan& plan, ModelGrads& grads);

// Forward only (same dropout semantics), no gradient work.
PairResult pair_forward(const ModelParams& m, const TrainingTriple& t, const DropoutPlan& plan);

struct BatchResult {
  std::vector<double> probs;
  double mean_loss = 0.0;
};

// Per-example probabilities plus the mean binary cross entropy. Sentences of
// different lengths mix freely: positions past a sentence's length never
// influence its encoding. Train mode draws one dropout mask set per example,
// derived from (seed, example index).
BatchResult forward_batch(const ModelParams& m, const std::vector<TrainingTriple>& batch,
                          RunMode mode, uint64_t seed, double drop_in = 0.0,
                          double drop_out = 0.0);

// Sentence vector (2 * state_dim), deterministic, no dropout. Reads only the
// first `length` ids, so trailing padding cannot change the result.
Tensor encode_sentence(const ModelParams& m, const EncodedSentence& s, bool is_source);

// prod = a . b, diff = |a - b|
void match_vectors(const Tensor& a, const Tensor& b, Tensor& prod, Tensor& diff);

// Match probability in [0, 1], eval mode.
double score_pair(const ModelParams& m, const EncodedSentence& src, const EncodedSentence& tgt);

// Label under threshold rho: 1 iff score_pair(...) >= rho.
int predict(const ModelParams& m, const EncodedSentence& src, const EncodedSentence& tgt,
            double rho);

// Negative-sampling training. Serial and deterministic: a fixed seed fixes
// the sampled triples, their order, every dropout mask and therefore every
// parameter update. Per-epoch progress lines go to `progress` when given.
TrainHistory train_siamese(ModelParams& m, const ParallelCorpus& corpus, const HyperParams& h,
                           std::ostream* progress = nullptr);

}  // namespace bitext

#endif  // BITEXT_SIAMESE_HPP
