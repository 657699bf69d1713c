#ifndef BITEXT_NN_HPP
#define BITEXT_NN_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "bitext/common.hpp"
#include "bitext/tensor.hpp"

namespace bitext {

enum class RunMode { kTrain, kEval };

enum class Activation { kTanh, kSigmoid, kIdentity };

// Probabilities are clamped to [kProbEpsilon, 1 - kProbEpsilon] before logs.
inline constexpr double kProbEpsilon = 1e-7;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Uniform init in [-sqrt(3/fan_in), +sqrt(3/fan_in)] (unit-variance scaling).
void init_uniform_scaled(Tensor& w, int64_t fan_in, Rng& rng);

// ---------------------------------------------------------------------------
// Double-accumulating kernels over float32 matrices. All reductions run in
// 64 bits; float32 is only a storage format.

// out[r] += sum_c W[r,c] * x[c]
void mv_acc(const float* w, int64_t rows, int64_t cols, const double* x, double* out);
// out[c] += sum_r W[r,c] * d[r]
void mvt_acc(const float* w, int64_t rows, int64_t cols, const double* d, double* out);
// wgrad[r,c] += d[r] * x[c]
void outer_acc(double* wgrad, int64_t rows, int64_t cols, const double* d, const double* x);

// ---------------------------------------------------------------------------
// GRU cell.
//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   c = tanh(Wc x + Uc (r . h) + bc)
//   h' = (1 - z) . h + z . c
struct GruParams {
  int64_t input_dim = 0;
  int64_t hidden_dim = 0;
  Tensor w_update, w_reset, w_cand;  // hidden_dim x input_dim
  Tensor u_update, u_reset, u_cand;  // hidden_dim x hidden_dim
  Tensor b_update, b_reset, b_cand;  // hidden_dim, zero-initialized

  static GruParams create(int64_t input_dim, int64_t hidden_dim, Rng& rng);

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
};

// Single step on float32 tensors.
Tensor gru_step(const GruParams& p, const Tensor& h_prev, const Tensor& x);

// Sequence run in double precision; keeps everything backward needs.
struct GruCache {
  int steps = 0;
  int64_t input_dim = 0;
  int64_t hidden_dim = 0;
  std::vector<double> x;     // steps x input_dim
  std::vector<double> h;     // (steps + 1) x hidden_dim, h[0] is the zero state
  std::vector<double> z;     // steps x hidden_dim
  std::vector<double> r;     // steps x hidden_dim
  std::vector<double> cand;  // steps x hidden_dim
  std::vector<double> rh;    // steps x hidden_dim, r . h_prev

  const double* final_state() const { return h.data() + static_cast<size_t>(steps) * hidden_dim; }
};

void gru_forward(const GruParams& p, const double* xs, int steps, GruCache& cache);

// Double-precision gradient accumulators mirroring GruParams.
struct GruGrads {
  std::vector<double> w_update, u_update, b_update;
  std::vector<double> w_reset, u_reset, b_reset;
  std::vector<double> w_cand, u_cand, b_cand;

  void reset(const GruParams& p);
};

// Backpropagates the gradient at the final state through all steps,
// accumulating parameter gradients and per-step input gradients (dxs,
// steps x input_dim, accumulated into).
void gru_backward(const GruParams& p, const GruCache& cache, const double* dh_final,
                  GruGrads& grads, double* dxs);

// ---------------------------------------------------------------------------

// Rows of the embedding table selected by ids; row t equals table[ids[t]].
Tensor embed_lookup(const Tensor& table, const std::vector<int32_t>& ids);

// activation(W x + b)
Tensor dense(const Tensor& w, const Tensor& b, const Tensor& x, Activation act);

// -y log p - (1-y) log(1-p) with p clamped away from {0, 1}.
double bce_loss(double p, int label);

// Global-norm clipping across a set of tensors. Returns the pre-clip norm.
// When clipping triggers, the scale carries a 1e-6 relative shave so the
// recomputed float32 norm stays at or below max_norm and a second clip is an
// exact no-op.
double clip_gradients(const std::vector<Tensor*>& grads, double max_norm = 5.0);

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  static AdamState create(const std::vector<const Tensor*>& params);
};

// Standard bias-corrected Adam update; increments state.step by one.
void adam_step(const std::vector<Tensor*>& params, AdamState& state,
               const std::vector<const Tensor*>& grads, const AdamConfig& cfg = {});

// Inverted dropout: train mode zeroes entries with probability p and scales
// survivors by 1/(1-p); eval mode is the identity.
Tensor dropout(const Tensor& x, double p, RunMode mode, uint64_t seed);

// Mask entries are 0 or 1/(1-p).
std::vector<float> dropout_mask(size_t n, double p, Rng& rng);

// Central-difference gradient checker. `loss` re-evaluates the scalar loss
// from the current parameter values; `analytic` holds gradients at the
// unperturbed point, ordered like `params`. Samples `coords` coordinates and
// returns the largest relative error. Parameters are restored afterwards.
double grad_check(const std::function<double()>& loss, const std::vector<Tensor*>& params,
                  const std::vector<const Tensor*>& analytic, int coords, uint64_t seed,
                  double eps = 1e-3);

}  // namespace bitext

#endif  // BITEXT_NN_HPP
