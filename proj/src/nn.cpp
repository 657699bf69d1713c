#include "bitext/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace bitext {

void init_uniform_scaled(Tensor& w, int64_t fan_in, Rng& rng) {
  const double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (int64_t i = 0; i < w.size(); ++i) {
    w[i] = static_cast<float>(rng.uniform(-limit, limit));
  }
}

void mv_acc(const float* w, int64_t rows, int64_t cols, const double* x, double* out) {
  for (int64_t r = 0; r < rows; ++r) {
    const float* row = w + r * cols;
    double acc = 0.0;
    for (int64_t c = 0; c < cols; ++c) acc += static_cast<double>(row[c]) * x[c];
    out[r] += acc;
  }
}

void mvt_acc(const float* w, int64_t rows, int64_t cols, const double* d, double* out) {
  for (int64_t r = 0; r < rows; ++r) {
    const float* row = w + r * cols;
    const double dr = d[r];
    for (int64_t c = 0; c < cols; ++c) out[c] += static_cast<double>(row[c]) * dr;
  }
}

void outer_acc(double* wgrad, int64_t rows, int64_t cols, const double* d, const double* x) {
  for (int64_t r = 0; r < rows; ++r) {
    double* row = wgrad + r * cols;
    const double dr = d[r];
    for (int64_t c = 0; c < cols; ++c) row[c] += dr * x[c];
  }
}

GruParams GruParams::create(int64_t input_dim, int64_t hidden_dim, Rng& rng) {
  GruParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.w_update = Tensor({hidden_dim, input_dim});
  p.w_reset = Tensor({hidden_dim, input_dim});
  p.w_cand = Tensor({hidden_dim, input_dim});
  p.u_update = Tensor({hidden_dim, hidden_dim});
  p.u_reset = Tensor({hidden_dim, hidden_dim});
  p.u_cand = Tensor({hidden_dim, hidden_dim});
  p.b_update = Tensor({hidden_dim});
  p.b_reset = Tensor({hidden_dim});
  p.b_cand = Tensor({hidden_dim});
  init_uniform_scaled(p.w_update, input_dim, rng);
  init_uniform_scaled(p.w_reset, input_dim, rng);
  init_uniform_scaled(p.w_cand, input_dim, rng);
  init_uniform_scaled(p.u_update, hidden_dim, rng);
  init_uniform_scaled(p.u_reset, hidden_dim, rng);
  init_uniform_scaled(p.u_cand, hidden_dim, rng);
  return p;
}

std::vector<Tensor*> GruParams::tensors() {
  return {&w_update, &u_update, &b_update, &w_reset, &u_reset, &b_reset,
          &w_cand, &u_cand, &b_cand};
}

std::vector<const Tensor*> GruParams::tensors() const {
  return {&w_update, &u_update, &b_update, &w_reset, &u_reset, &b_reset,
          &w_cand, &u_cand, &b_cand};
}

void gru_forward(const GruParams& p, const double* xs, int steps, GruCache& cache) {
  const int64_t dh = p.hidden_dim;
  const int64_t dx = p.input_dim;
  cache.steps = steps;
  cache.input_dim = dx;
  cache.hidden_dim = dh;
  cache.x.assign(static_cast<size_t>(steps) * dx, 0.0);
  std::memcpy(cache.x.data(), xs, sizeof(double) * static_cast<size_t>(steps) * dx);
  cache.h.assign(static_cast<size_t>(steps + 1) * dh, 0.0);
  cache.z.assign(static_cast<size_t>(steps) * dh, 0.0);
  cache.r.assign(static_cast<size_t>(steps) * dh, 0.0);
  cache.cand.assign(static_cast<size_t>(steps) * dh, 0.0);
  cache.rh.assign(static_cast<size_t>(steps) * dh, 0.0);

  for (int t = 0; t < steps; ++t) {
    const double* x = cache.x.data() + static_cast<size_t>(t) * dx;
    const double* h_prev = cache.h.data() + static_cast<size_t>(t) * dh;
    double* h = cache.h.data() + static_cast<size_t>(t + 1) * dh;
    double* z = cache.z.data() + static_cast<size_t>(t) * dh;
    double* r = cache.r.data() + static_cast<size_t>(t) * dh;
    double* cand = cache.cand.data() + static_cast<size_t>(t) * dh;
    double* rh = cache.rh.data() + static_cast<size_t>(t) * dh;

    for (int64_t i = 0; i < dh; ++i) {
      z[i] = static_cast<double>(p.b_update[i]);
      r[i] = static_cast<double>(p.b_reset[i]);
      cand[i] = static_cast<double>(p.b_cand[i]);
    }
    mv_acc(p.w_update.data(), dh, dx, x, z);
    mv_acc(p.u_update.data(), dh, dh, h_prev, z);
    mv_acc(p.w_reset.data(), dh, dx, x, r);
    mv_acc(p.u_reset.data(), dh, dh, h_prev, r);
    for (int64_t i = 0; i < dh; ++i) {
      z[i] = sigmoid(z[i]);
      r[i] = sigmoid(r[i]);
      rh[i] = r[i] * h_prev[i];
    }
    mv_acc(p.w_cand.data(), dh, dx, x, cand);
    mv_acc(p.u_cand.data(), dh, dh, rh, cand);
    for (int64_t i = 0; i < dh; ++i) {
      cand[i] = std::tanh(cand[i]);
      h[i] = (1.0 - z[i]) * h_prev[i] + z[i] * cand[i];
    }
  }
}

void GruGrads::reset(const GruParams& p) {
  const size_t wi = static_cast<size_t>(p.hidden_dim * p.input_dim);
  const size_t wh = static_cast<size_t>(p.hidden_dim * p.hidden_dim);
  const size_t b = static_cast<size_t>(p.hidden_dim);
  w_update.assign(wi, 0.0);
  w_reset.assign(wi, 0.0);
  w_cand.assign(wi, 0.0);
  u_update.assign(wh, 0.0);
  u_reset.assign(wh, 0.0);
  u_cand.assign(wh, 0.0);
  b_update.assign(b, 0.0);
  b_reset.assign(b, 0.0);
  b_cand.assign(b, 0.0);
}

void gru_backward(const GruParams& p, const GruCache& cache, const double* dh_final,
                  GruGrads& grads, double* dxs) {
  const int64_t dh = p.hidden_dim;
  const int64_t dx = p.input_dim;
  std::vector<double> dh_cur(dh_final, dh_final + dh);
  std::vector<double> dh_prev(static_cast<size_t>(dh), 0.0);
  std::vector<double> da_z(static_cast<size_t>(dh), 0.0);
  std::vector<double> da_r(static_cast<size_t>(dh), 0.0);
  std::vector<double> da_c(static_cast<size_t>(dh), 0.0);
  std::vector<double> drh(static_cast<size_t>(dh), 0.0);

  for (int t = cache.steps - 1; t >= 0; --t) {
    const double* x = cache.x.data() + static_cast<size_t>(t) * dx;
    const double* h_prev = cache.h.data() + static_cast<size_t>(t) * dh;
    const double* z = cache.z.data() + static_cast<size_t>(t) * dh;
    const double* r = cache.r.data() + static_cast<size_t>(t) * dh;
    const double* cand = cache.cand.data() + static_cast<size_t>(t) * dh;
    const double* rh = cache.rh.data() + static_cast<size_t>(t) * dh;
    double* dx_t = dxs + static_cast<size_t>(t) * dx;

    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    std::fill(drh.begin(), drh.end(), 0.0);
    for (int64_t i = 0; i < dh; ++i) {
      const double dh_i = dh_cur[i];
      const double dcand = dh_i * z[i];
      const double dz = dh_i * (cand[i] - h_prev[i]);
      dh_prev[i] += dh_i * (1.0 - z[i]);
      da_c[i] = dcand * (1.0 - cand[i] * cand[i]);
      da_z[i] = dz * z[i] * (1.0 - z[i]);
    }
    // candidate pre-activation
    outer_acc(grads.w_cand.data(), dh, dx, da_c.data(), x);
    outer_acc(grads.u_cand.data(), dh, dh, da_c.data(), rh);
    for (int64_t i = 0; i < dh; ++i) grads.b_cand[static_cast<size_t>(i)] += da_c[i];
    mvt_acc(p.w_cand.data(), dh, dx, da_c.data(), dx_t);
    mvt_acc(p.u_cand.data(), dh, dh, da_c.data(), drh.data());
    for (int64_t i = 0; i < dh; ++i) {
      const double dr = drh[i] * h_prev[i];
      dh_prev[i] += drh[i] * r[i];
      da_r[i] = dr * r[i] * (1.0 - r[i]);
    }
    // gates
    outer_acc(grads.w_update.data(), dh, dx, da_z.data(), x);
    outer_acc(grads.u_update.data(), dh, dh, da_z.data(), h_prev);
    outer_acc(grads.w_reset.data(), dh, dx, da_r.data(), x);
    outer_acc(grads.u_reset.data(), dh, dh, da_r.data(), h_prev);
    for (int64_t i = 0; i < dh; ++i) {
      grads.b_update[static_cast<size_t>(i)] += da_z[i];
      grads.b_reset[static_cast<size_t>(i)] += da_r[i];
    }
    mvt_acc(p.w_update.data(), dh, dx, da_z.data(), dx_t);
    mvt_acc(p.w_reset.data(), dh, dx, da_r.data(), dx_t);
    mvt_acc(p.u_update.data(), dh, dh, da_z.data(), dh_prev.data());
    mvt_acc(p.u_reset.data(), dh, dh, da_r.data(), dh_prev.data());

    dh_cur = dh_prev;
  }
}

Tensor gru_step(const GruParams& p, const Tensor& h_prev, const Tensor& x) {
  if (h_prev.size() != p.hidden_dim || x.size() != p.input_dim) {
    throw Error("gru_step: shape mismatch, h_prev " + h_prev.shape_str() + " x " +
                x.shape_str());
  }
  std::vector<double> xd(x.data(), x.data() + x.size());
  const int64_t dh = p.hidden_dim;
  std::vector<double> hp(h_prev.data(), h_prev.data() + dh);
  std::vector<double> z(static_cast<size_t>(dh), 0.0);
  std::vector<double> r(static_cast<size_t>(dh), 0.0);
  std::vector<double> cand(static_cast<size_t>(dh), 0.0);
  std::vector<double> rh(static_cast<size_t>(dh), 0.0);
  for (int64_t i = 0; i < dh; ++i) {
    z[i] = static_cast<double>(p.b_update[i]);
    r[i] = static_cast<double>(p.b_reset[i]);
    cand[i] = static_cast<double>(p.b_cand[i]);
  }
  mv_acc(p.w_update.data(), dh, p.input_dim, xd.data(), z.data());
  mv_acc(p.u_update.data(), dh, dh, hp.data(), z.data());
  mv_acc(p.w_reset.data(), dh, p.input_dim, xd.data(), r.data());
  mv_acc(p.u_reset.data(), dh, dh, hp.data(), r.data());
  for (int64_t i = 0; i < dh; ++i) {
    z[i] = sigmoid(z[i]);
    r[i] = sigmoid(r[i]);
    rh[i] = r[i] * hp[i];
  }
  mv_acc(p.w_cand.data(), dh, p.input_dim, xd.data(), cand.data());
  mv_acc(p.u_cand.data(), dh, dh, rh.data(), cand.data());
  Tensor h({dh});
  for (int64_t i = 0; i < dh; ++i) {
    const double c = std::tanh(cand[i]);
    h[i] = static_cast<float>((1.0 - z[i]) * hp[i] + z[i] * c);
  }
  return h;
}

Tensor embed_lookup(const Tensor& table, const std::vector<int32_t>& ids) {
  if (table.shape().size() != 2) throw Error("embed_lookup: table must be 2-D");
  const int64_t vocab = table.dim(0);
  const int64_t dim = table.dim(1);
  Tensor out({static_cast<int64_t>(ids.size()), dim});
  for (size_t t = 0; t < ids.size(); ++t) {
    const int32_t id = ids[t];
    if (id < 0 || id >= vocab) {
      throw Error("embed_lookup: index " + std::to_string(id) + " out of range");
    }
    std::memcpy(out.data() + t * dim, table.data() + static_cast<size_t>(id) * dim,
                sizeof(float) * static_cast<size_t>(dim));
  }
  return out;
}

Tensor dense(const Tensor& w, const Tensor& b, const Tensor& x, Activation act) {
  if (w.shape().size() != 2 || w.dim(1) != x.size() || w.dim(0) != b.size()) {
    throw Error("dense: shape mismatch " + w.shape_str() + " x " + x.shape_str());
  }
  const int64_t rows = w.dim(0);
  const int64_t cols = w.dim(1);
  std::vector<double> xd(x.data(), x.data() + x.size());
  std::vector<double> acc(static_cast<size_t>(rows), 0.0);
  for (int64_t r = 0; r < rows; ++r) acc[r] = static_cast<double>(b[r]);
  mv_acc(w.data(), rows, cols, xd.data(), acc.data());
  Tensor out({rows});
  for (int64_t r = 0; r < rows; ++r) {
    double v = acc[r];
    switch (act) {
      case Activation::kTanh: v = std::tanh(v); break;
      case Activation::kSigmoid: v = sigmoid(v); break;
      case Activation::kIdentity: break;
    }
    out[r] = static_cast<float>(v);
  }
  return out;
}

double bce_loss(double p, int label) {
  if (label != 0 && label != 1) throw std::invalid_argument("bce_loss: label must be 0 or 1");
  const double q = std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
  return label == 1 ? -std::log(q) : -std::log(1.0 - q);
}

double clip_gradients(const std::vector<Tensor*>& grads, double max_norm) {
  if (max_norm <= 0.0) throw std::invalid_argument("clip_gradients: max_norm must be positive");
  double sq = 0.0;
  for (const Tensor* g : grads) sq += g->squared_norm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const float scale = static_cast<float>(max_norm / norm * (1.0 - 1e-6));
    for (Tensor* g : grads) g->scale(scale);
  }
  return norm;
}

AdamState AdamState::create(const std::vector<const Tensor*>& params) {
  AdamState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Tensor* p : params) {
    s.m.push_back(Tensor::zeros(p->shape()));
    s.v.push_back(Tensor::zeros(p->shape()));
  }
  return s;
}

void adam_step(const std::vector<Tensor*>& params, AdamState& state,
               const std::vector<const Tensor*>& grads, const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw Error("adam_step: parameter/gradient/state count mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = *grads[k];
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    check_same_shape(p, g, "adam_step");
    for (int64_t i = 0; i < p.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * gi * gi;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double mhat = mi / bc1;
      const double vhat = vi / bc2;
      p[i] = static_cast<float>(static_cast<double>(p[i]) -
                                cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
  }
}

std::vector<float> dropout_mask(size_t n, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0,1)");
  std::vector<float> mask(n, 1.0f);
  if (p == 0.0) return mask;
  const float keep_scale = static_cast<float>(1.0 / (1.0 - p));
  for (size_t i = 0; i < n; ++i) {
    mask[i] = rng.next_unit() < p ? 0.0f : keep_scale;
  }
  return mask;
}

Tensor dropout(const Tensor& x, double p, RunMode mode, uint64_t seed) {
  if (mode == RunMode::kEval || p == 0.0) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0,1)");
    return x;
  }
  Rng rng(seed);
  const auto mask = dropout_mask(static_cast<size_t>(x.size()), p, rng);
  Tensor out(x.shape());
  for (int64_t i = 0; i < x.size(); ++i) out[i] = x[i] * mask[static_cast<size_t>(i)];
  return out;
}

double grad_check(const std::function<double()>& loss, const std::vector<Tensor*>& params,
                  const std::vector<const Tensor*>& analytic, int coords, uint64_t seed,
                  double eps) {
  if (params.size() != analytic.size()) {
    throw Error("grad_check: parameter/gradient count mismatch");
  }
  int64_t total = 0;
  for (const Tensor* p : params) total += p->size();
  if (total == 0) throw Error("grad_check: no parameters");

  Rng rng(seed);
  double max_rel = 0.0;
  for (int c = 0; c < coords; ++c) {
    int64_t flat = static_cast<int64_t>(rng.below(static_cast<uint64_t>(total)));
    size_t k = 0;
    while (flat >= params[k]->size()) {
      flat -= params[k]->size();
      ++k;
    }
    Tensor& t = *params[k];
    const float saved = t[flat];

    t[flat] = static_cast<float>(static_cast<double>(saved) + eps);
    const double hi_val = static_cast<double>(t[flat]);
    const double loss_hi = loss();
    t[flat] = static_cast<float>(static_cast<double>(saved) - eps);
    const double lo_val = static_cast<double>(t[flat]);
    const double loss_lo = loss();
    t[flat] = saved;

    if (!std::isfinite(loss_hi) || !std::isfinite(loss_lo)) {
      throw Error("grad_check: non-finite loss");
    }
    const double numeric = (loss_hi - loss_lo) / (hi_val - lo_val);
    const double exact = static_cast<double>((*analytic[k])[flat]);
    // Relative to the numeric reference, so an analytic gradient scaled by
    // a factor c reads as an error of |c - 1|.
    const double denom = std::max(std::abs(numeric), 1e-8);
    max_rel = std::max(max_rel, std::abs(numeric - exact) / denom);
  }
  return max_rel;
}

}  // namespace bitext
