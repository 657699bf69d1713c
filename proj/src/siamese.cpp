#include "bitext/siamese.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>

namespace bitext {
namespace {

// Everything one backward pass needs from one sentence's encoder run.
struct SentPass {
  int len = 0;
  const std::vector<int32_t>* ids = nullptr;
  std::vector<float> in_mask;   // len x embed_dim, empty when inactive
  std::vector<float> out_mask;  // 2 * state_dim, empty when inactive
  std::vector<double> xs;       // len x embed_dim, after input dropout
  std::vector<double> xs_rev;
  GruCache fwd;
  GruCache bwd;
  std::vector<double> vec;  // 2 * state_dim, after output dropout
};

// Mask draw order is fixed: source input, source output, target input,
// target output, all from one generator seeded by the plan.
void run_encoder(const ModelParams& m, const EncodedSentence& s, bool is_source,
                 const DropoutPlan& plan, Rng* mask_rng, SentPass& out) {
  if (!s.valid()) throw std::invalid_argument("siamese: cannot encode an empty sentence");
  if (static_cast<size_t>(s.length) > s.ids.size()) {
    throw Error("siamese: sentence length exceeds id buffer");
  }
  const Tensor& table = is_source ? m.embed_src : m.embed_tgt;
  const int64_t de = m.dims.embed_dim;
  const int64_t dh = m.dims.state_dim;
  const int len = s.length;
  out.len = len;
  out.ids = &s.ids;

  const bool train = plan.mode == RunMode::kTrain;
  if (train && plan.drop_in > 0.0) {
    out.in_mask = dropout_mask(static_cast<size_t>(len) * de, plan.drop_in, *mask_rng);
  }
  out.xs.assign(static_cast<size_t>(len) * de, 0.0);
  for (int t = 0; t < len; ++t) {
    const int32_t id = s.ids[static_cast<size_t>(t)];
    if (id < 0 || id >= table.dim(0)) {
      throw Error("siamese: token id " + std::to_string(id) + " out of range for " +
                  (is_source ? std::string("source") : std::string("target")) + " vocabulary");
    }
    const float* row = table.data() + static_cast<size_t>(id) * de;
    double* x = out.xs.data() + static_cast<size_t>(t) * de;
    if (!out.in_mask.empty()) {
      const float* mrow = out.in_mask.data() + static_cast<size_t>(t) * de;
      for (int64_t j = 0; j < de; ++j) x[j] = static_cast<double>(row[j]) * mrow[j];
    } else {
      for (int64_t j = 0; j < de; ++j) x[j] = row[j];
    }
  }
  out.xs_rev.assign(out.xs.size(), 0.0);
  for (int t = 0; t < len; ++t) {
    std::memcpy(out.xs_rev.data() + static_cast<size_t>(t) * de,
                out.xs.data() + static_cast<size_t>(len - 1 - t) * de,
                sizeof(double) * static_cast<size_t>(de));
  }
  gru_forward(m.gru_fwd, out.xs.data(), len, out.fwd);
  gru_forward(m.gru_bwd, out.xs_rev.data(), len, out.bwd);

  if (train && plan.drop_out > 0.0) {
    out.out_mask = dropout_mask(static_cast<size_t>(2 * dh), plan.drop_out, *mask_rng);
  }
  out.vec.assign(static_cast<size_t>(2 * dh), 0.0);
  const double* hf = out.fwd.final_state();
  const double* hb = out.bwd.final_state();
  for (int64_t i = 0; i < dh; ++i) out.vec[static_cast<size_t>(i)] = hf[i];
  for (int64_t i = 0; i < dh; ++i) out.vec[static_cast<size_t>(dh + i)] = hb[i];
  if (!out.out_mask.empty()) {
    for (int64_t i = 0; i < 2 * dh; ++i) {
      out.vec[static_cast<size_t>(i)] *= out.out_mask[static_cast<size_t>(i)];
    }
  }
}

struct HeadPass {
  std::vector<double> h1, h2;     // 2 * state_dim
  std::vector<double> sign_diff;  // sign(s - t)
  std::vector<double> hidden;     // hidden_dim, after tanh
  double logit = 0.0;
  double prob = 0.0;
};

void run_head(const ModelParams& m, const std::vector<double>& s, const std::vector<double>& t,
              HeadPass& h) {
  const int64_t dv = 2 * m.dims.state_dim;
  const int64_t dd = m.dims.hidden_dim;
  h.h1.assign(static_cast<size_t>(dv), 0.0);
  h.h2.assign(static_cast<size_t>(dv), 0.0);
  h.sign_diff.assign(static_cast<size_t>(dv), 0.0);
  for (int64_t i = 0; i < dv; ++i) {
    const size_t k = static_cast<size_t>(i);
    h.h1[k] = s[k] * t[k];
    const double d = s[k] - t[k];
    h.h2[k] = std::abs(d);
    h.sign_diff[k] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }
  h.hidden.assign(static_cast<size_t>(dd), 0.0);
  for (int64_t r = 0; r < dd; ++r) h.hidden[static_cast<size_t>(r)] = m.head_bias[r];
  mv_acc(m.head_prod.data(), dd, dv, h.h1.data(), h.hidden.data());
  mv_acc(m.head_diff.data(), dd, dv, h.h2.data(), h.hidden.data());
  double logit = static_cast<double>(m.out_b[0]);
  for (int64_t r = 0; r < dd; ++r) {
    h.hidden[static_cast<size_t>(r)] = std::tanh(h.hidden[static_cast<size_t>(r)]);
    logit += static_cast<double>(m.out_w[r]) * h.hidden[static_cast<size_t>(r)];
  }
  h.logit = logit;
  h.prob = sigmoid(logit);
}

void backward_encoder(const ModelParams& m, const SentPass& p, std::vector<double> dvec,
                      bool is_source, ModelGrads& g) {
  const int64_t de = m.dims.embed_dim;
  const int64_t dh = m.dims.state_dim;
  const int len = p.len;
  if (!p.out_mask.empty()) {
    for (int64_t i = 0; i < 2 * dh; ++i) {
      dvec[static_cast<size_t>(i)] *= p.out_mask[static_cast<size_t>(i)];
    }
  }
  std::vector<double> dxs(static_cast<size_t>(len) * de, 0.0);
  std::vector<double> dxs_rev(static_cast<size_t>(len) * de, 0.0);
  gru_backward(m.gru_fwd, p.fwd, dvec.data(), g.gru_fwd, dxs.data());
  gru_backward(m.gru_bwd, p.bwd, dvec.data() + dh, g.gru_bwd, dxs_rev.data());

  std::vector<double>& etab = is_source ? g.embed_src : g.embed_tgt;
  for (int t = 0; t < len; ++t) {
    const double* dxf = dxs.data() + static_cast<size_t>(t) * de;
    const double* dxb = dxs_rev.data() + static_cast<size_t>(len - 1 - t) * de;
    const int32_t id = (*p.ids)[static_cast<size_t>(t)];
    double* erow = etab.data() + static_cast<size_t>(id) * de;
    if (!p.in_mask.empty()) {
      const float* mrow = p.in_mask.data() + static_cast<size_t>(t) * de;
      for (int64_t j = 0; j < de; ++j) erow[j] += (dxf[j] + dxb[j]) * mrow[j];
    } else {
      for (int64_t j = 0; j < de; ++j) erow[j] += dxf[j] + dxb[j];
    }
  }
}

void backward_pair(const ModelParams& m, const SentPass& s, const SentPass& t, const HeadPass& h,
                   int label, ModelGrads& g) {
  const int64_t dv = 2 * m.dims.state_dim;
  const int64_t dd = m.dims.hidden_dim;
  const double dlogit = h.prob - static_cast<double>(label);
  g.out_b[0] += dlogit;
  std::vector<double> da(static_cast<size_t>(dd), 0.0);
  for (int64_t r = 0; r < dd; ++r) {
    const size_t k = static_cast<size_t>(r);
    g.out_w[k] += dlogit * h.hidden[k];
    const double dhid = dlogit * static_cast<double>(m.out_w[r]);
    da[k] = dhid * (1.0 - h.hidden[k] * h.hidden[k]);
  }
  outer_acc(g.head_prod.data(), dd, dv, da.data(), h.h1.data());
  outer_acc(g.head_diff.data(), dd, dv, da.data(), h.h2.data());
  for (int64_t r = 0; r < dd; ++r) g.head_bias[static_cast<size_t>(r)] += da[static_cast<size_t>(r)];
  std::vector<double> dh1(static_cast<size_t>(dv), 0.0);
  std::vector<double> dh2(static_cast<size_t>(dv), 0.0);
  mvt_acc(m.head_prod.data(), dd, dv, da.data(), dh1.data());
  mvt_acc(m.head_diff.data(), dd, dv, da.data(), dh2.data());
  std::vector<double> ds(static_cast<size_t>(dv), 0.0);
  std::vector<double> dt(static_cast<size_t>(dv), 0.0);
  for (int64_t i = 0; i < dv; ++i) {
    const size_t k = static_cast<size_t>(i);
    ds[k] = dh1[k] * t.vec[k] + dh2[k] * h.sign_diff[k];
    dt[k] = dh1[k] * s.vec[k] - dh2[k] * h.sign_diff[k];
  }
  backward_encoder(m, s, std::move(ds), true, g);
  backward_encoder(m, t, std::move(dt), false, g);
}

void forward_pair_impl(const ModelParams& m, const TrainingTriple& tr, const DropoutPlan& plan,
                       SentPass& s, SentPass& t, HeadPass& h) {
  Rng mask_rng(plan.seed);
  run_encoder(m, tr.src, true, plan, &mask_rng, s);
  run_encoder(m, tr.tgt, false, plan, &mask_rng, t);
  run_head(m, s.vec, t.vec, h);
}

void append_tensor(std::vector<Tensor>& out, const std::vector<double>& g,
                   const std::vector<int64_t>& shape, double scale) {
  Tensor t(shape);
  if (static_cast<size_t>(t.size()) != g.size()) {
    throw Error("gradient buffer does not match parameter shape");
  }
  for (int64_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<float>(g[static_cast<size_t>(i)] * scale);
  }
  out.push_back(std::move(t));
}

void append_gru(std::vector<Tensor>& out, const GruGrads& g, const GruParams& p, double scale) {
  const std::vector<int64_t> wi{p.hidden_dim, p.input_dim};
  const std::vector<int64_t> wh{p.hidden_dim, p.hidden_dim};
  const std::vector<int64_t> b{p.hidden_dim};
  append_tensor(out, g.w_update, wi, scale);
  append_tensor(out, g.u_update, wh, scale);
  append_tensor(out, g.b_update, b, scale);
  append_tensor(out, g.w_reset, wi, scale);
  append_tensor(out, g.u_reset, wh, scale);
  append_tensor(out, g.b_reset, b, scale);
  append_tensor(out, g.w_cand, wi, scale);
  append_tensor(out, g.u_cand, wh, scale);
  append_tensor(out, g.b_cand, b, scale);
}

}  // namespace

ModelParams ModelParams::create(const ModelDims& dims, uint64_t seed) {
  if (dims.src_vocab <= 0 || dims.tgt_vocab <= 0 || dims.embed_dim <= 0 || dims.state_dim <= 0 ||
      dims.hidden_dim <= 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  Rng rng(seed);
  ModelParams m;
  m.dims = dims;
  m.embed_src = Tensor({dims.src_vocab, dims.embed_dim});
  m.embed_tgt = Tensor({dims.tgt_vocab, dims.embed_dim});
  init_uniform_scaled(m.embed_src, dims.src_vocab, rng);
  init_uniform_scaled(m.embed_tgt, dims.tgt_vocab, rng);
  m.gru_fwd = GruParams::create(dims.embed_dim, dims.state_dim, rng);
  m.gru_bwd = GruParams::create(dims.embed_dim, dims.state_dim, rng);
  m.head_prod = Tensor({dims.hidden_dim, 2 * dims.state_dim});
  m.head_diff = Tensor({dims.hidden_dim, 2 * dims.state_dim});
  init_uniform_scaled(m.head_prod, 2 * dims.state_dim, rng);
  init_uniform_scaled(m.head_diff, 2 * dims.state_dim, rng);
  m.head_bias = Tensor({dims.hidden_dim});
  m.out_w = Tensor({dims.hidden_dim});
  init_uniform_scaled(m.out_w, dims.hidden_dim, rng);
  m.out_b = Tensor({1});
  return m;
}

std::vector<Tensor*> ModelParams::tensors() {
  std::vector<Tensor*> out{&embed_src, &embed_tgt};
  for (Tensor* t : gru_fwd.tensors()) out.push_back(t);
  for (Tensor* t : gru_bwd.tensors()) out.push_back(t);
  out.push_back(&head_prod);
  out.push_back(&head_diff);
  out.push_back(&head_bias);
  out.push_back(&out_w);
  out.push_back(&out_b);
  return out;
}

std::vector<const Tensor*> ModelParams::tensors() const {
  std::vector<const Tensor*> out{&embed_src, &embed_tgt};
  for (const Tensor* t : gru_fwd.tensors()) out.push_back(t);
  for (const Tensor* t : gru_bwd.tensors()) out.push_back(t);
  out.push_back(&head_prod);
  out.push_back(&head_diff);
  out.push_back(&head_bias);
  out.push_back(&out_w);
  out.push_back(&out_b);
  return out;
}

std::vector<std::string> ModelParams::tensor_names() {
  std::vector<std::string> names{"embed_src", "embed_tgt"};
  for (const char* prefix : {"gru_fwd.", "gru_bwd."}) {
    for (const char* part : {"w_update", "u_update", "b_update", "w_reset", "u_reset", "b_reset",
                             "w_cand", "u_cand", "b_cand"}) {
      names.push_back(std::string(prefix) + part);
    }
  }
  names.insert(names.end(), {"head_prod", "head_diff", "head_bias", "out_w", "out_b"});
  return names;
}

void write_history(const TrainHistory& h, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write history file: " + path);
  f << "epoch\tloss\n";
  char buf[64];
  for (size_t i = 0; i < h.epoch_loss.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", h.epoch_loss[i]);
    f << (i + 1) << '\t' << buf << '\n';
  }
  f.flush();
  if (!f) throw Error("failed writing history file: " + path);
}

void ModelGrads::reset(const ModelParams& m) {
  embed_src.assign(static_cast<size_t>(m.embed_src.size()), 0.0);
  embed_tgt.assign(static_cast<size_t>(m.embed_tgt.size()), 0.0);
  gru_fwd.reset(m.gru_fwd);
  gru_bwd.reset(m.gru_bwd);
  head_prod.assign(static_cast<size_t>(m.head_prod.size()), 0.0);
  head_diff.assign(static_cast<size_t>(m.head_diff.size()), 0.0);
  head_bias.assign(static_cast<size_t>(m.head_bias.size()), 0.0);
  out_w.assign(static_cast<size_t>(m.out_w.size()), 0.0);
  out_b.assign(1, 0.0);
}

std::vector<Tensor> ModelGrads::to_tensors(const ModelParams& m, double scale) const {
  std::vector<Tensor> out;
  out.reserve(25);
  append_tensor(out, embed_src, m.embed_src.shape(), scale);
  append_tensor(out, embed_tgt, m.embed_tgt.shape(), scale);
  append_gru(out, gru_fwd, m.gru_fwd, scale);
  append_gru(out, gru_bwd, m.gru_bwd, scale);
  append_tensor(out, head_prod, m.head_prod.shape(), scale);
  append_tensor(out, head_diff, m.head_diff.shape(), scale);
  append_tensor(out, head_bias, m.head_bias.shape(), scale);
  append_tensor(out, out_w, m.out_w.shape(), scale);
  append_tensor(out, out_b, m.out_b.shape(), scale);
  return out;
}

PairResult pair_forward_backward(const ModelParams& m, const TrainingTriple& tr,
                                 const DropoutPlan& plan, ModelGrads& grads) {
  SentPass s, t;
  HeadPass h;
  forward_pair_impl(m, tr, plan, s, t, h);
  backward_pair(m, s, t, h, tr.label, grads);
  return {bce_loss(h.prob, tr.label), h.prob};
}

PairResult pair_forward(const ModelParams& m, const TrainingTriple& tr, const DropoutPlan& plan) {
  SentPass s, t;
  HeadPass h;
  forward_pair_impl(m, tr, plan, s, t, h);
  return {bce_loss(h.prob, tr.label), h.prob};
}

BatchResult forward_batch(const ModelParams& m, const std::vector<TrainingTriple>& batch,
                          RunMode mode, uint64_t seed, double drop_in, double drop_out) {
  if (batch.empty()) throw std::invalid_argument("forward_batch: batch is empty");
  BatchResult out;
  out.probs.reserve(batch.size());
  double loss_sum = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    DropoutPlan plan{drop_in, drop_out, mode, mix_seed(seed, i)};
    const PairResult r = pair_forward(m, batch[i], plan);
    out.probs.push_back(r.prob);
    loss_sum += r.loss;
  }
  out.mean_loss = loss_sum / static_cast<double>(batch.size());
  return out;
}

Tensor encode_sentence(const ModelParams& m, const EncodedSentence& s, bool is_source) {
  SentPass pass;
  DropoutPlan plan;  // eval, no dropout
  run_encoder(m, s, is_source, plan, nullptr, pass);
  Tensor out({2 * m.dims.state_dim});
  for (int64_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(pass.vec[static_cast<size_t>(i)]);
  }
  return out;
}

void match_vectors(const Tensor& a, const Tensor& b, Tensor& prod, Tensor& diff) {
  check_same_shape(a, b, "match_vectors");
  prod = Tensor(a.shape());
  diff = Tensor(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) {
    prod[i] = a[i] * b[i];
    diff[i] = std::abs(a[i] - b[i]);
  }
}

double score_pair(const ModelParams& m, const EncodedSentence& src, const EncodedSentence& tgt) {
  TrainingTriple tr{src, tgt, 0};
  SentPass s, t;
  HeadPass h;
  DropoutPlan plan;  // eval
  forward_pair_impl(m, tr, plan, s, t, h);
  return h.prob;
}

int predict(const ModelParams& m, const EncodedSentence& src, const EncodedSentence& tgt,
            double rho) {
  return score_pair(m, src, tgt) >= rho ? 1 : 0;
}

TrainHistory train_siamese(ModelParams& m, const ParallelCorpus& corpus, const HyperParams& h,
                           std::ostream* progress) {
  if (corpus.size() < 2) throw std::invalid_argument("train: need at least two corpus pairs");
  if (h.batch <= 0) throw std::invalid_argument("train: batch size must be positive");
  if (h.epochs < 0) throw std::invalid_argument("train: epochs must be non-negative");
  if (h.negatives < 0) throw std::invalid_argument("train: negatives must be non-negative");

  auto params = m.tensors();
  std::vector<const Tensor*> cparams;
  for (Tensor* t : params) cparams.push_back(t);
  AdamState adam = AdamState::create(cparams);
  AdamConfig acfg;
  acfg.lr = h.lr;

  TrainHistory hist;
  hist.triples_per_epoch = static_cast<int64_t>(corpus.size()) * (1 + h.negatives);
  ModelGrads grads;

  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const uint64_t epoch_seed = mix_seed(h.seed, static_cast<uint64_t>(epoch));
    auto triples = sample_negatives(corpus, h.negatives, epoch_seed);
    Rng shuffle_rng(mix_seed(epoch_seed, 0x9e3779b97f4a7c15ull));
    shuffle_rng.shuffle(triples);

    double loss_sum = 0.0;
    size_t idx = 0;
    while (idx < triples.size()) {
      const size_t bsz = std::min(static_cast<size_t>(h.batch), triples.size() - idx);
      grads.reset(m);
      for (size_t b = 0; b < bsz; ++b) {
        DropoutPlan plan{h.drop_in, h.drop_out, RunMode::kTrain,
                         mix_seed(epoch_seed, 0x517cc1b727220a95ull + idx + b)};
        loss_sum += pair_forward_backward(m, triples[idx + b], plan, grads).loss;
      }
      auto gts = grads.to_tensors(m, 1.0 / static_cast<double>(bsz));
      std::vector<Tensor*> gptrs;
      std::vector<const Tensor*> cgptrs;
      for (Tensor& g : gts) {
        gptrs.push_back(&g);
        cgptrs.push_back(&g);
      }
      clip_gradients(gptrs, h.clip_norm);
      adam_step(params, adam, cgptrs, acfg);
      idx += bsz;
    }
    const double mean_loss = loss_sum / static_cast<double>(triples.size());
    hist.epoch_loss.push_back(mean_loss);
    hist.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (progress) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "epoch %d/%d loss %.6f", epoch + 1, h.epochs, mean_loss);
      *progress << buf << '\n';
    }
  }
  return hist;
}

}  // namespace bitext
