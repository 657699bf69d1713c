#include "bitext/checkpoint.hpp"

#include <bit>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bitext/io.hpp"

namespace bitext {
namespace {

void write_le_floats(std::ostream& f, const float* data, int64_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    f.write(reinterpret_cast<const char*>(data), count * 4);
  } else {
    for (int64_t i = 0; i < count; ++i) {
      uint32_t bits;
      std::memcpy(&bits, data + i, 4);
      const char bytes[4] = {static_cast<char>(bits), static_cast<char>(bits >> 8),
                             static_cast<char>(bits >> 16), static_cast<char>(bits >> 24)};
      f.write(bytes, 4);
    }
  }
}

void read_le_floats(std::istream& f, float* data, int64_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    f.read(reinterpret_cast<char*>(data), count * 4);
  } else {
    for (int64_t i = 0; i < count; ++i) {
      unsigned char bytes[4];
      f.read(reinterpret_cast<char*>(bytes), 4);
      const uint32_t bits = static_cast<uint32_t>(bytes[0]) |
                            (static_cast<uint32_t>(bytes[1]) << 8) |
                            (static_cast<uint32_t>(bytes[2]) << 16) |
                            (static_cast<uint32_t>(bytes[3]) << 24);
      std::memcpy(data + i, &bits, 4);
    }
  }
}

std::vector<std::string> split_spaces(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

long long parse_ll(const std::string& s, const std::string& path) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw UsageError("checkpoint " + path + ": bad integer '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw UsageError("checkpoint " + path + ": bad number '" + s + "'");
  }
  return v;
}

uint64_t parse_u64(const std::string& s, const std::string& path) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw UsageError("checkpoint " + path + ": bad integer '" + s + "'");
  }
  return v;
}

const std::string& require_meta(const Checkpoint& c, const std::string& key,
                                const std::string& path) {
  const auto it = c.meta.find(key);
  if (it == c.meta.end()) throw UsageError("checkpoint " + path + ": missing meta key " + key);
  return it->second;
}

std::string basename_of(const std::string& path) {
  const size_t pos = path.find_last_of('/');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const NamedTensor& t : tensors) {
    if (t.name == name) return &t.tensor;
  }
  return nullptr;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  for (const auto& [key, value] : ckpt.meta) {
    if (key.find_first_of(" \t\n") != std::string::npos || key.empty()) {
      throw Error("checkpoint meta key must be a single word: '" + key + "'");
    }
    if (value.find('\n') != std::string::npos) {
      throw Error("checkpoint meta value must be one line: key " + key);
    }
  }
  for (const NamedTensor& t : ckpt.tensors) {
    if (t.name.find_first_of(" \t\n") != std::string::npos || t.name.empty()) {
      throw Error("checkpoint tensor name must be a single word: '" + t.name + "'");
    }
  }
  atomic_write(path, [&](std::ostream& f) {
    f << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
    for (const auto& [key, value] : ckpt.meta) f << "meta " << key << ' ' << value << '\n';
    int64_t offset = 0;
    for (const NamedTensor& t : ckpt.tensors) {
      f << "tensor " << t.name << ' ' << t.tensor.shape().size();
      for (int64_t d : t.tensor.shape()) f << ' ' << d;
      f << ' ' << offset << '\n';
      offset += t.tensor.size() * 4;
    }
    f << "end\n";
    for (const NamedTensor& t : ckpt.tensors) {
      write_le_floats(f, t.tensor.data(), t.tensor.size());
    }
  });
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open checkpoint: " + path);

  std::string line;
  if (!std::getline(f, line)) throw UsageError("checkpoint " + path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    const auto fields = split_spaces(line);
    if (fields.size() != 2 || fields[0] != kCheckpointMagic) {
      throw UsageError("checkpoint " + path + ": bad magic");
    }
    if (parse_ll(fields[1], path) != kCheckpointVersion) {
      throw UsageError("checkpoint " + path + ": unsupported format version " + fields[1]);
    }
  }

  Checkpoint ckpt;
  struct Entry {
    std::string name;
    std::vector<int64_t> shape;
    int64_t offset = 0;
  };
  std::vector<Entry> entries;
  bool saw_end = false;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "end") {
      saw_end = true;
      break;
    }
    if (line.rfind("meta ", 0) == 0) {
      const std::string rest = line.substr(5);
      const size_t sp = rest.find(' ');
      if (sp == std::string::npos || sp == 0) {
        throw UsageError("checkpoint " + path + ": malformed meta line");
      }
      ckpt.meta[rest.substr(0, sp)] = rest.substr(sp + 1);
      continue;
    }
    if (line.rfind("tensor ", 0) == 0) {
      const auto fields = split_spaces(line);
      if (fields.size() < 4) throw UsageError("checkpoint " + path + ": malformed tensor line");
      Entry e;
      e.name = fields[1];
      const long long ndims = parse_ll(fields[2], path);
      if (ndims < 1 || static_cast<size_t>(ndims) + 4 != fields.size()) {
        throw UsageError("checkpoint " + path + ": tensor line dimension count mismatch");
      }
      for (long long d = 0; d < ndims; ++d) {
        const long long dim = parse_ll(fields[3 + static_cast<size_t>(d)], path);
        if (dim < 1) throw UsageError("checkpoint " + path + ": non-positive dimension");
        e.shape.push_back(dim);
      }
      e.offset = parse_ll(fields.back(), path);
      if (e.offset < 0 || e.offset % 4 != 0) {
        throw UsageError("checkpoint " + path + ": bad tensor offset");
      }
      entries.push_back(std::move(e));
      continue;
    }
    throw UsageError("checkpoint " + path + ": unrecognized manifest line");
  }
  if (!saw_end) throw UsageError("checkpoint " + path + ": truncated manifest");

  const std::streampos payload_start = f.tellg();
  for (const Entry& e : entries) {
    Tensor t(e.shape);
    f.seekg(payload_start + static_cast<std::streamoff>(e.offset));
    read_le_floats(f, t.data(), t.size());
    if (!f) throw UsageError("checkpoint " + path + ": payload truncated at tensor " + e.name);
    if (!t.all_finite()) {
      throw UsageError("checkpoint " + path + ": non-finite values in tensor " + e.name);
    }
    ckpt.tensors.push_back({e.name, std::move(t)});
  }
  return ckpt;
}

void save_siamese(const std::string& path, const ModelParams& m, const HyperParams& h,
                  const Vocabulary& src_vocab, const Vocabulary& tgt_vocab) {
  if (static_cast<int64_t>(src_vocab.size()) != m.dims.src_vocab ||
      static_cast<int64_t>(tgt_vocab.size()) != m.dims.tgt_vocab) {
    throw Error("save: vocabulary sizes do not match embedding tables");
  }
  Checkpoint ckpt;
  ckpt.meta["kind"] = "siamese";
  ckpt.meta["src_vocab"] = std::to_string(m.dims.src_vocab);
  ckpt.meta["tgt_vocab"] = std::to_string(m.dims.tgt_vocab);
  ckpt.meta["embed_dim"] = std::to_string(m.dims.embed_dim);
  ckpt.meta["state_dim"] = std::to_string(m.dims.state_dim);
  ckpt.meta["hidden_dim"] = std::to_string(m.dims.hidden_dim);
  ckpt.meta["negatives"] = std::to_string(h.negatives);
  ckpt.meta["lr"] = format_g17(h.lr);
  ckpt.meta["batch"] = std::to_string(h.batch);
  ckpt.meta["epochs"] = std::to_string(h.epochs);
  ckpt.meta["clip_norm"] = format_g17(h.clip_norm);
  ckpt.meta["drop_in"] = format_g17(h.drop_in);
  ckpt.meta["drop_out"] = format_g17(h.drop_out);
  ckpt.meta["rho"] = format_g17(h.rho);
  ckpt.meta["seed"] = std::to_string(h.seed);
  ckpt.meta["src_vocab_file"] = basename_of(path) + ".src.vocab";
  ckpt.meta["tgt_vocab_file"] = basename_of(path) + ".tgt.vocab";

  const auto names = ModelParams::tensor_names();
  const auto tensors = m.tensors();
  for (size_t i = 0; i < names.size(); ++i) ckpt.tensors.push_back({names[i], *tensors[i]});

  src_vocab.save(path + ".src.vocab");
  tgt_vocab.save(path + ".tgt.vocab");
  save_checkpoint(path, ckpt);
}

SiameseBundle load_siamese(const std::string& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  if (require_meta(ckpt, "kind", path) != "siamese") {
    throw UsageError("checkpoint " + path + ": expected a siamese model, found kind '" +
                     ckpt.meta.at("kind") + "'");
  }
  ModelDims dims;
  dims.src_vocab = parse_ll(require_meta(ckpt, "src_vocab", path), path);
  dims.tgt_vocab = parse_ll(require_meta(ckpt, "tgt_vocab", path), path);
  dims.embed_dim = parse_ll(require_meta(ckpt, "embed_dim", path), path);
  dims.state_dim = parse_ll(require_meta(ckpt, "state_dim", path), path);
  dims.hidden_dim = parse_ll(require_meta(ckpt, "hidden_dim", path), path);
  if (dims.src_vocab < 1 || dims.tgt_vocab < 1 || dims.embed_dim < 1 || dims.state_dim < 1 ||
      dims.hidden_dim < 1) {
    throw UsageError("checkpoint " + path + ": non-positive model dimensions");
  }

  SiameseBundle bundle;
  bundle.hyper.negatives = static_cast<int>(parse_ll(require_meta(ckpt, "negatives", path), path));
  bundle.hyper.lr = parse_double(require_meta(ckpt, "lr", path), path);
  bundle.hyper.batch = static_cast<int>(parse_ll(require_meta(ckpt, "batch", path), path));
  bundle.hyper.epochs = static_cast<int>(parse_ll(require_meta(ckpt, "epochs", path), path));
  bundle.hyper.clip_norm = parse_double(require_meta(ckpt, "clip_norm", path), path);
  bundle.hyper.drop_in = parse_double(require_meta(ckpt, "drop_in", path), path);
  bundle.hyper.drop_out = parse_double(require_meta(ckpt, "drop_out", path), path);
  bundle.hyper.rho = parse_double(require_meta(ckpt, "rho", path), path);
  bundle.hyper.seed = parse_u64(require_meta(ckpt, "seed", path), path);

  bundle.model = ModelParams::create(dims, 0);
  const auto names = ModelParams::tensor_names();
  const auto slots = bundle.model.tensors();
  for (size_t i = 0; i < names.size(); ++i) {
    const Tensor* found = ckpt.find(names[i]);
    if (!found) throw UsageError("checkpoint " + path + ": missing tensor " + names[i]);
    if (!found->same_shape(*slots[i])) {
      throw UsageError("checkpoint " + path + ": tensor " + names[i] + " has shape " +
                       found->shape_str() + ", expected " + slots[i]->shape_str());
    }
    *slots[i] = *found;
  }

  bundle.src_vocab = Vocabulary::load(path + ".src.vocab");
  bundle.tgt_vocab = Vocabulary::load(path + ".tgt.vocab");
  if (static_cast<int64_t>(bundle.src_vocab.size()) != dims.src_vocab ||
      static_cast<int64_t>(bundle.tgt_vocab.size()) != dims.tgt_vocab) {
    throw UsageError("checkpoint " + path + ": vocabulary sidecars do not match model dimensions");
  }
  return bundle;
}

void save_baseline(const std::string& path, const BaselineBundle& b) {
  Checkpoint ckpt;
  ckpt.meta["kind"] = "baseline";
  ckpt.meta["features"] = std::to_string(kFeatureCount);
  Tensor w({kFeatureCount}), bias({1}), mean({kFeatureCount}), stdev({kFeatureCount});
  if (b.maxent.w.size() != kFeatureCount || b.maxent.mean.size() != kFeatureCount ||
      b.maxent.stdev.size() != kFeatureCount) {
    throw Error("save: classifier has wrong dimension");
  }
  for (int f = 0; f < kFeatureCount; ++f) {
    w[f] = static_cast<float>(b.maxent.w[f]);
    mean[f] = static_cast<float>(b.maxent.mean[f]);
    stdev[f] = static_cast<float>(b.maxent.stdev[f]);
  }
  bias[0] = static_cast<float>(b.maxent.b);
  ckpt.tensors.push_back({"weights", std::move(w)});
  ckpt.tensors.push_back({"bias", std::move(bias)});
  ckpt.tensors.push_back({"feature_mean", std::move(mean)});
  ckpt.tensors.push_back({"feature_stdev", std::move(stdev)});

  save_ttable(b.t_fwd, b.src_vocab, b.tgt_vocab, path + ".tfwd");
  save_ttable(b.t_rev, b.tgt_vocab, b.src_vocab, path + ".trev");
  save_atable(b.a_fwd, path + ".afwd");
  save_atable(b.a_rev, path + ".arev");
  b.src_vocab.save(path + ".src.vocab");
  b.tgt_vocab.save(path + ".tgt.vocab");
  save_checkpoint(path, ckpt);
}

BaselineBundle load_baseline(const std::string& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  if (require_meta(ckpt, "kind", path) != "baseline") {
    throw UsageError("checkpoint " + path + ": expected a baseline model, found kind '" +
                     ckpt.meta.at("kind") + "'");
  }
  BaselineBundle b;
  const Tensor* w = ckpt.find("weights");
  const Tensor* bias = ckpt.find("bias");
  const Tensor* mean = ckpt.find("feature_mean");
  const Tensor* stdev = ckpt.find("feature_stdev");
  if (!w || !bias || !mean || !stdev || w->size() != kFeatureCount || bias->size() != 1 ||
      mean->size() != kFeatureCount || stdev->size() != kFeatureCount) {
    throw UsageError("checkpoint " + path + ": classifier tensors missing or mis-shaped");
  }
  b.maxent.w.assign(kFeatureCount, 0.0);
  b.maxent.mean.assign(kFeatureCount, 0.0);
  b.maxent.stdev.assign(kFeatureCount, 1.0);
  for (int f = 0; f < kFeatureCount; ++f) {
    b.maxent.w[f] = (*w)[f];
    b.maxent.mean[f] = (*mean)[f];
    b.maxent.stdev[f] = (*stdev)[f];
  }
  b.maxent.b = (*bias)[0];

  b.src_vocab = Vocabulary::load(path + ".src.vocab");
  b.tgt_vocab = Vocabulary::load(path + ".tgt.vocab");
  b.t_fwd = load_ttable(path + ".tfwd", b.src_vocab, b.tgt_vocab);
  b.t_rev = load_ttable(path + ".trev", b.tgt_vocab, b.src_vocab);
  b.a_fwd = load_atable(path + ".afwd");
  b.a_rev = load_atable(path + ".arev");
  b.dicts.fwd = infer_dictionary(b.t_fwd);
  b.dicts.rev = infer_dictionary(b.t_rev);
  return b;
}

}  // namespace bitext
