#ifndef BITEXT_CHECKPOINT_HPP
#define BITEXT_CHECKPOINT_HPP

#include <map>
#include <string>
#include <vector>

#include "bitext/baseline.hpp"
#include "bitext/corpus.hpp"
#include "bitext/siamese.hpp"
#include "bitext/tensor.hpp"

namespace bitext {

inline constexpr const char* kCheckpointMagic = "BITEXTCKPT";
inline constexpr int kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// On disk: a text manifest, then raw little-endian float32 data.
//   BITEXTCKPT 1
//   meta <key> <value to end of line>
//   tensor <name> <ndims> <dim...> <byte offset into the payload>
//   end
// Saves are atomic; loads validate magic, version, shapes, offsets and
// finiteness and throw UsageError on any mismatch.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<NamedTensor> tensors;

  const Tensor* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Full scorer bundle. Vocabularies ride in sidecar files `path`.src.vocab
// and `path`.tgt.vocab; the manifest records dimensions and hyperparameters.
struct SiameseBundle {
  ModelParams model;
  HyperParams hyper;
  Vocabulary src_vocab;
  Vocabulary tgt_vocab;
};

void save_siamese(const std::string& path, const ModelParams& m, const HyperParams& h,
                  const Vocabulary& src_vocab, const Vocabulary& tgt_vocab);
SiameseBundle load_siamese(const std::string& path);

// Alignment-based scorer bundle: the classifier lives at `path` in
// checkpoint format; tables ride in sidecars .tfwd/.trev/.afwd/.arev plus
// the vocabulary pair. Dictionaries are re-derived from the tables on load.
struct BaselineBundle {
  MaxentModel maxent;
  TTable t_fwd, t_rev;
  ATable a_fwd, a_rev;
  Vocabulary src_vocab, tgt_vocab;
  DictionaryPair dicts;
};

void save_baseline(const std::string& path, const BaselineBundle& b);
BaselineBundle load_baseline(const std::string& path);

}  // namespace bitext

#endif  // BITEXT_CHECKPOINT_HPP
