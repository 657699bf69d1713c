#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>
#include <utility>

#include "bitext/checkpoint.hpp"
#include "bitext/cli.hpp"
#include "bitext/corpus.hpp"
#include "bitext/eval.hpp"
#include "bitext/extraction.hpp"
#include "bitext/siamese.hpp"

namespace py = pybind11;

namespace {

// Scores raw sentence strings against a loaded checkpoint of either kind.
class Scorer {
 public:
  explicit Scorer(const std::string& path) {
    const bitext::Checkpoint ckpt = bitext::load_checkpoint(path);
    const auto it = ckpt.meta.find("kind");
    if (it == ckpt.meta.end()) {
      throw bitext::UsageError("checkpoint has no kind entry: " + path);
    }
    kind_ = it->second;
    if (kind_ == "siamese") {
      siamese_ = std::make_unique<bitext::SiameseBundle>(bitext::load_siamese(path));
      scorer_ = std::make_unique<bitext::BirnnScorer>(&siamese_->model);
    } else if (kind_ == "baseline") {
      baseline_ = std::make_unique<bitext::BaselineBundle>(bitext::load_baseline(path));
      scorer_ = std::make_unique<bitext::BaselineScorer>(baseline_.get());
    } else {
      throw bitext::UsageError("unknown checkpoint kind: " + kind_);
    }
  }

  double score(const std::string& src, const std::string& tgt) const {
    return scorer_->score(encode_side(src, true), encode_side(tgt, false));
  }

  int predict(const std::string& src, const std::string& tgt, double rho) const {
    return score(src, tgt) >= rho ? 1 : 0;
  }

  const std::string& kind() const { return kind_; }

 private:
  bitext::EncodedSentence encode_side(const std::string& text, bool is_src) const {
    const bitext::Vocabulary& vocab =
        siamese_ ? (is_src ? siamese_->src_vocab : siamese_->tgt_vocab)
                 : (is_src ? baseline_->src_vocab : baseline_->tgt_vocab);
    return bitext::encode(bitext::tokenize(text), vocab);
  }

  std::string kind_;
  std::unique_ptr<bitext::SiameseBundle> siamese_;
  std::unique_ptr<bitext::BaselineBundle> baseline_;
  std::unique_ptr<bitext::PairScorer> scorer_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "parallel sentence extraction toolkit";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const bitext::UsageError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const bitext::Error& e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    }
  });

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = bitext::cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"),
      "Run one CLI command (program name excluded). Returns (exit_code, stdout, stderr).");

  m.def("tokenize", &bitext::tokenize, py::arg("text"),
        "Lowercase and split a sentence into tokens.");

  m.def(
      "bleu",
      [](const std::vector<std::vector<std::string>>& candidates,
         const std::vector<std::vector<std::string>>& references, int max_n) {
        return bitext::bleu(candidates, references, max_n);
      },
      py::arg("candidates"), py::arg("references"), py::arg("max_n") = 4,
      "Corpus-level BLEU over tokenized sentences, no smoothing.");

  m.def(
      "precision_recall_f1",
      [](const std::vector<std::pair<int, int>>& predicted,
         const std::vector<std::pair<int, int>>& gold) {
        const bitext::Metrics r = bitext::precision_recall_f1(
            bitext::PairSet(predicted.begin(), predicted.end()),
            bitext::PairSet(gold.begin(), gold.end()));
        return py::make_tuple(r.precision, r.recall, r.f1);
      },
      py::arg("predicted"), py::arg("gold"),
      "Precision, recall and F1 of predicted index pairs against gold pairs.");

  py::class_<Scorer>(m, "Scorer", "Sentence-pair scorer backed by a trained checkpoint.")
      .def(py::init<const std::string&>(), py::arg("path"))
      .def("score", &Scorer::score, py::arg("src"), py::arg("tgt"),
           "Match probability for a raw sentence pair.")
      .def("predict", &Scorer::predict, py::arg("src"), py::arg("tgt"), py::arg("rho") = 0.99,
           "1 if score(src, tgt) >= rho else 0.")
      .def_property_readonly("kind", &Scorer::kind);
}
