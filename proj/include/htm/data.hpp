#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "htm/common.hpp"

namespace htm::data {

enum class Split { Train, Test };

struct LabeledItem {
  std::string id;
  std::vector<int> labels;  // sorted vocabulary indices, unique
  Split split = Split::Train;
};

struct LabeledDataset {
  std::vector<std::string> vocabulary;
  std::vector<LabeledItem> items;
  std::vector<long> counts;  // per-class positive count over all items

  void recount();
  std::vector<int> split_indices(Split which) const;
};

/// Row-major float storage so the on-disk EMB1 payload round-trips
/// bit-exactly. Numeric modules cast to double at their boundary.
struct EmbeddingSet {
  std::vector<std::string> ids;
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> matrix;

  Eigen::MatrixXd as_double() const { return matrix.cast<double>(); }
};

struct SynthConfig {
  int n_classes = 40;
  int dim = 64;
  int head_classes = 11;
  int medium_classes = 17;
  int tail_classes = 12;
  // Per-class sample targets by tier; jittered within +-20% so counts vary
  // but tiers never interleave.
  int head_samples = 2000;
  int medium_samples = 300;
  int tail_samples = 40;
  double cooccur_p = 0.35;  // P(item carries more than one label)
  double min_separation_deg = 45.0;
  double noise_scale = 0.4;  // expected noise norm relative to unit signal
  bool heavy_tail = true;    // t-distributed radial noise
  double nu_gen = 3.0;
  uint64_t seed = 0;

  void validate() const;
};

struct SynthResult {
  LabeledDataset dataset;
  EmbeddingSet embeddings;
  Eigen::MatrixXd class_directions;  // n_classes x dim unit rows
};

/// The 40 finding names used when n_classes == 40; other sizes get generic
/// names.
std::vector<std::string> default_vocabulary(int n_classes = 40);

SynthResult generate_synthetic_longtail(const SynthConfig& cfg);

/// "<name> is present, ..." joined in vocabulary order, lowercased.
/// The empty set maps to "no finding is present".
std::string generate_meta_text(const std::vector<int>& label_set,
                               const std::vector<std::string>& vocabulary);

/// Deterministic bag-of-tokens text embedding: each token hashes to a fixed
/// pseudo-random unit vector; the normalized sum is the prototype.
Eigen::VectorXd prototype_encode(std::string_view text, int dim,
                                 uint64_t seed);

/// One prototype per item, from the meta text of its label set. n x dim.
Eigen::MatrixXd item_prototypes(const LabeledDataset& dataset, int dim,
                                uint64_t seed);

/// One prototype per class, from "<class> is present". n_classes x dim.
Eigen::MatrixXd class_prompt_prototypes(
    const std::vector<std::string>& vocabulary, int dim, uint64_t seed);

// EMB1 container: "EMB1" magic, LE u32 n, LE u32 d, n*d LE float32 row-major,
// plus a "<path>.ids" sidecar with one id per line.
void save_embeddings(const EmbeddingSet& set, const std::string& path);
EmbeddingSet load_embeddings(const std::string& path);

// JSON Lines: {"id":...,"labels":[...],"split":"train"|"test"}.
void save_labels(const LabeledDataset& dataset, const std::string& path);
LabeledDataset load_labels(const std::string& labels_path,
                           const std::string& vocab_path);

void save_vocabulary(const std::vector<std::string>& vocabulary,
                     const std::string& path);
std::vector<std::string> load_vocabulary(const std::string& path);

}  // namespace htm::data
