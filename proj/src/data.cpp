#include "htm/data.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace htm::data {

using json = nlohmann::json;

void LabeledDataset::recount() {
  counts.assign(vocabulary.size(), 0);
  for (const auto& item : items) {
    for (int c : item.labels) {
      counts[static_cast<size_t>(c)]++;
    }
  }
}

std::vector<int> LabeledDataset::split_indices(Split which) const {
  std::vector<int> out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i].split == which) out.push_back(static_cast<int>(i));
  }
  return out;
}

void SynthConfig::validate() const {
  if (n_classes < 1 || dim < 1) {
    raise(ErrorCode::InvalidConfig, "n_classes and dim must be positive");
  }
  if (head_classes + medium_classes + tail_classes != n_classes) {
    raise(ErrorCode::InvalidConfig, "tier class counts must sum to n_classes");
  }
  if (head_samples < 1 || medium_samples < 1 || tail_samples < 1) {
    raise(ErrorCode::InvalidConfig, "tier sample targets must be positive");
  }
  if (cooccur_p < 0.0 || cooccur_p > 1.0) {
    raise(ErrorCode::InvalidConfig, "cooccur_p must be in [0,1]");
  }
  if (noise_scale < 0.0) {
    raise(ErrorCode::InvalidConfig, "noise_scale must be nonnegative");
  }
  if (heavy_tail && nu_gen <= 0.0) {
    raise(ErrorCode::InvalidConfig, "nu_gen must be positive");
  }
}

std::vector<std::string> default_vocabulary(int n_classes) {
  static const std::vector<std::string> kFindings = {
      "Adenopathy",
      "Atelectasis",
      "Azygos Lobe",
      "Calcification of the Aorta",
      "Cardiomegaly",
      "Clavicle Fracture",
      "Consolidation",
      "Edema",
      "Emphysema",
      "Enlarged Cardiomediastinum",
      "Fibrosis",
      "Fissure",
      "Fracture",
      "Granuloma",
      "Hernia",
      "Hydropneumothorax",
      "Infarction",
      "Infiltration",
      "Kyphosis",
      "Lobar Atelectasis",
      "Lung Lesion",
      "Lung Opacity",
      "Mass",
      "No Finding",
      "Nodule",
      "Pleural Effusion",
      "Pleural Other",
      "Pleural Thickening",
      "Pneumomediastinum",
      "Pneumonia",
      "Pneumoperitoneum",
      "Pneumothorax",
      "Pulmonary Embolism",
      "Pulmonary Hypertension",
      "Rib Fracture",
      "Rounded Atelectasis",
      "Subcutaneous Emphysema",
      "Support Devices",
      "Tortuous Aorta",
      "Tuberculosis",
  };
  if (n_classes == static_cast<int>(kFindings.size())) return kFindings;
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(n_classes));
  for (int i = 0; i < n_classes; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "Finding %02d", i);
    names.emplace_back(buf);
  }
  return names;
}

namespace {

Eigen::MatrixXd sample_directions(const SynthConfig& cfg, SplitMix64& rng) {
  const double cos_limit =
      std::cos(cfg.min_separation_deg * std::numbers::pi / 180.0);
  Eigen::MatrixXd dirs(cfg.n_classes, cfg.dim);
  for (int c = 0; c < cfg.n_classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Eigen::VectorXd v(cfg.dim);
      for (int j = 0; j < cfg.dim; ++j) v[j] = rng.normal();
      const double norm = v.norm();
      if (norm < 1e-12) continue;
      v /= norm;
      bool ok = true;
      for (int prev = 0; prev < c; ++prev) {
        if (std::abs(dirs.row(prev).dot(v)) > cos_limit) {
          ok = false;
          break;
        }
      }
      if (ok) {
        dirs.row(c) = v;
        placed = true;
        break;
      }
    }
    if (!placed) {
      raise(ErrorCode::SeparationUnsatisfiable,
            "could not place class direction " + std::to_string(c) +
                " with min separation " +
                std::to_string(cfg.min_separation_deg) + " deg");
    }
  }
  return dirs;
}

}  // namespace

SynthResult generate_synthetic_longtail(const SynthConfig& cfg) {
  cfg.validate();
  SplitMix64 rng(cfg.seed);

  SynthResult out;
  out.dataset.vocabulary = default_vocabulary(cfg.n_classes);
  out.class_directions = sample_directions(cfg, rng);

  // Tier assignment: a seeded permutation so prevalence is not tied to
  // vocabulary order.
  std::vector<int> perm(static_cast<size_t>(cfg.n_classes));
  for (int i = 0; i < cfg.n_classes; ++i) perm[static_cast<size_t>(i)] = i;
  rng.shuffle(perm);

  std::vector<long> quota(static_cast<size_t>(cfg.n_classes), 0);
  for (int rank = 0; rank < cfg.n_classes; ++rank) {
    int base;
    if (rank < cfg.head_classes) {
      base = cfg.head_samples;
    } else if (rank < cfg.head_classes + cfg.medium_classes) {
      base = cfg.medium_samples;
    } else {
      base = cfg.tail_samples;
    }
    const double jitter = 0.8 + 0.4 * rng.uniform();
    quota[static_cast<size_t>(perm[static_cast<size_t>(rank)])] =
        std::max<long>(1, std::lround(base * jitter));
  }

  std::vector<long> remaining = quota;
  long total_remaining = 0;
  for (long q : remaining) total_remaining += q;

  // Items draw 1-3 distinct labels, class picked proportionally to its
  // remaining quota, so final per-class counts equal the quotas exactly.
  std::vector<std::string> group_of_item;
  int group_index = 0;
  int within_group = 0;
  while (total_remaining > 0) {
    int want = 1;
    if (rng.uniform() < cfg.cooccur_p) {
      want = rng.uniform() < (1.0 / 3.0) ? 3 : 2;
    }
    std::vector<int> labels;
    for (int pick = 0; pick < want; ++pick) {
      long pool = 0;
      for (int c = 0; c < cfg.n_classes; ++c) {
        if (std::find(labels.begin(), labels.end(), c) == labels.end()) {
          pool += remaining[static_cast<size_t>(c)];
        }
      }
      if (pool <= 0) break;
      const double r = rng.uniform() * static_cast<double>(pool);
      double acc = 0.0;
      int chosen = -1;
      for (int c = 0; c < cfg.n_classes; ++c) {
        if (remaining[static_cast<size_t>(c)] <= 0) continue;
        if (std::find(labels.begin(), labels.end(), c) != labels.end()) {
          continue;
        }
        acc += static_cast<double>(remaining[static_cast<size_t>(c)]);
        if (r < acc) {
          chosen = c;
          break;
        }
      }
      if (chosen < 0) {
        for (int c = cfg.n_classes - 1; c >= 0; --c) {
          if (remaining[static_cast<size_t>(c)] > 0 &&
              std::find(labels.begin(), labels.end(), c) == labels.end()) {
            chosen = c;
            break;
          }
        }
      }
      if (chosen < 0) break;
      labels.push_back(chosen);
      remaining[static_cast<size_t>(chosen)]--;
      total_remaining--;
    }
    std::sort(labels.begin(), labels.end());

    // Group structure stands in for patients: ~2 items per group.
    if (within_group == 0 || rng.uniform() < 0.5) {
      group_index++;
      within_group = 0;
    }
    within_group++;
    char id[40];
    std::snprintf(id, sizeof(id), "p%06d_s%d", group_index, within_group);

    LabeledItem item;
    item.id = id;
    item.labels = std::move(labels);
    out.dataset.items.push_back(std::move(item));
    group_of_item.emplace_back("p" + std::to_string(group_index));
  }

  // Embeddings: normalized sum of class directions plus noise. Heavy-tail
  // mode scales the whole noise vector by a per-item t factor.
  const size_t n = out.dataset.items.size();
  Eigen::MatrixXd emb(n, cfg.dim);
  const double coord_scale = cfg.noise_scale / std::sqrt(cfg.dim);
  for (size_t i = 0; i < n; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(cfg.dim);
    for (int c : out.dataset.items[i].labels) {
      v += out.class_directions.row(c).transpose();
    }
    const double norm = v.norm();
    if (norm > 1e-12) v /= norm;
    if (cfg.noise_scale > 0.0) {
      Eigen::VectorXd g(cfg.dim);
      for (int j = 0; j < cfg.dim; ++j) g[j] = rng.normal();
      double radial = 1.0;
      if (cfg.heavy_tail) {
        radial = std::sqrt(cfg.nu_gen / rng.chi_squared(cfg.nu_gen));
      }
      v += coord_scale * radial * g;
    }
    emb.row(i) = v;
  }

  // 80:20 split over groups; groups never straddle the boundary.
  std::vector<std::string> groups;
  std::map<std::string, int> first_seen;
  for (const auto& g : group_of_item) {
    if (first_seen.emplace(g, 1).second) groups.push_back(g);
  }
  rng.shuffle(groups);
  const size_t n_test = static_cast<size_t>(
      std::lround(0.2 * static_cast<double>(groups.size())));
  std::set<std::string> test_groups(groups.begin(),
                                    groups.begin() + static_cast<long>(n_test));
  for (size_t i = 0; i < n; ++i) {
    out.dataset.items[i].split = test_groups.count(group_of_item[i])
                                     ? Split::Test
                                     : Split::Train;
  }

  out.dataset.recount();
  out.embeddings.ids.reserve(n);
  for (const auto& item : out.dataset.items) {
    out.embeddings.ids.push_back(item.id);
  }
  out.embeddings.matrix = emb.cast<float>();
  return out;
}

std::string generate_meta_text(const std::vector<int>& label_set,
                               const std::vector<std::string>& vocabulary) {
  if (label_set.empty()) return "no finding is present";
  std::vector<int> sorted = label_set;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::string out;
  for (size_t i = 0; i < sorted.size(); ++i) {
    const int c = sorted[i];
    if (c < 0 || c >= static_cast<int>(vocabulary.size())) {
      raise(ErrorCode::UnknownLabel,
            "label index " + std::to_string(c) + " outside vocabulary");
    }
    std::string name = vocabulary[static_cast<size_t>(c)];
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) {
      return static_cast<char>(std::tolower(ch));
    });
    if (i > 0) out += ", ";
    out += name + " is present";
  }
  return out;
}

Eigen::VectorXd prototype_encode(std::string_view text, int dim,
                                 uint64_t seed) {
  if (dim < 1) raise(ErrorCode::InvalidConfig, "prototype dim must be >= 1");

  // Tokenize on any non-alphanumeric byte; lowercase.
  std::vector<std::string> tokens;
  std::string current;
  for (char raw : text) {
    const auto ch = static_cast<unsigned char>(raw);
    if (std::isalnum(ch)) {
      current.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  if (tokens.empty()) {
    sum[0] = 1.0;
    return sum;
  }

  // Sum in hash order so the bag is insensitive to token order bit-for-bit.
  std::vector<std::pair<uint64_t, std::string>> keyed;
  keyed.reserve(tokens.size());
  for (auto& t : tokens) keyed.emplace_back(fnv1a64(t), std::move(t));
  std::sort(keyed.begin(), keyed.end());

  for (const auto& [hash, token] : keyed) {
    SplitMix64 stream(mix64(seed, hash));
    Eigen::VectorXd v(dim);
    for (int j = 0; j < dim; ++j) v[j] = stream.normal();
    const double norm = v.norm();
    if (norm > 1e-12) v /= norm;
    sum += v;
  }
  const double norm = sum.norm();
  if (norm > 1e-12) {
    sum /= norm;
  } else {
    sum.setZero();
    sum[0] = 1.0;
  }
  return sum;
}

Eigen::MatrixXd item_prototypes(const LabeledDataset& dataset, int dim,
                                uint64_t seed) {
  Eigen::MatrixXd protos(dataset.items.size(), dim);
  std::map<std::vector<int>, Eigen::VectorXd> cache;
  for (size_t i = 0; i < dataset.items.size(); ++i) {
    const auto& labels = dataset.items[i].labels;
    auto it = cache.find(labels);
    if (it == cache.end()) {
      const std::string text = generate_meta_text(labels, dataset.vocabulary);
      it = cache.emplace(labels, prototype_encode(text, dim, seed)).first;
    }
    protos.row(i) = it->second.transpose();
  }
  return protos;
}

Eigen::MatrixXd class_prompt_prototypes(
    const std::vector<std::string>& vocabulary, int dim, uint64_t seed) {
  Eigen::MatrixXd protos(vocabulary.size(), dim);
  for (size_t c = 0; c < vocabulary.size(); ++c) {
    const std::string text =
        generate_meta_text({static_cast<int>(c)}, vocabulary);
    protos.row(c) = prototype_encode(text, dim, seed).transpose();
  }
  return protos;
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_u32_le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path);
  out.write(bytes.data(), static_cast<long>(bytes.size()));
  if (!out) raise(ErrorCode::IoError, "short write to " + path);
}

Split parse_split(const std::string& s, size_t line_no) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  raise(ErrorCode::MalformedLine,
        "line " + std::to_string(line_no) + ": unknown split '" + s + "'");
}

}  // namespace

void save_embeddings(const EmbeddingSet& set, const std::string& path) {
  if (set.ids.size() != static_cast<size_t>(set.matrix.rows())) {
    raise(ErrorCode::CountMismatch, "ids/rows mismatch in embedding set");
  }
  std::string payload;
  payload.append(kMagic, 4);
  put_u32_le(payload, static_cast<uint32_t>(set.matrix.rows()));
  put_u32_le(payload, static_cast<uint32_t>(set.matrix.cols()));
  // Row-major float32 block; x86/ARM little-endian layout is the format.
  const size_t bytes =
      static_cast<size_t>(set.matrix.size()) * sizeof(float);
  payload.append(reinterpret_cast<const char*>(set.matrix.data()), bytes);
  write_file_bytes(path, payload);

  std::string ids;
  for (const auto& id : set.ids) {
    ids += id;
    ids += '\n';
  }
  write_file_bytes(path + ".ids", ids);
}

EmbeddingSet load_embeddings(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    raise(ErrorCode::BadMagic, path + ": not an EMB1 file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const uint32_t n = get_u32_le(p + 4);
  const uint32_t d = get_u32_le(p + 8);
  const size_t expected = 12 + static_cast<size_t>(n) * d * sizeof(float);
  if (bytes.size() != expected) {
    raise(ErrorCode::TruncatedFile,
          path + ": expected " + std::to_string(expected) + " bytes, found " +
              std::to_string(bytes.size()));
  }
  EmbeddingSet set;
  set.matrix.resize(n, d);
  std::memcpy(set.matrix.data(), bytes.data() + 12,
              static_cast<size_t>(n) * d * sizeof(float));

  std::ifstream ids_in(path + ".ids");
  if (!ids_in) raise(ErrorCode::IoError, "cannot open " + path + ".ids");
  std::string line;
  while (std::getline(ids_in, line)) set.ids.push_back(line);
  if (set.ids.size() != n) {
    raise(ErrorCode::CountMismatch,
          path + ".ids has " + std::to_string(set.ids.size()) +
              " ids for " + std::to_string(n) + " rows");
  }
  return set;
}

void save_labels(const LabeledDataset& dataset, const std::string& path) {
  std::string out;
  for (const auto& item : dataset.items) {
    json names = json::array();
    for (int c : item.labels) {
      if (c < 0 || c >= static_cast<int>(dataset.vocabulary.size())) {
        raise(ErrorCode::UnknownLabel,
              "label index " + std::to_string(c) + " outside vocabulary");
      }
      names.push_back(dataset.vocabulary[static_cast<size_t>(c)]);
    }
    const json line = {{"id", item.id},
                       {"labels", names},
                       {"split", item.split == Split::Train ? "train" : "test"}};
    out += line.dump();
    out += '\n';
  }
  write_file_bytes(path, out);
}

LabeledDataset load_labels(const std::string& labels_path,
                           const std::string& vocab_path) {
  LabeledDataset dataset;
  dataset.vocabulary = load_vocabulary(vocab_path);
  std::map<std::string, int> vocab_index;
  for (size_t c = 0; c < dataset.vocabulary.size(); ++c) {
    vocab_index[dataset.vocabulary[c]] = static_cast<int>(c);
  }

  std::ifstream in(labels_path);
  if (!in) raise(ErrorCode::IoError, "cannot open " + labels_path);
  std::set<std::string> seen_ids;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      raise(ErrorCode::MalformedLine,
            "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("labels") ||
        !obj.contains("split") || !obj["id"].is_string() ||
        !obj["labels"].is_array() || !obj["split"].is_string()) {
      raise(ErrorCode::MalformedLine,
            "line " + std::to_string(line_no) +
                ": expected {id, labels, split}");
    }
    LabeledItem item;
    item.id = obj["id"].get<std::string>();
    if (!seen_ids.insert(item.id).second) {
      raise(ErrorCode::DuplicateId, "duplicate id '" + item.id + "'");
    }
    for (const auto& name : obj["labels"]) {
      if (!name.is_string()) {
        raise(ErrorCode::MalformedLine,
              "line " + std::to_string(line_no) + ": labels must be strings");
      }
      const auto it = vocab_index.find(name.get<std::string>());
      if (it == vocab_index.end()) {
        raise(ErrorCode::UnknownLabel,
              "unknown label '" + name.get<std::string>() + "' at line " +
                  std::to_string(line_no));
      }
      item.labels.push_back(it->second);
    }
    std::sort(item.labels.begin(), item.labels.end());
    item.labels.erase(std::unique(item.labels.begin(), item.labels.end()),
                      item.labels.end());
    item.split = parse_split(obj["split"].get<std::string>(), line_no);
    dataset.items.push_back(std::move(item));
  }
  dataset.recount();
  return dataset;
}

void save_vocabulary(const std::vector<std::string>& vocabulary,
                     const std::string& path) {
  std::string out;
  for (const auto& name : vocabulary) {
    out += name;
    out += '\n';
  }
  write_file_bytes(path, out);
}

std::vector<std::string> load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::string> vocab;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!seen.insert(line).second) {
      raise(ErrorCode::DuplicateId, "duplicate class name '" + line + "'");
    }
    vocab.push_back(line);
  }
  if (vocab.empty()) raise(ErrorCode::MalformedLine, path + " is empty");
  return vocab;
}

}  // namespace htm::data
