#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "noisebench/core/errors.hpp"
#include "noisebench/core/rng.hpp"

namespace noisebench {

enum class Split { train, test };

inline std::string split_name(Split s) { return s == Split::train ? "train" : "test"; }

struct SampleRecord {
  std::string sample_id;
  std::string path;
  int label = 0;  // clean label
  Split split = Split::train;
  std::optional<int> fold;
  std::optional<int> observed_label;  // present after noise injection

  int training_label() const { return observed_label.value_or(label); }
};

// One experimental dataset view. Immutable by convention after validate().
struct DatasetManifest {
  std::vector<SampleRecord> records;
  std::vector<std::string> class_names;
  int num_classes = 0;

  std::size_t train_count() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const SampleRecord& r) {
      return r.split == Split::train;
    }));
  }
  std::size_t test_count() const { return records.size() - train_count(); }

  std::vector<std::size_t> train_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < records.size(); ++i)
      if (records[i].split == Split::train) idx.push_back(i);
    return idx;
  }

  bool has_observed_labels() const {
    return std::any_of(records.begin(), records.end(),
                       [](const SampleRecord& r) { return r.observed_label.has_value(); });
  }

  void validate() const {
    if (num_classes <= 0) throw DataError("manifest: num_classes must be positive");
    if (static_cast<int>(class_names.size()) != num_classes)
      throw DataError("manifest: class_names size does not match num_classes");
    std::unordered_set<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) {
      if (r.label < 0 || r.label >= num_classes)
        throw DataError("manifest: label " + std::to_string(r.label) + " out of range for sample '" +
                        r.sample_id + "' (num_classes=" + std::to_string(num_classes) + ")");
      if (r.observed_label && (*r.observed_label < 0 || *r.observed_label >= num_classes))
        throw DataError("manifest: observed_label out of range for sample '" + r.sample_id + "'");
      if (!ids.insert(r.sample_id).second)
        throw DataError("manifest: duplicate sample_id '" + r.sample_id + "'");
      if (r.split == Split::test && r.fold)
        throw DataError("manifest: test sample '" + r.sample_id + "' carries a fold assignment");
    }
  }

  std::vector<std::size_t> train_class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (const auto& r : records)
      if (r.split == Split::train) counts[static_cast<std::size_t>(r.label)]++;
    return counts;
  }
};

struct GroupingMap {
  std::vector<std::string> group_names;
  std::map<int, int> assignment;  // original class index -> group index

  int num_groups() const { return static_cast<int>(group_names.size()); }
};

struct ClassWeights {
  std::vector<double> weights;  // one per class, largest class = 1.0
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline int parse_int_field(const std::string& s, const std::string& what, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    throw DataError("manifest line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

}  // namespace detail

// Manifest file: UTF-8 CSV, header `sample_id,path,label,split` with optional
// trailing `fold` and `observed_label` columns. Leading `# key: value` comment
// lines carry class names; without them classes are inferred from labels.
inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest: cannot open '" + path + "'");

  DatasetManifest m;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool has_fold_col = false, has_observed_col = false;
  int declared_classes = -1;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        const std::string key = detail::trim(line.substr(1, colon - 1));
        const std::string val = detail::trim(line.substr(colon + 1));
        if (key == "class_names") {
          for (const auto& name : detail::split_csv_line(val)) m.class_names.push_back(detail::trim(name));
          declared_classes = static_cast<int>(m.class_names.size());
        } else if (key == "num_classes") {
          declared_classes = detail::parse_int_field(val, "num_classes", line_no);
        }
      }
      continue;
    }
    const auto fields = detail::split_csv_line(line);
    if (!header_seen) {
      if (fields.size() < 4 || fields[0] != "sample_id" || fields[1] != "path" || fields[2] != "label" ||
          fields[3] != "split")
        throw DataError("manifest line " + std::to_string(line_no) +
                        ": expected header 'sample_id,path,label,split[,fold][,observed_label]'");
      for (std::size_t i = 4; i < fields.size(); ++i) {
        if (fields[i] == "fold" && !has_observed_col)
          has_fold_col = true;
        else if (fields[i] == "observed_label")
          has_observed_col = true;
        else
          throw DataError("manifest line " + std::to_string(line_no) + ": unknown column '" + fields[i] + "'");
      }
      header_seen = true;
      continue;
    }
    const std::size_t expected = 4 + (has_fold_col ? 1 : 0) + (has_observed_col ? 1 : 0);
    if (fields.size() != expected)
      throw DataError("manifest line " + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                      " fields, got " + std::to_string(fields.size()));
    SampleRecord r;
    r.sample_id = fields[0];
    r.path = fields[1];
    r.label = detail::parse_int_field(fields[2], "label", line_no);
    if (fields[3] == "train")
      r.split = Split::train;
    else if (fields[3] == "test")
      r.split = Split::test;
    else
      throw DataError("manifest line " + std::to_string(line_no) + ": bad split '" + fields[3] + "'");
    std::size_t col = 4;
    if (has_fold_col) {
      const std::string f = fields[col++];
      if (!f.empty()) r.fold = detail::parse_int_field(f, "fold", line_no);
    }
    if (has_observed_col) {
      const std::string o = fields[col++];
      if (!o.empty()) r.observed_label = detail::parse_int_field(o, "observed_label", line_no);
    }
    m.records.push_back(std::move(r));
  }
  if (!header_seen) throw DataError("manifest: '" + path + "' has no header");

  if (declared_classes >= 0) {
    m.num_classes = declared_classes;
    if (m.class_names.empty())
      for (int k = 0; k < m.num_classes; ++k) m.class_names.push_back("class_" + std::to_string(k));
  } else {
    int max_label = -1;
    for (const auto& r : m.records) max_label = std::max(max_label, r.label);
    m.num_classes = max_label + 1;
    for (int k = 0; k < m.num_classes; ++k) m.class_names.push_back("class_" + std::to_string(k));
  }
  m.validate();
  return m;
}

inline void save_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("manifest: cannot write '" + path + "'");
  out << "# class_names: ";
  for (std::size_t i = 0; i < m.class_names.size(); ++i) out << (i ? "," : "") << m.class_names[i];
  out << "\n";
  const bool any_fold =
      std::any_of(m.records.begin(), m.records.end(), [](const SampleRecord& r) { return r.fold.has_value(); });
  const bool any_obs = m.has_observed_labels();
  out << "sample_id,path,label,split";
  if (any_fold) out << ",fold";
  if (any_obs) out << ",observed_label";
  out << "\n";
  for (const auto& r : m.records) {
    out << r.sample_id << ',' << r.path << ',' << r.label << ',' << split_name(r.split);
    if (any_fold) out << ',' << (r.fold ? std::to_string(*r.fold) : "");
    if (any_obs) out << ',' << (r.observed_label ? std::to_string(*r.observed_label) : "");
    out << "\n";
  }
  if (!out) throw DataError("manifest: write failed for '" + path + "'");
}

// Grouping file: header `original_class,group`; original class names resolved
// against the manifest's class_names, group indices by first appearance.
inline GroupingMap load_grouping(const std::string& path, const std::vector<std::string>& class_names) {
  std::ifstream in(path);
  if (!in) throw DataError("grouping: cannot open '" + path + "'");
  std::unordered_map<std::string, int> class_index;
  for (std::size_t i = 0; i < class_names.size(); ++i) class_index[class_names[i]] = static_cast<int>(i);

  GroupingMap g;
  std::unordered_map<std::string, int> group_index;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto fields = detail::split_csv_line(line);
    if (!header_seen) {
      if (fields.size() != 2 || fields[0] != "original_class" || fields[1] != "group")
        throw DataError("grouping line " + std::to_string(line_no) + ": expected header 'original_class,group'");
      header_seen = true;
      continue;
    }
    if (fields.size() != 2)
      throw DataError("grouping line " + std::to_string(line_no) + ": expected 2 fields");
    const std::string cls = detail::trim(fields[0]);
    const std::string grp = detail::trim(fields[1]);
    const auto it = class_index.find(cls);
    if (it == class_index.end())
      throw DataError("grouping line " + std::to_string(line_no) + ": unknown class '" + cls + "'");
    if (g.assignment.count(it->second))
      throw DataError("grouping line " + std::to_string(line_no) + ": class '" + cls + "' assigned twice");
    auto [git, inserted] = group_index.try_emplace(grp, static_cast<int>(g.group_names.size()));
    if (inserted) g.group_names.push_back(grp);
    g.assignment[it->second] = git->second;
  }
  if (!header_seen) throw DataError("grouping: '" + path + "' has no header");
  return g;
}

// Remaps labels to group indices; identical treatment of train and test.
inline DatasetManifest apply_grouping(const DatasetManifest& manifest, const GroupingMap& grouping) {
  for (int k = 0; k < manifest.num_classes; ++k)
    if (!grouping.assignment.count(k))
      throw DataError("apply_grouping: grouping missing class " + std::to_string(k) + " ('" +
                      manifest.class_names[static_cast<std::size_t>(k)] + "')");
  for (const auto& [cls, grp] : grouping.assignment)
    if (cls < 0 || cls >= manifest.num_classes)
      throw DataError("apply_grouping: grouping references class " + std::to_string(cls) + " outside manifest");

  DatasetManifest out;
  out.class_names = grouping.group_names;
  out.num_classes = grouping.num_groups();
  out.records = manifest.records;
  for (auto& r : out.records) {
    r.label = grouping.assignment.at(r.label);
    if (r.observed_label) r.observed_label = grouping.assignment.at(*r.observed_label);
  }
  out.validate();
  return out;
}

enum class FoldMode { disjoint, independent };

// num_folds manifests of exactly n train records each, test records copied
// unchanged. Disjoint folds come from one seeded permutation when the pool is
// large enough; otherwise each fold is an independent draw with a derived seed.
inline std::vector<DatasetManifest> subsample(const DatasetManifest& manifest, std::size_t n, std::uint64_t seed,
                                              int num_folds, FoldMode mode = FoldMode::disjoint) {
  if (num_folds < 1) throw DataError("subsample: num_folds must be >= 1");
  const auto train_idx = manifest.train_indices();
  if (n > train_idx.size())
    throw DataError("subsample: n=" + std::to_string(n) + " exceeds train size " + std::to_string(train_idx.size()));

  const bool disjoint = mode == FoldMode::disjoint &&
                        static_cast<std::size_t>(num_folds) * n <= train_idx.size();

  std::vector<std::size_t> pool = train_idx;
  if (disjoint) {
    Rng rng(mix_keys(seed, 0x666f6c64ULL));
    rng.shuffle(pool.data(), pool.size());
  }

  std::vector<DatasetManifest> folds;
  folds.reserve(static_cast<std::size_t>(num_folds));
  for (int f = 0; f < num_folds; ++f) {
    std::vector<std::size_t> chosen;
    if (disjoint) {
      chosen.assign(pool.begin() + static_cast<std::ptrdiff_t>(f * n),
                    pool.begin() + static_cast<std::ptrdiff_t>((f + 1) * n));
    } else {
      std::vector<std::size_t> local = train_idx;
      Rng rng(mix_keys(seed, 0x666f6c64ULL, static_cast<std::uint64_t>(f)));
      rng.shuffle(local.data(), local.size());
      chosen.assign(local.begin(), local.begin() + static_cast<std::ptrdiff_t>(n));
    }
    std::sort(chosen.begin(), chosen.end());
    DatasetManifest fm;
    fm.class_names = manifest.class_names;
    fm.num_classes = manifest.num_classes;
    for (std::size_t i : chosen) {
      SampleRecord r = manifest.records[i];
      r.fold = f;
      fm.records.push_back(std::move(r));
    }
    for (const auto& r : manifest.records)
      if (r.split == Split::test) fm.records.push_back(r);
    fm.validate();
    folds.push_back(std::move(fm));
  }
  return folds;
}

// Disjoint union of class spaces; sample ids gain a dataset-index namespace.
inline DatasetManifest merge_datasets(const std::vector<DatasetManifest>& manifests) {
  if (manifests.size() < 2)
    throw DataError("merge_datasets: need at least 2 manifests, got " + std::to_string(manifests.size()));
  DatasetManifest out;
  int offset = 0;
  for (std::size_t d = 0; d < manifests.size(); ++d) {
    const auto& m = manifests[d];
    const std::string ns = "d" + std::to_string(d) + "/";
    for (const auto& name : m.class_names) out.class_names.push_back(ns + name);
    for (const auto& r : m.records) {
      SampleRecord nr = r;
      nr.sample_id = ns + r.sample_id;
      nr.label = r.label + offset;
      if (r.observed_label) nr.observed_label = *r.observed_label + offset;
      out.records.push_back(std::move(nr));
    }
    offset += m.num_classes;
  }
  out.num_classes = offset;
  out.validate();
  return out;
}

// w_k = largest-class train count / class-k train count.
inline ClassWeights class_weights(const DatasetManifest& manifest) {
  const auto counts = manifest.train_class_counts();
  const std::size_t max_count = *std::max_element(counts.begin(), counts.end());
  ClassWeights w;
  w.weights.reserve(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0)
      throw DataError("class_weights: class " + std::to_string(k) + " has no train records");
    w.weights.push_back(static_cast<double>(max_count) / static_cast<double>(counts[k]));
  }
  return w;
}

}  // namespace noisebench
