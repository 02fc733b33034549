#include "cicle/corpus.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <json.hpp>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "cicle/error.hpp"
#include "cicle/hashing.hpp"
#include "cicle/random.hpp"

namespace cicle::corpus {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(first, last - first + 1);
}

std::string at_line(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

void check_item(const LabeledText& item, const std::filesystem::path& path, std::size_t line) {
  if (trim(item.text).empty()) throw DataError(at_line(path, line) + "empty text");
  if (trim(item.label).empty()) throw DataError(at_line(path, line) + "empty label");
}

// Class name -> positions of its items, in input order. std::map keeps
// classes in sorted (label-space) order.
std::map<std::string, std::vector<std::size_t>> group_by_label(std::span<const LabeledText> data) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < data.size(); ++i) groups[data[i].label].push_back(i);
  return groups;
}

// Splits one CSV record starting at `pos`; handles quoted fields with
// doubled quotes and embedded newlines. Advances `pos` and `line`.
std::vector<std::string> next_csv_record(const std::string& buf, std::size_t& pos, std::size_t& line,
                                         const std::filesystem::path& path) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  const std::size_t start_line = line;
  while (pos < buf.size()) {
    const char c = buf[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < buf.size() && buf[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
        ++pos;
        continue;
      }
      if (c == '\n') ++line;
      field.push_back(c);
      ++pos;
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++pos;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && pos + 1 < buf.size() && buf[pos + 1] == '\n') ++pos;
      ++pos;
      ++line;
      fields.push_back(std::move(field));
      return fields;
    } else {
      field.push_back(c);
      ++pos;
    }
  }
  if (quoted) throw DataError(at_line(path, start_line) + "unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

std::vector<LabeledText> read_csv(const std::filesystem::path& path, const std::string& buf) {
  std::size_t pos = 0;
  std::size_t line = 1;
  auto header = next_csv_record(buf, pos, line, path);
  for (auto& h : header) h = std::string(trim(h));
  const auto text_col = std::find(header.begin(), header.end(), "text");
  const auto label_col = std::find(header.begin(), header.end(), "label");
  if (text_col == header.end() || label_col == header.end()) {
    throw DataError(at_line(path, 1) + "CSV header must contain text,label");
  }
  const auto ti = static_cast<std::size_t>(text_col - header.begin());
  const auto li = static_cast<std::size_t>(label_col - header.begin());

  std::vector<LabeledText> items;
  std::size_t row = 0;
  while (pos < buf.size()) {
    const std::size_t record_line = line;
    auto fields = next_csv_record(buf, pos, line, path);
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != header.size()) {
      throw DataError(at_line(path, record_line) + "expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(fields.size()));
    }
    ++row;
    LabeledText item{"row" + std::to_string(row), fields[ti], std::string(trim(fields[li]))};
    check_item(item, path, record_line);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<LabeledText> parse_jsonl(const std::filesystem::path& path, std::istream& in) {
  std::vector<LabeledText> items;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    json row;
    try {
      row = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw DataError(at_line(path, line) + "malformed JSON: " + e.what());
    }
    if (!row.is_object() || !row.contains("id") || !row["id"].is_string() ||
        !row.contains("text") || !row["text"].is_string()) {
      throw DataError(at_line(path, line) + "row needs string fields id and text");
    }
    auto id = row["id"].get<std::string>();
    auto text = row["text"].get<std::string>();
    LabeledText item;
    if (row.contains("label") && row["label"].is_string()) {
      item = {std::move(id), std::move(text), row["label"].get<std::string>()};
    } else if (row.contains("labels") && row["labels"].is_array()) {
      std::vector<std::string> labels;
      for (const auto& l : row["labels"]) {
        if (!l.is_string()) throw DataError(at_line(path, line) + "labels must be strings");
        labels.push_back(l.get<std::string>());
      }
      try {
        item = reduce_primary_label(std::move(id), std::move(text), labels);
      } catch (const DataError& e) {
        throw DataError(at_line(path, line) + e.what());
      }
    } else {
      throw DataError(at_line(path, line) + "row needs a string label or a labels array");
    }
    check_item(item, path, line);
    items.push_back(std::move(item));
  }
  return items;
}

void check_unique_ids(std::span<const LabeledText> items, const std::filesystem::path& path) {
  std::unordered_set<std::string_view> seen;
  std::set<std::string> dups;
  for (const auto& item : items) {
    if (!seen.insert(item.id).second) dups.insert(item.id);
  }
  if (!dups.empty()) {
    std::string list;
    for (const auto& d : dups) list += (list.empty() ? "" : ", ") + d;
    throw DataError(path.string() + ": duplicate id(s): " + list);
  }
}

}  // namespace

LabelSpace::LabelSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < kMinLabels || labels_.size() > kMaxLabels) {
    throw DataError("label space must have between 2 and 1000 labels, got " +
                    std::to_string(labels_.size()));
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second) throw DataError("duplicate label: " + labels_[i]);
  }
}

LabelSpace LabelSpace::from_items(std::span<const LabeledText> items) {
  std::set<std::string> distinct;
  for (const auto& item : items) distinct.insert(item.label);
  return LabelSpace(std::vector<std::string>(distinct.begin(), distinct.end()));
}

std::optional<std::size_t> LabelSpace::find(std::string_view label) const {
  const auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LabelSpace::index_of(std::string_view label) const {
  if (auto i = find(label)) return *i;
  throw DataError("label not in label space: " + std::string(label));
}

Format format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".jsonl" || ext == ".json") return Format::jsonl;
  if (ext == ".csv") return Format::csv;
  throw UsageError("cannot infer dataset format from extension of " + path.string());
}

std::vector<LabeledText> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_jsonl(path, in);
}

Dataset load_dataset(const std::filesystem::path& path, Format format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<LabeledText> items;
  if (format == Format::jsonl) {
    items = parse_jsonl(path, in);
  } else {
    std::ostringstream ss;
    ss << in.rdbuf();
    items = read_csv(path, ss.str());
  }
  if (items.empty()) throw DataError(path.string() + ": dataset is empty");
  check_unique_ids(items, path);
  auto labels = LabelSpace::from_items(items);
  return {std::move(items), std::move(labels)};
}

void write_jsonl(const std::filesystem::path& path, std::span<const LabeledText> items) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& item : items) {
    nlohmann::ordered_json row;
    row["id"] = item.id;
    row["text"] = item.text;
    row["label"] = item.label;
    out << row.dump() << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

LabeledText reduce_primary_label(std::string id, std::string text, std::span<const std::string> labels) {
  if (labels.empty()) throw DataError("empty label list for item " + id);
  return {std::move(id), std::move(text), labels.front()};
}

std::vector<std::size_t> apportion(std::span<const std::size_t> class_counts, std::size_t n) {
  const std::size_t total = std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0});
  if (n > total) {
    throw DataError("cannot apportion " + std::to_string(n) + " over " + std::to_string(total) + " items");
  }
  std::vector<std::size_t> counts(class_counts.size(), 0);
  if (total == 0) return counts;
  // Integer quotas: floor(n*c/total) with exact remainders n*c mod total.
  std::vector<std::size_t> remainders(class_counts.size(), 0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < class_counts.size(); ++i) {
    const auto prod = static_cast<unsigned __int128>(n) * class_counts[i];
    counts[i] = static_cast<std::size_t>(prod / total);
    remainders[i] = static_cast<std::size_t>(prod % total);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(class_counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++counts[order[r]];
  return counts;
}

std::vector<LabeledText> stratified_subsample(std::span<const LabeledText> data, std::size_t n,
                                              std::uint64_t seed) {
  if (n > data.size()) {
    throw DataError("subsample size " + std::to_string(n) + " exceeds data size " +
                    std::to_string(data.size()));
  }
  const auto groups = group_by_label(data);
  std::vector<std::size_t> sizes;
  for (const auto& [label, members] : groups) sizes.push_back(members.size());
  const auto quota = apportion(sizes, n);

  Rng rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  std::vector<std::string> dropped;
  std::size_t c = 0;
  for (const auto& [label, members] : groups) {
    if (quota[c] == 0) dropped.push_back(label);
    for (auto pos : sample_without_replacement(members.size(), quota[c], rng)) {
      chosen.push_back(members[pos]);
    }
    ++c;
  }
  if (!dropped.empty()) {
    std::string list;
    for (const auto& d : dropped) list += (list.empty() ? "" : ", ") + d;
    spdlog::warn("stratified_subsample(n={}): classes with zero apportioned items: {}", n, list);
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<LabeledText> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back(data[i]);
  return out;
}

DatasetSplit stratified_split(std::span<const LabeledText> data, double calib_fraction,
                              std::uint64_t seed) {
  if (!(calib_fraction > 0.0 && calib_fraction < 1.0)) {
    throw UsageError("calib_fraction must lie in (0, 1)");
  }
  if (data.size() < 2) throw DataError("stratified_split needs at least 2 items");
  auto n_cal = static_cast<std::size_t>(std::llround(calib_fraction * static_cast<double>(data.size())));
  n_cal = std::clamp<std::size_t>(n_cal, 1, data.size() - 1);

  const auto groups = group_by_label(data);
  std::vector<std::size_t> sizes;
  for (const auto& [label, members] : groups) sizes.push_back(members.size());
  const auto quota = apportion(sizes, n_cal);

  Rng rng(seed);
  std::vector<bool> in_calib(data.size(), false);
  std::size_t c = 0;
  for (const auto& [label, members] : groups) {
    for (auto pos : sample_without_replacement(members.size(), quota[c], rng)) {
      in_calib[members[pos]] = true;
    }
    ++c;
  }
  DatasetSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (in_calib[i] ? split.calibration : split.train).push_back(data[i]);
  }
  return split;
}

std::vector<std::size_t> class_counts(std::span<const LabeledText> data, const LabelSpace& labels) {
  std::vector<std::size_t> counts(labels.size(), 0);
  for (const auto& item : data) ++counts[labels.index_of(item.label)];
  return counts;
}

}  // namespace cicle::corpus
