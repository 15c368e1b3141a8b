#include "strecover/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"

#include "strecover/error.hpp"
#include "strecover/rng.hpp"
#include "strecover/text_format.hpp"

namespace strecover {
namespace {

bool row_major_less(const Entry& a, const Entry& b) {
  return a.i != b.i ? a.i < b.i : a.j < b.j;
}

void sort_row_major(std::vector<Entry>& entries) {
  std::sort(entries.begin(), entries.end(), row_major_less);
}

}  // namespace

ObservedMatrix::ObservedMatrix(Index rows, Index cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows_ == 0 || cols_ == 0) {
    throw ParameterError("matrix dimensions must be positive, got " +
                         std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  for (const Entry& e : entries_) {
    if (e.i >= rows_ || e.j >= cols_) {
      throw IndexError("entry (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                       ") outside " + std::to_string(rows_) + "x" +
                       std::to_string(cols_) + " matrix");
    }
    if (!std::isfinite(e.v)) {
      throw ParameterError("entry (" + std::to_string(e.i) + "," +
                           std::to_string(e.j) + ") is not finite");
    }
  }
  sort_row_major(entries_);
  auto dup = std::adjacent_find(entries_.begin(), entries_.end(),
                                [](const Entry& a, const Entry& b) {
                                  return a.i == b.i && a.j == b.j;
                                });
  if (dup != entries_.end()) {
    throw DuplicateEntryError("duplicate entry (" + std::to_string(dup->i) + "," +
                              std::to_string(dup->j) + ")");
  }
}

std::optional<double> ObservedMatrix::value(Index i, Index j) const {
  if (i >= rows_ || j >= cols_) {
    throw IndexError("index (" + std::to_string(i) + "," + std::to_string(j) +
                     ") out of range");
  }
  Entry probe{i, j, 0.0};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), probe, row_major_less);
  if (it != entries_.end() && it->i == i && it->j == j) return it->v;
  return std::nullopt;
}

ObservedMatrix parse_triplets(std::string_view contents, std::optional<Dims> dims) {
  auto lines = text::lines(contents);
  if (lines.empty() || text::trim(lines[0]) != "i,j,v") {
    throw ParseError("expected header 'i,j,v'", 1);
  }
  std::vector<Entry> entries;
  entries.reserve(lines.size() - 1);
  Index max_i = 0, max_j = 0;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    if (text::trim(lines[n]).empty()) {
      // Only a trailing blank line is tolerated.
      if (n + 1 == lines.size()) break;
      throw ParseError("empty line", line_no);
    }
    auto fields = text::split(lines[n]);
    if (fields.size() != 3) {
      throw ParseError("expected 3 fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    auto i = text::parse_int(fields[0]);
    auto j = text::parse_int(fields[1]);
    auto v = text::parse_double(fields[2]);
    if (!i || !j || *i < 0 || *j < 0) {
      throw ParseError("indices must be non-negative integers", line_no);
    }
    if (!v) throw ParseError("value is not a number", line_no);
    if (!std::isfinite(*v)) throw ParseError("value is not finite", line_no);
    Entry e{static_cast<Index>(*i), static_cast<Index>(*j), *v};
    max_i = std::max(max_i, e.i);
    max_j = std::max(max_j, e.j);
    entries.push_back(e);
  }
  Dims d;
  if (dims) {
    d = *dims;
  } else if (entries.empty()) {
    throw ParameterError("cannot infer dimensions of an empty triplet file");
  } else {
    d = {max_i + 1, max_j + 1};
  }
  return ObservedMatrix(d.rows, d.cols, std::move(entries));
}

ObservedMatrix load_triplets(const std::filesystem::path& path,
                             std::optional<Dims> dims) {
  return parse_triplets(text::read_file(path), dims);
}

std::string format_triplets(const std::vector<Entry>& entries) {
  std::string out = "i,j,v\n";
  for (const Entry& e : entries) {
    out += std::to_string(e.i);
    out += ',';
    out += std::to_string(e.j);
    out += ',';
    out += text::format_double(e.v);
    out += '\n';
  }
  return out;
}

void write_triplets(const std::filesystem::path& path,
                    const std::vector<Entry>& entries) {
  text::write_file(path, format_triplets(entries));
}

Dims load_dims(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid metadata JSON: ") + e.what(), 0);
  }
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j["rows"].is_number_unsigned() || !j["cols"].is_number_unsigned()) {
    throw ParseError("metadata must contain non-negative integer 'rows' and 'cols'", 0);
  }
  return {j["rows"].get<Index>(), j["cols"].get<Index>()};
}

void write_dims(const std::filesystem::path& path, Dims dims) {
  nlohmann::json j = {{"rows", dims.rows}, {"cols", dims.cols}};
  text::write_file(path, j.dump(2) + "\n");
}

namespace {

std::pair<ObservedMatrix, EntrySet> split_first(const ObservedMatrix& m,
                                                std::size_t keep,
                                                std::uint64_t seed) {
  std::vector<std::size_t> order(m.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<Entry> kept, rest;
  kept.reserve(keep);
  rest.reserve(m.size() - keep);
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < keep ? kept : rest).push_back(m.entries()[order[k]]);
  }
  sort_row_major(rest);
  return {ObservedMatrix(m.rows(), m.cols(), std::move(kept)),
          EntrySet{m.dims(), std::move(rest)}};
}

}  // namespace

std::pair<ObservedMatrix, EntrySet> split_by_sampling_rate(const ObservedMatrix& m,
                                                           double rate,
                                                           std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw ParameterError("sampling rate must lie in (0, 1], got " +
                         text::format_double(rate));
  }
  if (m.empty()) throw ParameterError("cannot split a matrix with no entries");
  const auto keep =
      static_cast<std::size_t>(std::floor(rate * static_cast<double>(m.size()) + 0.5));
  return split_first(m, std::min(keep, m.size()), seed);
}

std::pair<ObservedMatrix, EntrySet> split_half(const ObservedMatrix& m,
                                               std::uint64_t seed) {
  if (m.size() < 2) throw ParameterError("split_half needs at least 2 entries");
  return split_first(m, (m.size() + 1) / 2, seed);
}

EntrySet to_entry_set(const ObservedMatrix& m) {
  return EntrySet{m.dims(), m.entries()};
}

}  // namespace strecover
