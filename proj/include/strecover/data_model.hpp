#ifndef STRECOVER_DATA_MODEL_HPP_
#define STRECOVER_DATA_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace strecover {

using Index = std::size_t;

// One observed cell (i, j, v) with 0-based indices.
struct Entry {
  Index i = 0;
  Index j = 0;
  double v = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

struct Dims {
  Index rows = 0;
  Index cols = 0;

  friend bool operator==(const Dims&, const Dims&) = default;
};

// An M x N matrix together with its set of known entries. Immutable after
// construction. Entries are kept in row-major (i, then j) order; cells that
// are not in the set are unknown, and `value` reports them as nullopt.
class ObservedMatrix {
 public:
  ObservedMatrix() = default;

  // Validates ranges, finiteness and uniqueness. Throws ParameterError,
  // IndexError or DuplicateEntryError.
  ObservedMatrix(Index rows, Index cols, std::vector<Entry> entries);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Dims dims() const { return {rows_, cols_}; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const std::vector<Entry>& entries() const { return entries_; }

  std::optional<double> value(Index i, Index j) const;
  bool contains(Index i, Index j) const { return value(i, j).has_value(); }

  friend bool operator==(const ObservedMatrix&, const ObservedMatrix&) = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Entry> entries_;
};

// Held-out entries (the test set). Same ordering convention as ObservedMatrix.
struct EntrySet {
  Dims dims;
  std::vector<Entry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  friend bool operator==(const EntrySet&, const EntrySet&) = default;
};

// Triplet CSV: header `i,j,v`, then one entry per line. Without explicit
// dims the matrix is sized max(index) + 1 in each direction.
ObservedMatrix load_triplets(const std::filesystem::path& path,
                             std::optional<Dims> dims = std::nullopt);
ObservedMatrix parse_triplets(std::string_view contents,
                              std::optional<Dims> dims = std::nullopt);

void write_triplets(const std::filesystem::path& path,
                    const std::vector<Entry>& entries);
std::string format_triplets(const std::vector<Entry>& entries);

// Sidecar metadata `{"rows": M, "cols": N}`.
Dims load_dims(const std::filesystem::path& path);
void write_dims(const std::filesystem::path& path, Dims dims);

// Uniformly samples round-half-up(rate * |entries|) entries for training and
// returns the rest as the test set. Deterministic in `seed`.
std::pair<ObservedMatrix, EntrySet> split_by_sampling_rate(
    const ObservedMatrix& m, double rate, std::uint64_t seed);

// Fit half gets ceil(|entries| / 2), validation the remainder.
std::pair<ObservedMatrix, EntrySet> split_half(const ObservedMatrix& m,
                                               std::uint64_t seed);

EntrySet to_entry_set(const ObservedMatrix& m);

}  // namespace strecover

#endif  // STRECOVER_DATA_MODEL_HPP_
