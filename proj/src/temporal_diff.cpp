#include "strecover/temporal_diff.hpp"

#include <string>

namespace strecover {

std::vector<double> apply_diff(std::span<const double> v) {
  if (v.size() < 2) throw ParameterError("apply_diff needs at least 2 slots");
  std::vector<double> out(v.size() - 1);
  for (std::size_t j = 0; j + 1 < v.size(); ++j) out[j] = v[j + 1] - v[j];
  return out;
}

Eigen::SparseVector<double> gram_column(Index slots, Index j) {
  if (slots < 2) throw ParameterError("gram_column needs at least 2 slots");
  if (j >= slots) {
    throw IndexError("gram column " + std::to_string(j) + " out of range for " +
                     std::to_string(slots) + " slots");
  }
  DiffOperator op(slots);
  Eigen::SparseVector<double> col(static_cast<Eigen::Index>(slots));
  op.for_each_in_gram_column(
      j, [&](Index r, double b) { col.insert(static_cast<Eigen::Index>(r)) = b; });
  return col;
}

}  // namespace strecover
