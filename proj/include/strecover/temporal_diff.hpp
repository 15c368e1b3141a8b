#ifndef STRECOVER_TEMPORAL_DIFF_HPP_
#define STRECOVER_TEMPORAL_DIFF_HPP_

#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "strecover/data_model.hpp"
#include "strecover/error.hpp"

namespace strecover {

// First-difference operator over N time slots. D is N x (N-1) with column j
// holding -1 at row j and +1 at row j+1; B = D D^T is the path-graph
// Laplacian, stored as its tridiagonal stencil.
//
// N == 1 is accepted and gives D with no columns, hence B = 0.
class DiffOperator {
 public:
  explicit DiffOperator(Index slots) : slots_(slots) {
    if (slots == 0) throw ParameterError("DiffOperator needs at least one slot");
  }

  Index slots() const { return slots_; }

  // B(r, j). Zero outside the tridiagonal band.
  double gram(Index r, Index j) const {
    if (slots_ < 2) return 0.0;
    if (r == j) return (j == 0 || j + 1 == slots_) ? 1.0 : 2.0;
    if (r + 1 == j || j + 1 == r) return -1.0;
    return 0.0;
  }

  // Calls f(r, B(r, j)) for each nonzero of column j, ascending r.
  template <typename F>
  void for_each_in_gram_column(Index j, F&& f) const {
    if (slots_ < 2) return;
    if (j > 0) f(j - 1, -1.0);
    f(j, (j == 0 || j + 1 == slots_) ? 1.0 : 2.0);
    if (j + 1 < slots_) f(j + 1, -1.0);
  }

 private:
  Index slots_;
};

// out[j] = v[j+1] - v[j]. Needs N >= 2.
std::vector<double> apply_diff(std::span<const double> v);

// Column j of B = D D^T for N slots. Needs N >= 2.
Eigen::SparseVector<double> gram_column(Index slots, Index j);

}  // namespace strecover

#endif  // STRECOVER_TEMPORAL_DIFF_HPP_
