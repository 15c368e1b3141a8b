#ifndef STRECOVER_SYNTHETIC_HPP_
#define STRECOVER_SYNTHETIC_HPP_

#include <cstdint>
#include <filesystem>

#include "strecover/data_model.hpp"
#include "strecover/spatial_graph.hpp"

namespace strecover {

// Parameters of a synthetic sensor dataset. Smoothing strengths are counts
// of averaging rounds.
struct SynthSpec {
  Index rows = 40;
  Index cols = 60;
  Index rank = 4;
  Index spatial_rounds = 2;    // kNN neighbourhood averages applied to U
  Index temporal_rounds = 3;   // 3-tap moving averages applied to V
  double noise = 0.1;          // Gaussian noise standard deviation
  double box = 100.0;          // sensors are placed uniformly in [0, box)^2
  Index smoothing_k = 5;       // neighbourhood size for spatial averaging
  std::uint64_t seed = 2023;

  void validate() const;
};

struct SyntheticDataset {
  ObservedMatrix matrix;  // fully observed, rows * cols entries
  CoordinateSet coords;
};

// Low-rank ground truth H = U V^T with spatially smoothed U and temporally
// smoothed V, rescaled to mean 5, plus i.i.d. Gaussian noise. Deterministic
// in spec.seed.
SyntheticDataset generate(const SynthSpec& spec);

// The pinned 40 x 60, rank-4 instance used by the acceptance suite.
SynthSpec smoke_spec();
SyntheticDataset smoke_dataset();

// Writes data.csv (triplets), coords.csv and meta.json into `dir`.
void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& data);

}  // namespace strecover

#endif  // STRECOVER_SYNTHETIC_HPP_
