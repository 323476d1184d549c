#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pamcurate/vector_source.hpp"

namespace pamcurate {

/// Cluster counts of the production hierarchy, finest level first.
inline constexpr std::uint32_t kProductionLevels[] = {6000, 400, 40, 10};

struct CentroidSet {
  std::uint32_t level = 1;
  std::uint32_t k = 0;
  std::uint32_t dim = 0;
  std::vector<float> centroids;      // k x dim, row-major
  std::vector<std::uint64_t> counts;  // points absorbed in the final pass; summed from children above level 1

  std::span<const float> row(std::size_t c) const { return {centroids.data() + c * dim, dim}; }
  std::span<float> row(std::size_t c) { return {centroids.data() + c * dim, dim}; }

  friend bool operator==(const CentroidSet&, const CentroidSet&) = default;
};

struct FitConfig {
  std::vector<std::uint32_t> level_ks{kProductionLevels, kProductionLevels + 4};
  std::size_t batch_size = 4096;
  std::uint32_t passes = 2;
  std::uint32_t resample_rounds = 3;
  /// Size of each cluster-balanced resample; 0 means "number of points".
  std::uint64_t resample_size = 0;
  std::uint64_t seed = 0;
  /// Fit and assign on L2-normalized vectors (Euclidean then orders like cosine).
  bool normalize = true;
  unsigned workers = 1;
  /// k-means++ restarts and iteration cap for the exact upper-level fits.
  std::uint32_t lloyd_restarts = 4;
  std::uint32_t lloyd_max_iterations = 200;

  /// Throws ValidationError.
  void validate() const;
};

/// Scales to unit L2 norm in place. Throws ValidationError for zero or
/// non-finite vectors.
void normalize(std::span<float> vector);
std::vector<float> normalized(std::span<const float> vector);

double squared_distance(std::span<const float> a, std::span<const float> b);

/// Nearest centroid, lowest index on ties.
std::uint32_t nearest_centroid(std::span<const float> x, const CentroidSet& set,
                               double* squared_dist = nullptr);

/// k-means++ seeding. Throws DegenerateInputError with fewer than k distinct
/// points.
CentroidSet kmeanspp_seed(std::span<const float> points, std::uint32_t dim, std::uint32_t k,
                          std::uint64_t seed);

/// Mini-batch k-means over a stream.
///
/// Initial centroids come from `init` or from k-means++ over a buffered
/// prefix of max(10k, batch_size) points. Each pass resets the per-centroid
/// counts, then for every batch assigns all points against the frozen
/// centroids and applies c += (x - c) / n_c point by point in stream order.
/// With batch_size >= the stream length each pass is one Lloyd iteration.
CentroidSet minibatch_fit(const PointSource& source, std::uint32_t k, const FitConfig& config,
                          const CentroidSet* init = nullptr);

/// Mini-batch fit followed by `resample_rounds` rounds of: draw an equal
/// quota ceil(M / k) from every cluster (without replacement when the
/// cluster is large enough, otherwise with replacement), then refit on the
/// balanced resample with a fresh k-means++ start.
CentroidSet resample_fit(const PointSource& source, std::uint32_t k, const FitConfig& config);

/// Exact Lloyd iterations to an assignment fixpoint, best objective over
/// `restarts` k-means++ starts. Empty clusters keep their position.
CentroidSet lloyd_fit(std::span<const float> points, std::uint32_t dim, std::uint32_t k,
                      std::uint64_t seed, std::uint32_t restarts, std::uint32_t max_iterations);

/// Sum of squared distances to the nearest centroid.
double kmeans_objective(std::span<const float> points, const CentroidSet& set);

/// Level 0 is the finest. parents[l][c] is the level l+1 cluster that level l
/// cluster c belongs to.
struct ClusterHierarchy {
  std::vector<CentroidSet> levels;
  std::vector<std::vector<std::uint32_t>> parents;
  bool normalized = true;

  std::size_t depth() const { return levels.size(); }
  std::uint32_t dim() const { return levels.empty() ? 0 : levels.front().dim; }
  std::uint32_t leaf_count() const { return levels.empty() ? 0 : levels.front().k; }

  /// Cluster indices from the coarsest level down to `leaf`.
  std::vector<std::uint32_t> path_of_leaf(std::uint32_t leaf) const;

  /// Throws ValidationError if shapes or parent maps are inconsistent.
  void validate() const;

  friend bool operator==(const ClusterHierarchy&, const ClusterHierarchy&) = default;
};

/// Level 1 by resample_fit on the data; each coarser level by lloyd_fit on
/// the centroids below it; parents by nearest centroid.
ClusterHierarchy build_hierarchy(const PointSource& source, const FitConfig& config);

struct ClusterAssignment {
  std::vector<std::uint32_t> path;  // root -> leaf
  double distance = 0.0;            // to the leaf centroid

  std::uint32_t leaf() const { return path.back(); }
};

/// Throws ValidationError on dim mismatch.
ClusterAssignment assign_path(std::span<const float> vector, const ClusterHierarchy& hierarchy);

/// Leaf index and distance only; skips building the path.
std::uint32_t assign_leaf(std::span<const float> vector, const ClusterHierarchy& hierarchy,
                          double* distance);

}  // namespace pamcurate
