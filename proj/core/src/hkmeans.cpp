#include "pamcurate/hkmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pamcurate/errors.hpp"
#include "pamcurate/parallel.hpp"
#include "pamcurate/random.hpp"

namespace pamcurate {

void FitConfig::validate() const {
  if (level_ks.empty()) throw ValidationError("level_ks must not be empty");
  for (std::size_t i = 0; i < level_ks.size(); ++i) {
    if (level_ks[i] == 0) throw ValidationError("cluster counts must be positive");
    if (i > 0 && level_ks[i] >= level_ks[i - 1]) {
      throw ValidationError("level_ks must be strictly decreasing");
    }
  }
  if (batch_size == 0) throw ValidationError("batch_size must be at least 1");
  if (passes == 0) throw ValidationError("passes must be at least 1");
}

void normalize(std::span<float> v) {
  double norm2 = 0.0;
  for (float x : v) norm2 += static_cast<double>(x) * x;
  if (!std::isfinite(norm2)) throw ValidationError("cannot normalize a non-finite vector");
  if (norm2 == 0.0) throw ValidationError("cannot normalize a zero vector");
  const double inv = 1.0 / std::sqrt(norm2);
  for (float& x : v) x = static_cast<float>(x * inv);
}

std::vector<float> normalized(std::span<const float> v) {
  std::vector<float> out(v.begin(), v.end());
  normalize(out);
  return out;
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
  double s0 = 0.0, s1 = 0.0;
  std::size_t i = 0;
  const std::size_t n = a.size();
  for (; i + 1 < n; i += 2) {
    const double d0 = static_cast<double>(a[i]) - b[i];
    const double d1 = static_cast<double>(a[i + 1]) - b[i + 1];
    s0 += d0 * d0;
    s1 += d1 * d1;
  }
  if (i < n) {
    const double d = static_cast<double>(a[i]) - b[i];
    s0 += d * d;
  }
  return s0 + s1;
}

std::uint32_t nearest_centroid(std::span<const float> x, const CentroidSet& set,
                               double* squared_dist) {
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::uint32_t c = 0; c < set.k; ++c) {
    const double d = squared_distance(x, set.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (squared_dist) *squared_dist = best_d;
  return best;
}

CentroidSet kmeanspp_seed(std::span<const float> points, std::uint32_t dim, std::uint32_t k,
                          std::uint64_t seed) {
  if (dim == 0 || k == 0) throw ValidationError("k-means++: dim and k must be positive");
  const std::size_t n = points.size() / dim;
  if (n < k) {
    throw DegenerateInputError("k-means++: " + std::to_string(n) + " points for k=" +
                               std::to_string(k));
  }
  auto row = [&](std::size_t i) { return points.subspan(i * dim, dim); };

  Rng rng(seed);
  CentroidSet set;
  set.k = k;
  set.dim = dim;
  set.centroids.reserve(std::size_t{k} * dim);
  set.counts.assign(k, 0);

  std::size_t pick = rng.below(n);
  set.centroids.insert(set.centroids.end(), row(pick).begin(), row(pick).end());
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(row(i), row(pick));

  for (std::uint32_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    if (!(total > 0.0)) {
      throw DegenerateInputError("k-means++: only " + std::to_string(c) +
                                 " distinct points for k=" + std::to_string(k));
    }
    const double r = rng.uniform() * total;
    double acc = 0.0;
    pick = n;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      last_positive = i;
      acc += d2[i];
      if (acc > r) {
        pick = i;
        break;
      }
    }
    if (pick == n) pick = last_positive;
    set.centroids.insert(set.centroids.end(), row(pick).begin(), row(pick).end());
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(row(i), row(pick)));
    }
  }
  return set;
}

namespace {

/// Assigns rows of `batch` to their nearest centroid in parallel.
void assign_batch(std::span<const float> batch, std::uint32_t dim, const CentroidSet& set,
                  unsigned workers, std::vector<std::uint32_t>& labels) {
  const std::size_t n = batch.size() / dim;
  labels.resize(n);
  parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) {
      labels[i] = nearest_centroid(batch.subspan(i * dim, dim), set);
    }
  });
}

/// Scans the source, normalizing each vector if requested, and hands
/// fixed-size batches to `on_batch`.
template <typename OnBatch>
void scan_batches(const PointSource& source, bool normalize_inputs, std::size_t batch_size,
                  OnBatch&& on_batch) {
  const std::uint32_t dim = source.dim();
  std::vector<float> batch;
  batch.reserve(batch_size * dim);
  source.scan([&](WindowId, std::span<const float> v) {
    const std::size_t at = batch.size();
    batch.insert(batch.end(), v.begin(), v.end());
    if (normalize_inputs) normalize(std::span<float>(batch).subspan(at, dim));
    if (batch.size() == batch_size * dim) {
      on_batch(std::span<const float>(batch));
      batch.clear();
    }
    return true;
  });
  if (!batch.empty()) on_batch(std::span<const float>(batch));
}

std::vector<float> buffer_prefix(const PointSource& source, bool normalize_inputs,
                                 std::size_t limit) {
  const std::uint32_t dim = source.dim();
  std::vector<float> prefix;
  std::size_t taken = 0;
  source.scan([&](WindowId, std::span<const float> v) {
    const std::size_t at = prefix.size();
    prefix.insert(prefix.end(), v.begin(), v.end());
    if (normalize_inputs) normalize(std::span<float>(prefix).subspan(at, dim));
    return ++taken < limit;
  });
  return prefix;
}

}  // namespace

CentroidSet minibatch_fit(const PointSource& source, std::uint32_t k, const FitConfig& config,
                          const CentroidSet* init) {
  if (k == 0) throw ValidationError("k must be positive");
  if (config.batch_size == 0) throw ValidationError("batch_size must be at least 1");
  if (config.passes == 0) throw ValidationError("passes must be at least 1");
  const std::uint32_t dim = source.dim();

  CentroidSet set;
  if (init) {
    if (init->k != k || init->dim != dim) {
      throw ValidationError("initial centroids do not match k/dim");
    }
    set = *init;
  } else {
    const std::size_t prefix_len = std::max<std::size_t>(std::size_t{10} * k, config.batch_size);
    const auto prefix = buffer_prefix(source, config.normalize, prefix_len);
    set = kmeanspp_seed(prefix, dim, k, config.seed);
  }
  set.counts.assign(k, 0);

  std::vector<std::uint32_t> labels;
  for (std::uint32_t pass = 0; pass < config.passes; ++pass) {
    std::fill(set.counts.begin(), set.counts.end(), 0);
    scan_batches(source, config.normalize, config.batch_size, [&](std::span<const float> batch) {
      assign_batch(batch, dim, set, config.workers, labels);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::uint32_t c = labels[i];
        const std::uint64_t n = ++set.counts[c];
        auto centroid = set.row(c);
        const auto x = batch.subspan(i * dim, dim);
        if (n == 1) {
          std::copy(x.begin(), x.end(), centroid.begin());
        } else {
          const float eta = 1.0f / static_cast<float>(n);
          for (std::uint32_t j = 0; j < dim; ++j) centroid[j] += eta * (x[j] - centroid[j]);
        }
      }
    });
  }
  return set;
}

CentroidSet resample_fit(const PointSource& source, std::uint32_t k, const FitConfig& config) {
  CentroidSet set = minibatch_fit(source, k, config);
  if (config.resample_rounds == 0) return set;

  const std::uint32_t dim = source.dim();
  std::uint64_t total = config.resample_size;
  if (total == 0) {
    source.scan([&](WindowId, std::span<const float>) {
      ++total;
      return true;
    });
  }
  const std::uint64_t quota = (total + k - 1) / k;

  Rng rng(mix64(config.seed) ^ 0x5eed5eedULL);
  std::vector<std::uint32_t> labels;
  for (std::uint32_t round = 1; round <= config.resample_rounds; ++round) {
    // Per-cluster reservoirs give a uniform draw without replacement.
    std::vector<std::vector<float>> reservoir(k);
    std::vector<std::uint64_t> seen(k, 0);
    scan_batches(source, config.normalize, config.batch_size, [&](std::span<const float> batch) {
      assign_batch(batch, dim, set, config.workers, labels);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::uint32_t c = labels[i];
        const auto x = batch.subspan(i * dim, dim);
        const std::uint64_t s = ++seen[c];
        if (s <= quota) {
          reservoir[c].insert(reservoir[c].end(), x.begin(), x.end());
        } else {
          const std::uint64_t j = rng.below(s);
          if (j < quota) std::copy(x.begin(), x.end(), reservoir[c].begin() + j * dim);
        }
      }
    });

    std::vector<float> resampled;
    resampled.reserve(quota * k * dim);
    for (std::uint32_t c = 0; c < k; ++c) {
      const std::uint64_t have = reservoir[c].size() / dim;
      if (have == 0) continue;
      if (have >= quota) {
        resampled.insert(resampled.end(), reservoir[c].begin(), reservoir[c].end());
      } else {
        for (std::uint64_t q = 0; q < quota; ++q) {
          const auto j = rng.below(have);
          resampled.insert(resampled.end(), reservoir[c].begin() + j * dim,
                           reservoir[c].begin() + (j + 1) * dim);
        }
      }
    }

    // Rows are grouped by cluster; the seeding prefix and the first-point
    // copy both need them interleaved.
    const std::size_t rows = resampled.size() / dim;
    for (std::size_t i = rows; i > 1; --i) {
      const std::size_t j = rng.below(i);
      std::swap_ranges(resampled.begin() + (i - 1) * dim, resampled.begin() + i * dim,
                       resampled.begin() + j * dim);
    }

    FitConfig refit = config;
    refit.normalize = false;  // already normalized above
    refit.seed = mix64(config.seed + round);
    MatrixSource balanced(dim, std::move(resampled));
    set = minibatch_fit(balanced, k, refit);
  }
  return set;
}

double kmeans_objective(std::span<const float> points, const CentroidSet& set) {
  double total = 0.0;
  const std::size_t n = points.size() / set.dim;
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    nearest_centroid(points.subspan(i * set.dim, set.dim), set, &d);
    total += d;
  }
  return total;
}

CentroidSet lloyd_fit(std::span<const float> points, std::uint32_t dim, std::uint32_t k,
                      std::uint64_t seed, std::uint32_t restarts, std::uint32_t max_iterations) {
  const std::size_t n = points.size() / dim;
  CentroidSet best;
  double best_objective = std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> labels(n), previous;
  for (std::uint32_t r = 0; r < std::max<std::uint32_t>(1, restarts); ++r) {
    CentroidSet set = kmeanspp_seed(points, dim, k, mix64(seed + r));
    previous.clear();
    for (std::uint32_t it = 0; it < max_iterations; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        labels[i] = nearest_centroid(points.subspan(i * dim, dim), set);
      }
      if (labels == previous) break;
      previous = labels;
      std::vector<double> sums(std::size_t{k} * dim, 0.0);
      std::vector<std::uint64_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        ++counts[labels[i]];
        for (std::uint32_t j = 0; j < dim; ++j) {
          sums[std::size_t{labels[i]} * dim + j] += points[i * dim + j];
        }
      }
      for (std::uint32_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        for (std::uint32_t j = 0; j < dim; ++j) {
          set.centroids[std::size_t{c} * dim + j] =
              static_cast<float>(sums[std::size_t{c} * dim + j] / static_cast<double>(counts[c]));
        }
      }
    }
    set.counts.assign(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++set.counts[nearest_centroid(points.subspan(i * dim, dim), set)];
    }
    const double objective = kmeans_objective(points, set);
    if (objective < best_objective) {
      best_objective = objective;
      best = std::move(set);
    }
  }
  return best;
}

std::vector<std::uint32_t> ClusterHierarchy::path_of_leaf(std::uint32_t leaf) const {
  std::vector<std::uint32_t> path(depth());
  std::uint32_t node = leaf;
  for (std::size_t l = 0; l < depth(); ++l) {
    path[depth() - 1 - l] = node;
    if (l + 1 < depth()) node = parents[l][node];
  }
  return path;
}

void ClusterHierarchy::validate() const {
  if (levels.empty()) throw ValidationError("hierarchy has no levels");
  if (parents.size() != levels.size() - 1) {
    throw ValidationError("hierarchy needs one parent map per level below the root");
  }
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& set = levels[l];
    if (set.k == 0 || set.dim != dim() || set.centroids.size() != std::size_t{set.k} * set.dim ||
        set.counts.size() != set.k) {
      throw ValidationError("hierarchy level " + std::to_string(l + 1) + " is malformed");
    }
    for (float v : set.centroids) {
      if (!std::isfinite(v)) throw ValidationError("non-finite centroid");
    }
    if (l + 1 < levels.size()) {
      if (parents[l].size() != set.k) throw ValidationError("parent map size mismatch");
      for (std::uint32_t p : parents[l]) {
        if (p >= levels[l + 1].k) throw ValidationError("parent index out of range");
      }
    }
  }
}

ClusterHierarchy build_hierarchy(const PointSource& source, const FitConfig& config) {
  config.validate();
  ClusterHierarchy h;
  h.normalized = config.normalize;
  try {
    h.levels.push_back(resample_fit(source, config.level_ks[0], config));
  } catch (const DegenerateInputError& e) {
    throw DegenerateInputError(std::string("level 1: ") + e.what());
  }
  h.levels.back().level = 1;

  for (std::size_t l = 1; l < config.level_ks.size(); ++l) {
    const CentroidSet& below = h.levels[l - 1];
    CentroidSet set;
    try {
      set = lloyd_fit(below.centroids, below.dim, config.level_ks[l],
                      mix64(config.seed ^ (0x1000 + l)), config.lloyd_restarts,
                      config.lloyd_max_iterations);
    } catch (const DegenerateInputError& e) {
      throw DegenerateInputError("level " + std::to_string(l + 1) + ": " + e.what());
    }
    set.level = static_cast<std::uint32_t>(l + 1);
    std::vector<std::uint32_t> parent(below.k);
    for (std::uint32_t c = 0; c < below.k; ++c) parent[c] = nearest_centroid(below.row(c), set);
    // Membership rolls up from the children.
    set.counts.assign(set.k, 0);
    for (std::uint32_t c = 0; c < below.k; ++c) set.counts[parent[c]] += below.counts[c];
    h.parents.push_back(std::move(parent));
    h.levels.push_back(std::move(set));
  }
  return h;
}

std::uint32_t assign_leaf(std::span<const float> vector, const ClusterHierarchy& hierarchy,
                          double* distance) {
  if (vector.size() != hierarchy.dim()) {
    throw ValidationError("vector has dim " + std::to_string(vector.size()) +
                          ", hierarchy has dim " + std::to_string(hierarchy.dim()));
  }
  double d2 = 0.0;
  std::uint32_t leaf = 0;
  if (hierarchy.normalized) {
    thread_local std::vector<float> scratch;
    scratch.assign(vector.begin(), vector.end());
    normalize(scratch);
    leaf = nearest_centroid(scratch, hierarchy.levels.front(), &d2);
  } else {
    leaf = nearest_centroid(vector, hierarchy.levels.front(), &d2);
  }
  if (distance) *distance = std::sqrt(d2);
  return leaf;
}

ClusterAssignment assign_path(std::span<const float> vector, const ClusterHierarchy& hierarchy) {
  ClusterAssignment a;
  const std::uint32_t leaf = assign_leaf(vector, hierarchy, &a.distance);
  a.path = hierarchy.path_of_leaf(leaf);
  return a;
}

}  // namespace pamcurate
