#include "genret/kernels.h"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace genret {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  ExecPolicy policy) {
  if (policy == ExecPolicy::kSerial || max_threads() == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

namespace {

inline void nearest_one(const double* x, std::size_t dim, const double* centroids,
                        std::size_t k, std::uint32_t& best_id, double& best) {
  best = std::numeric_limits<double>::infinity();
  best_id = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double* mu = centroids + c * dim;
    double d = 0.0;
    for (std::size_t t = 0; t < dim; ++t) {
      const double diff = x[t] - mu[t];
      d += diff * diff;
    }
    if (d < best) {
      best = d;
      best_id = static_cast<std::uint32_t>(c);
    }
  }
}

}  // namespace

void nearest_centroid_serial(std::span<const double> points, std::size_t dim,
                             std::span<const double> centroids, std::size_t k,
                             std::span<std::uint32_t> assign, std::span<double> dist2) {
  const std::size_t n = assign.size();
  for (std::size_t i = 0; i < n; ++i) {
    nearest_one(points.data() + i * dim, dim, centroids.data(), k, assign[i], dist2[i]);
  }
}

void nearest_centroid_parallel(std::span<const double> points, std::size_t dim,
                               std::span<const double> centroids, std::size_t k,
                               std::span<std::uint32_t> assign, std::span<double> dist2) {
  const auto n = static_cast<std::int64_t>(assign.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    nearest_one(points.data() + i * dim, dim, centroids.data(), k, assign[i], dist2[i]);
  }
}

void nearest_centroid(std::span<const double> points, std::size_t dim,
                      std::span<const double> centroids, std::size_t k,
                      std::span<std::uint32_t> assign, std::span<double> dist2,
                      ExecPolicy policy) {
  if (policy == ExecPolicy::kSerial) {
    nearest_centroid_serial(points, dim, centroids, k, assign, dist2);
  } else {
    nearest_centroid_parallel(points, dim, centroids, k, assign, dist2);
  }
}

namespace {

inline void project_one(const SparseRow& row, const double* basis, std::size_t dim,
                        double* out) {
  std::fill(out, out + dim, 0.0);
  for (const auto& [index, weight] : row) {
    const double* b = basis + static_cast<std::size_t>(index) * dim;
    for (std::size_t t = 0; t < dim; ++t) out[t] += weight * b[t];
  }
}

}  // namespace

void project_sparse_serial(const std::vector<SparseRow>& rows, std::span<const double> basis,
                           std::size_t dim, std::span<double> out) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    project_one(rows[i], basis.data(), dim, out.data() + i * dim);
  }
}

void project_sparse_parallel(const std::vector<SparseRow>& rows, std::span<const double> basis,
                             std::size_t dim, std::span<double> out) {
  const auto n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    project_one(rows[i], basis.data(), dim, out.data() + i * dim);
  }
}

void project_sparse(const std::vector<SparseRow>& rows, std::span<const double> basis,
                    std::size_t dim, std::span<double> out, ExecPolicy policy) {
  if (policy == ExecPolicy::kSerial) {
    project_sparse_serial(rows, basis, dim, out);
  } else {
    project_sparse_parallel(rows, basis, dim, out);
  }
}

double log_softmax(std::span<double> values) {
  double max = -std::numeric_limits<double>::infinity();
  for (double v : values) max = std::max(max, v);
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  const double lse = max + std::log(sum);
  for (double& v : values) v -= lse;
  return lse;
}

}  // namespace genret
