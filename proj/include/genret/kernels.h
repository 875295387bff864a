#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP variant that must produce bitwise-identical output; tests compare
// the two and bench/ times them.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace genret {

enum class ExecPolicy { kSerial, kParallel };

/// Threads the parallel variants will use (1 without OpenMP).
int max_threads();

/// Calls fn(i) for i in [0, n). Iterations must be independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  ExecPolicy policy = ExecPolicy::kParallel);

/// For each of `n` points of `dim` values (row-major), the index of the
/// nearest of `k` centroids by squared L2 distance (lowest index on ties)
/// and that distance.
void nearest_centroid_serial(std::span<const double> points, std::size_t dim,
                             std::span<const double> centroids, std::size_t k,
                             std::span<std::uint32_t> assign, std::span<double> dist2);
void nearest_centroid_parallel(std::span<const double> points, std::size_t dim,
                               std::span<const double> centroids, std::size_t k,
                               std::span<std::uint32_t> assign, std::span<double> dist2);
void nearest_centroid(std::span<const double> points, std::size_t dim,
                      std::span<const double> centroids, std::size_t k,
                      std::span<std::uint32_t> assign, std::span<double> dist2,
                      ExecPolicy policy);

/// Sparse row (column index, weight), indices into a dense basis.
using SparseRow = std::vector<std::pair<std::uint32_t, double>>;

/// out[i] = sum_j rows[i][j].weight * basis[rows[i][j].index], each basis row
/// having `dim` values. Accumulation order follows the sparse row order.
void project_sparse_serial(const std::vector<SparseRow>& rows, std::span<const double> basis,
                           std::size_t dim, std::span<double> out);
void project_sparse_parallel(const std::vector<SparseRow>& rows, std::span<const double> basis,
                             std::size_t dim, std::span<double> out);
void project_sparse(const std::vector<SparseRow>& rows, std::span<const double> basis,
                    std::size_t dim, std::span<double> out, ExecPolicy policy);

/// In-place log-softmax; returns the log-sum-exp of the input.
double log_softmax(std::span<double> values);

}  // namespace genret
