#include "genret/kernels.h"

#include <gtest/gtest.h>

#include <cmath>

#include "genret/rng.h"

namespace genret {
namespace {

TEST(Kernels, NearestCentroidSerialEqualsParallel) {
  Rng rng(1);
  const std::size_t n = 500, dim = 7, k = 13;
  std::vector<double> points(n * dim), centroids(k * dim);
  for (auto& x : points) x = rng.normal();
  for (auto& x : centroids) x = rng.normal();
  // duplicate centroid: ties must go to the lower index
  std::copy(centroids.begin(), centroids.begin() + dim, centroids.begin() + 5 * dim);
  std::vector<std::uint32_t> a1(n), a2(n);
  std::vector<double> d1(n), d2(n);
  nearest_centroid_serial(points, dim, centroids, k, a1, d1);
  nearest_centroid_parallel(points, dim, centroids, k, a2, d2);
  EXPECT_EQ(a1, a2);
  EXPECT_EQ(d1, d2);
  for (auto a : a1) EXPECT_NE(a, 5u);
}

TEST(Kernels, ProjectSparseSerialEqualsParallel) {
  Rng rng(2);
  const std::size_t basis_rows = 50, dim = 9;
  std::vector<double> basis(basis_rows * dim);
  for (auto& x : basis) x = rng.normal();
  std::vector<SparseRow> rows(120);
  for (auto& row : rows) {
    const auto len = rng.below(12);
    for (std::size_t j = 0; j < len; ++j) {
      row.emplace_back(static_cast<std::uint32_t>(rng.below(basis_rows)), rng.normal());
    }
  }
  std::vector<double> o1(rows.size() * dim), o2(rows.size() * dim);
  project_sparse_serial(rows, basis, dim, o1);
  project_sparse_parallel(rows, basis, dim, o2);
  EXPECT_EQ(o1, o2);
  // spot-check one row by hand
  double expect = 0;
  for (const auto& [idx, w] : rows[3]) expect += w * basis[idx * dim + 2];
  EXPECT_DOUBLE_EQ(o1[3 * dim + 2], expect);
}

TEST(Kernels, LogSoftmaxNormalizes) {
  std::vector<double> v{1.0, 2.0, 3.0, -1000.0};
  const double lse = log_softmax(v);
  EXPECT_NEAR(lse, std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)), 1e-12);
  double total = 0;
  for (double x : v) total += std::exp(x);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Kernels, ParallelForVisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_GE(max_threads(), 1);
}

}  // namespace
}  // namespace genret
