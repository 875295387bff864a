#pragma once

// Five queries with hand-computed metrics.
//   q1 {a}    hit at rank 1
//   q2 {b}    hit at rank 3
//   q3 {c}    hit at rank 7
//   q4 {d,e}  d at rank 1, e at rank 11
//   q5 {f}    never retrieved
// R@1  = (1 + 0 + 0 + 1/2 + 0) / 5 = 3/10
// R@5  = (1 + 1 + 0 + 1/2 + 0) / 5 = 1/2
// R@10 = (1 + 1 + 1 + 1/2 + 0) / 5 = 7/10
// MRR@10 = (1 + 1/3 + 1/7 + 1 + 0) / 5 = 52/105

#include <string>
#include <vector>

#include "genret/evaluation.h"

namespace genret::fixtures {

inline RankedResult ranking(const std::vector<std::string>& keys) {
  RankedResult r;
  double score = 0.0;
  for (const auto& k : keys) r.push_back({k, score -= 1.0, {}});
  return r;
}

inline std::vector<EvalRecord> metric_fixture() {
  return {
      {{"a"}, ranking({"a", "x1", "x2"})},
      {{"b"}, ranking({"x1", "x2", "b", "x3"})},
      {{"c"}, ranking({"x1", "x2", "x3", "x4", "x5", "x6", "c", "x7", "x8", "x9"})},
      {{"d", "e"}, ranking({"d", "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9", "e"})},
      {{"f"}, ranking({"x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9", "x10"})},
  };
}

constexpr double kRecall1 = 3.0 / 10.0;
constexpr double kRecall5 = 1.0 / 2.0;
constexpr double kRecall10 = 7.0 / 10.0;
constexpr double kMrr10 = 52.0 / 105.0;

}  // namespace genret::fixtures
