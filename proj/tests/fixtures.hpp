#pragma once

// Hand-counted fixtures shared by the unit tests and the acceptance run.

#include <vector>

#include "csm/eval.hpp"

namespace csm::fixture {

// Tags: O=0, B/I-ENT:PER=1/2, B/I-ENT:GPE=3/4, B/I-TRG:Movement=5/6,
// B/I-TRG:Conflict=7/8.
inline corpus::TagSchema metric_schema() {
  return corpus::TagSchema({"PER", "GPE"}, {"Movement", "Conflict"});
}

struct Pair {
  std::vector<int> gold;
  std::vector<int> pred;
};

// Ten sentences; per-sentence contributions in the trailing comments as
// entity tp/fp/fn | trigger tp/fp/fn.
inline std::vector<Pair> metric_sentences() {
  return {
      {{1, 0, 5}, {1, 0, 5}},        // 1/0/0 | 1/0/0
      {{0}, {1}},                    // 0/1/0 | 0/0/0  gold O, predicted entity
      {{3, 4}, {3, 0}},              // 1/0/1 | 0/0/0
      {{5, 0}, {7, 0}},              // 0/0/0 | 0/1/1
      {{1, 2, 0, 7}, {3, 2, 0, 7}},  // 1/1/1 | 1/0/0
      {{0, 0, 0}, {0, 0, 0}},        // nothing counted
      {{3}, {5}},                    // 0/0/1 | 0/1/0  cross-role miss
      {{7, 8}, {7, 8}},              // 0/0/0 | 2/0/0
      {{0, 5}, {0, 0}},              // 0/0/0 | 0/0/1
      {{1, 0, 3}, {1, 0, 3}},        // 2/0/0 | 0/0/0
  };
}

inline constexpr eval::Counts kEntity{5, 2, 3};
inline constexpr eval::Counts kTrigger{4, 2, 2};
inline constexpr eval::Counts kJoint{9, 4, 5};

}  // namespace csm::fixture
