#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "genret/common.h"
#include "genret/corpus.h"

namespace genret {

enum class Stage { kGeneralPassage, kGeneralTerms, kPseudoQuery, kSupervised };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view name);

/// One "text-to-docid" sample. `target` holds the docid tokens without the
/// end-of-docid sentinel.
struct TrainingPair {
  TokenSequence input;
  std::vector<TokenId> target;
  std::string doc_key;
  Stage stage = Stage::kSupervised;
};

}  // namespace genret
