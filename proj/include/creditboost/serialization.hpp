#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "creditboost/booster.hpp"
#include "creditboost/fusion.hpp"
#include "creditboost/learners.hpp"

namespace creditboost {

// Line-oriented text format; see README.md for the grammar. Doubles are
// written in shortest round-trip form so a loaded model predicts bit-for-bit
// like the one that was saved. Readers throw ParseError on malformed input.

std::string serialize(const BoostedModel& model);
std::string serialize(const FittedLearner& learner);
std::string serialize(const FusionModel& model);

/// What `train` writes: the training-split preprocessing state followed by
/// the fusion model, so raw input can be scored exactly as at fit time.
struct ScoringPipeline {
  PreprocessState preprocess;
  FusionModel model;
};

std::string serialize(const ScoringPipeline& pipeline);

BoostedModel deserialize_gbdt(std::string_view text);
FittedLearner deserialize_learner(std::string_view text);
FusionModel deserialize_fusion(std::string_view text);
ScoringPipeline deserialize_pipeline(std::string_view text);

void save_pipeline(const std::filesystem::path& path, const ScoringPipeline& pipeline);
ScoringPipeline load_pipeline(const std::filesystem::path& path);

}  // namespace creditboost
