#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "crowdtime/bcc.hpp"
#include "crowdtime/dataset.hpp"
#include "crowdtime/hyperparameters.hpp"
#include "crowdtime/random.hpp"
#include "crowdtime/summary.hpp"

namespace crowdtime {

struct ModelSettings {
  Hyperparameters hyperparameters;
  GibbsSettings gibbs;
  CommunitySettings communities;
  int onecoin_max_iters = 500;
};

/// mv, vd, random, onecoin, bcc, cbcc, bccprop, bcctime
const std::vector<std::string>& model_names();

/// Runs the named aggregator. Time-aware models see the dataset after the
/// hyperparameters' time transform is applied. Throws UnknownModel.
PosteriorSummary run_model(std::string_view name, const Dataset& d, const ModelSettings& settings,
                           RandomSource& rng);

}  // namespace crowdtime
