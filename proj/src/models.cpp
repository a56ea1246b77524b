#include "crowdtime/models.hpp"

#include <algorithm>
#include <chrono>

#include "crowdtime/baselines.hpp"
#include "crowdtime/bcctime.hpp"
#include "crowdtime/error.hpp"
#include "crowdtime/onecoin.hpp"

namespace crowdtime {

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names{"mv",  "vd",   "random",  "onecoin",
                                              "bcc", "cbcc", "bccprop", "bcctime"};
  return names;
}

PosteriorSummary run_model(std::string_view name, const Dataset& d, const ModelSettings& settings,
                           RandomSource& rng) {
  const auto& names = model_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw Error(ErrorKind::UnknownModel, "unknown model '" + std::string(name) + "'");

  const auto start = std::chrono::steady_clock::now();
  PosteriorSummary s;
  if (name == "mv") {
    s = majority_vote(d);
  } else if (name == "vd") {
    s = vote_distribution(d);
  } else if (name == "random") {
    s = random_baseline(d);
  } else if (name == "onecoin") {
    s = onecoin_summary(d, onecoin_em(d, settings.onecoin_max_iters));
  } else if (name == "bcc") {
    s = bcc_gibbs(d, settings.hyperparameters, settings.gibbs, rng);
  } else if (name == "cbcc") {
    s = cbcc_gibbs(d, settings.hyperparameters, settings.communities, settings.gibbs, rng);
  } else {
    const TimeTransform wanted = settings.hyperparameters.time_transform;
    const Dataset timed = d.time_transform() == wanted ? d : transform_times(d, wanted);
    s = name == "bcctime"
            ? bcctime_gibbs(timed, settings.hyperparameters, settings.gibbs, rng)
            : bccpropensity_gibbs(timed, settings.hyperparameters, settings.gibbs, rng);
  }
  s.run.seed = rng.seed();
  s.run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

}  // namespace crowdtime
