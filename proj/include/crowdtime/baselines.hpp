#pragma once

#include "crowdtime/dataset.hpp"
#include "crowdtime/summary.hpp"

namespace crowdtime {

/// Point mass on the most voted label; ties go to the lowest label index.
PosteriorSummary majority_vote(const Dataset& d);

/// Empirical label frequencies per task.
PosteriorSummary vote_distribution(const Dataset& d);

/// Uniform distribution for every task.
PosteriorSummary random_baseline(const Dataset& d);

/// N x C matrix of label counts per task.
Eigen::MatrixXd vote_counts(const Dataset& d);

/// Summary skeleton with ids filled in and an N x C zero label matrix.
PosteriorSummary empty_summary(const Dataset& d, std::string method);

}  // namespace crowdtime
