#pragma once

#include <span>
#include <vector>

#include "crowdtime/dataset.hpp"
#include "crowdtime/hyperparameters.hpp"
#include "crowdtime/random.hpp"
#include "crowdtime/summary.hpp"

namespace crowdtime {

/// Bayesian classifier combination: t_i ~ Cat(p), c ~ Cat(pi^(k)_{t_i}),
/// Dirichlet priors on p and on every confusion row. Fitted by systematic-scan
/// Gibbs; task posteriors and confusion matrices are Rao-Blackwellised
/// posterior means (averaged full conditionals over the retained sweeps).
PosteriorSummary bcc_gibbs(const Dataset& d, const Hyperparameters& h,
                           const GibbsSettings& settings, RandomSource& rng);

struct CommunitySettings {
  int num_communities = 2;
  /// Weight of the community matrix in each worker's confusion-row prior.
  double concentration = 10.0;
};

/// Community BCC. Each worker belongs to one of M communities (uniform prior);
/// worker row c is drawn from Dir(pi0_c + concentration * rho_{m,c}), where
/// rho_m is the community's confusion matrix with prior Dir(pi0_c). Community
/// rows are updated by Metropolis-Hastings, everything else by Gibbs. As the
/// concentration goes to zero the model reduces to BCC.
PosteriorSummary cbcc_gibbs(const Dataset& d, const Hyperparameters& h,
                            const CommunitySettings& communities, const GibbsSettings& settings,
                            RandomSource& rng);

/// Number of tasks per class in `labels`.
Eigen::VectorXd class_counts(std::span<const int> labels, int num_classes);

/// Per-worker C x C tallies of (true label, given label). Only judgments with
/// valid[j] != 0 are counted when `valid` is non-empty.
std::vector<Eigen::MatrixXd> confusion_counts(const Dataset& d, std::span<const int> labels,
                                              std::span<const char> valid = {});

/// Row-normalised copy of a matrix of positive pseudo-counts.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& counts);

/// Log density of Dir(alpha) at x.
double dirichlet_log_pdf(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& alpha);

}  // namespace crowdtime
