#include "crowdtime/summary.hpp"

namespace crowdtime {

std::vector<int> hard_labels(const LabelDistributions& probs) {
  std::vector<int> out(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) out[i] = argmax_lowest(probs.row(i).transpose());
  return out;
}

int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& v) {
  int best = 0;
  for (Eigen::Index c = 1; c < v.size(); ++c)
    if (v[c] > v[best]) best = static_cast<int>(c);
  return best;
}

void GibbsSettings::validate() const {
  if (burnin < 0 || iterations <= burnin || chains < 1)
    throw Error(ErrorKind::InvalidIterationCounts,
                "need iterations > burnin >= 0 and at least one chain (got iterations=" +
                    std::to_string(iterations) + ", burnin=" + std::to_string(burnin) + ")");
}

}  // namespace crowdtime
