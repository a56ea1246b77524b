#include "crowdtime/baselines.hpp"

namespace crowdtime {

PosteriorSummary empty_summary(const Dataset& d, std::string method) {
  PosteriorSummary s;
  s.method = std::move(method);
  s.task_ids = d.task_ids();
  s.worker_ids = d.worker_ids();
  s.label_probs = Eigen::MatrixXd::Zero(d.num_tasks(), d.num_classes());
  return s;
}

Eigen::MatrixXd vote_counts(const Dataset& d) {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(d.num_tasks(), d.num_classes());
  for (const auto& j : d.judgments()) counts(j.task, j.label) += 1.0;
  for (int i = 0; i < d.num_tasks(); ++i)
    if (d.task_judgments(i).empty())
      throw Error(ErrorKind::TaskWithoutJudgments, "task " + d.task_id(i));
  return counts;
}

PosteriorSummary majority_vote(const Dataset& d) {
  const Eigen::MatrixXd counts = vote_counts(d);
  PosteriorSummary s = empty_summary(d, "mv");
  for (int i = 0; i < d.num_tasks(); ++i)
    s.label_probs(i, argmax_lowest(counts.row(i).transpose())) = 1.0;
  return s;
}

PosteriorSummary vote_distribution(const Dataset& d) {
  const Eigen::MatrixXd counts = vote_counts(d);
  PosteriorSummary s = empty_summary(d, "vd");
  s.label_probs = counts.array().colwise() / counts.rowwise().sum().array();
  return s;
}

PosteriorSummary random_baseline(const Dataset& d) {
  PosteriorSummary s = empty_summary(d, "random");
  s.label_probs.setConstant(1.0 / d.num_classes());
  return s;
}

}  // namespace crowdtime
