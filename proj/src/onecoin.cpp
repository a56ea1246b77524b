#include "crowdtime/onecoin.hpp"

#include <algorithm>
#include <cmath>

#include "crowdtime/baselines.hpp"

namespace crowdtime {

namespace {

// Fills posteriors for the current parameters and returns the log-likelihood.
double e_step(const Dataset& d, const Eigen::VectorXd& accuracy, const Eigen::VectorXd& prior,
              LabelDistributions& posterior) {
  double ll = 0.0;
  Eigen::Vector2d logp;
  for (int i = 0; i < d.num_tasks(); ++i) {
    logp << std::log(prior[0]), std::log(prior[1]);
    for (int j : d.task_judgments(i)) {
      const auto& jd = d.judgment(j);
      const double a = accuracy[jd.worker];
      for (int c = 0; c < 2; ++c) logp[c] += std::log(jd.label == c ? a : 1.0 - a);
    }
    const double top = logp.maxCoeff();
    const Eigen::Vector2d w = (logp.array() - top).exp().matrix();
    const double total = w.sum();
    posterior.row(i) = (w / total).transpose();
    ll += top + std::log(total);
  }
  return ll;
}

}  // namespace

OneCoinModel onecoin_em(const Dataset& d, int max_iters, double tol) {
  if (d.num_classes() != 2)
    throw Error(ErrorKind::NotBinary, "one-coin model needs exactly 2 classes, got " +
                                          std::to_string(d.num_classes()));
  if (max_iters < 1 || !(tol > 0.0))
    throw Error(ErrorKind::InvalidArgument, "one-coin EM needs max_iters >= 1 and tol > 0");
  for (int i = 0; i < d.num_tasks(); ++i)
    if (d.task_judgments(i).empty())
      throw Error(ErrorKind::TaskWithoutJudgments, "task " + d.task_id(i));

  OneCoinModel m;
  m.worker_accuracy = Eigen::VectorXd::Constant(d.num_workers(), kOneCoinInitialAccuracy);
  m.class_prior = Eigen::VectorXd::Constant(2, 0.5);
  m.task_posterior.resize(d.num_tasks(), 2);

  for (m.iterations = 0; m.iterations < max_iters;) {
    m.log_likelihood.push_back(e_step(d, m.worker_accuracy, m.class_prior, m.task_posterior));

    Eigen::VectorXd accuracy(d.num_workers());
    for (int k = 0; k < d.num_workers(); ++k) {
      double agree = 0.0;
      const auto js = d.worker_judgments(k);
      for (int j : js) agree += m.task_posterior(d.judgment(j).task, d.judgment(j).label);
      accuracy[k] = js.empty() ? kOneCoinInitialAccuracy
                               : std::clamp(agree / static_cast<double>(js.size()),
                                            kOneCoinMinAccuracy, kOneCoinMaxAccuracy);
    }
    const Eigen::VectorXd prior = m.task_posterior.colwise().mean().transpose();

    const double change = std::max((accuracy - m.worker_accuracy).cwiseAbs().maxCoeff(),
                                   (prior - m.class_prior).cwiseAbs().maxCoeff());
    m.worker_accuracy = accuracy;
    m.class_prior = prior;
    ++m.iterations;
    if (change < tol) {
      m.converged = true;
      break;
    }
  }
  m.log_likelihood.push_back(e_step(d, m.worker_accuracy, m.class_prior, m.task_posterior));
  return m;
}

PosteriorSummary onecoin_summary(const Dataset& d, const OneCoinModel& model) {
  PosteriorSummary s = empty_summary(d, "onecoin");
  s.label_probs = model.task_posterior;
  s.confusion.reserve(d.num_workers());
  for (int k = 0; k < d.num_workers(); ++k) {
    const double a = model.worker_accuracy[k];
    ConfusionMatrix cm(2, 2);
    cm << a, 1.0 - a, 1.0 - a, a;
    s.confusion.push_back(cm);
  }
  return s;
}

}  // namespace crowdtime
