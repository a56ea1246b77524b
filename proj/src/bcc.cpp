#include "crowdtime/bcc.hpp"

#include <chrono>
#include <cmath>

#include "crowdtime/baselines.hpp"
#include "crowdtime/detail/chains.hpp"

namespace crowdtime {

namespace {

constexpr int kCommunityMhSteps = 3;
constexpr double kCommunityProposalScale = 200.0;

std::vector<int> majority_labels(const Dataset& d) {
  const Eigen::MatrixXd counts = vote_counts(d);
  std::vector<int> t(d.num_tasks());
  for (int i = 0; i < d.num_tasks(); ++i) t[i] = argmax_lowest(counts.row(i).transpose());
  return t;
}

struct ChainResult {
  Eigen::MatrixXd label_counts;         // N x C summed label conditionals
  std::vector<Eigen::MatrixXd> pi_sum;  // K sums of conditional posterior means
  Eigen::MatrixXd community_counts;     // K x M, CBCC only
  int retained = 0;
};

/// One BCC/CBCC chain. With `communities == nullptr` it is plain BCC.
class BccChain {
 public:
  BccChain(const Dataset& d, const Hyperparameters& h, const CommunitySettings* communities,
           RandomSource& rng)
      : d_(d), h_(h), communities_(communities), rng_(rng), C_(d.num_classes()) {
    prior_ = h.confusion_prior(C_);
    t_ = majority_labels(d);
    label_cond_ = Eigen::MatrixXd::Zero(d.num_tasks(), C_);
    p_ = h.p0 / h.p0.sum();
    log_pi_.assign(d.num_workers(), normalize_rows(prior_).array().log().matrix());
    if (communities_ != nullptr) {
      const int M = communities_->num_communities;
      rho_.resize(M);
      for (int m = 0; m < M; ++m) {
        // spread initial diagonals so the communities start out distinguishable
        const double diag = 1.0 / C_ + (1.0 - 1.0 / C_) * (M - m) / (M + 1.0);
        rho_[m] = Eigen::MatrixXd::Constant(C_, C_, (1.0 - diag) / (C_ - 1));
        rho_[m].diagonal().setConstant(diag);
      }
      membership_.resize(d.num_workers());
      for (auto& m : membership_)
        m = sample_categorical(Eigen::VectorXd::Ones(M), rng_);
    }
  }

  void sweep() {
    sample_labels();
    p_ = sample_dirichlet(h_.p0 + class_counts(t_, C_), rng_);
    counts_ = confusion_counts(d_, t_);
    for (int k = 0; k < d_.num_workers(); ++k) {
      const Eigen::MatrixXd row_prior = worker_prior(k);
      for (int c = 0; c < C_; ++c)
        log_pi_[k].row(c) =
            sample_dirichlet((row_prior.row(c) + counts_[k].row(c)).transpose(), rng_)
                .array()
                .log()
                .transpose();
    }
    if (communities_ != nullptr) {
      sample_memberships();
      sample_community_rows();
    }
  }

  void accumulate(ChainResult& out) const {
    out.label_counts += label_cond_;
    for (int k = 0; k < d_.num_workers(); ++k)
      out.pi_sum[k] += normalize_rows(worker_prior(k) + counts_[k]);
    if (communities_ != nullptr)
      for (int k = 0; k < d_.num_workers(); ++k) out.community_counts(k, membership_[k]) += 1.0;
    ++out.retained;
  }

 private:
  Eigen::MatrixXd worker_prior(int k) const {
    if (communities_ == nullptr) return prior_;
    return prior_ + communities_->concentration * rho_[membership_[k]];
  }

  void sample_labels() {
    const Eigen::VectorXd log_p = p_.array().log().matrix();
    Eigen::VectorXd logw(C_);
    for (int i = 0; i < d_.num_tasks(); ++i) {
      logw = log_p;
      for (int j : d_.task_judgments(i)) {
        const auto& jd = d_.judgment(j);
        logw += log_pi_[jd.worker].col(jd.label);
      }
      // keep the normalised conditional for the Rao-Blackwellised label estimate
      const Eigen::VectorXd w = (logw.array() - logw.maxCoeff()).exp().matrix();
      label_cond_.row(i) = (w / w.sum()).transpose();
      t_[i] = sample_categorical(w, rng_);
    }
  }

  double worker_log_density(int k, int m) const {
    const Eigen::MatrixXd alpha = prior_ + communities_->concentration * rho_[m];
    double lp = 0.0;
    for (int c = 0; c < C_; ++c)
      lp += dirichlet_log_pdf(log_pi_[k].row(c).array().exp().transpose(),
                              alpha.row(c).transpose());
    return lp;
  }

  void sample_memberships() {
    const int M = communities_->num_communities;
    Eigen::VectorXd logw(M);
    for (int k = 0; k < d_.num_workers(); ++k) {
      for (int m = 0; m < M; ++m) logw[m] = worker_log_density(k, m);
      membership_[k] = sample_categorical_log(logw, rng_);
    }
  }

  // log target for community row rho_{m,c}: Dir(pi0_c) prior times the
  // densities of the member workers' rows
  double community_row_log_target(int m, int c, const Eigen::VectorXd& row) const {
    double lp = dirichlet_log_pdf(row, prior_.row(c).transpose());
    const Eigen::VectorXd alpha = prior_.row(c).transpose() + communities_->concentration * row;
    for (int k = 0; k < d_.num_workers(); ++k)
      if (membership_[k] == m)
        lp += dirichlet_log_pdf(log_pi_[k].row(c).array().exp().transpose(), alpha);
    return lp;
  }

  void sample_community_rows() {
    for (int m = 0; m < communities_->num_communities; ++m) {
      for (int c = 0; c < C_; ++c) {
        Eigen::VectorXd current = rho_[m].row(c).transpose();
        double current_lp = community_row_log_target(m, c, current);
        for (int step = 0; step < kCommunityMhSteps; ++step) {
          const Eigen::VectorXd fwd = kCommunityProposalScale * current.array() + 1.0;
          const Eigen::VectorXd proposal = sample_dirichlet(fwd, rng_);
          const Eigen::VectorXd back = kCommunityProposalScale * proposal.array() + 1.0;
          const double proposal_lp = community_row_log_target(m, c, proposal);
          const double log_ratio = proposal_lp - current_lp + dirichlet_log_pdf(current, back) -
                                   dirichlet_log_pdf(proposal, fwd);
          if (std::log(rng_.uniform()) < log_ratio) {
            current = proposal;
            current_lp = proposal_lp;
          }
        }
        rho_[m].row(c) = current.transpose();
      }
    }
  }

  const Dataset& d_;
  const Hyperparameters& h_;
  const CommunitySettings* communities_;
  RandomSource& rng_;
  int C_;
  Eigen::MatrixXd prior_;
  std::vector<int> t_;
  Eigen::MatrixXd label_cond_;  // N x C, conditional of t from the last sweep
  Eigen::VectorXd p_;
  std::vector<Eigen::MatrixXd> log_pi_;
  std::vector<Eigen::MatrixXd> counts_;
  std::vector<Eigen::MatrixXd> rho_;
  std::vector<int> membership_;
};

PosteriorSummary run_bcc(const Dataset& d, const Hyperparameters& h,
                         const CommunitySettings* communities, const GibbsSettings& settings,
                         RandomSource& rng, std::string method) {
  const auto start = std::chrono::steady_clock::now();
  settings.validate();
  h.validate(d.num_classes());
  const int C = d.num_classes();
  const int M = communities ? communities->num_communities : 0;

  auto results = detail::run_chains<ChainResult>(settings, rng, [&](RandomSource& chain_rng, int) {
    ChainResult r;
    r.label_counts = Eigen::MatrixXd::Zero(d.num_tasks(), C);
    r.pi_sum.assign(d.num_workers(), Eigen::MatrixXd::Zero(C, C));
    r.community_counts = Eigen::MatrixXd::Zero(d.num_workers(), M);
    BccChain chain(d, h, communities, chain_rng);
    for (int it = 0; it < settings.iterations; ++it) {
      chain.sweep();
      if (it >= settings.burnin) chain.accumulate(r);
    }
    return r;
  });

  ChainResult total = results[0];
  for (std::size_t c = 1; c < results.size(); ++c) {
    total.label_counts += results[c].label_counts;
    for (int k = 0; k < d.num_workers(); ++k) total.pi_sum[k] += results[c].pi_sum[k];
    total.community_counts += results[c].community_counts;
    total.retained += results[c].retained;
  }

  PosteriorSummary s = empty_summary(d, std::move(method));
  s.label_probs = total.label_counts / total.retained;
  for (auto& pi : total.pi_sum) s.confusion.push_back(pi / total.retained);
  if (communities) s.community = total.community_counts / total.retained;
  s.run.seed = rng.seed();
  s.run.gibbs = settings;
  s.run.hyperparameters = h;
  s.run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

}  // namespace

Eigen::VectorXd class_counts(std::span<const int> labels, int num_classes) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(num_classes);
  for (int t : labels) counts[t] += 1.0;
  return counts;
}

std::vector<Eigen::MatrixXd> confusion_counts(const Dataset& d, std::span<const int> labels,
                                              std::span<const char> valid) {
  const int C = d.num_classes();
  std::vector<Eigen::MatrixXd> counts(d.num_workers(), Eigen::MatrixXd::Zero(C, C));
  const auto js = d.judgments();
  for (std::size_t j = 0; j < js.size(); ++j) {
    if (!valid.empty() && !valid[j]) continue;
    counts[js[j].worker](labels[js[j].task], js[j].label) += 1.0;
  }
  return counts;
}

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& counts) {
  return counts.array().colwise() / counts.rowwise().sum().array();
}

double dirichlet_log_pdf(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& alpha) {
  double lp = std::lgamma(alpha.sum());
  for (Eigen::Index i = 0; i < alpha.size(); ++i)
    lp += (alpha[i] - 1.0) * std::log(x[i]) - std::lgamma(alpha[i]);
  return lp;
}

PosteriorSummary bcc_gibbs(const Dataset& d, const Hyperparameters& h,
                           const GibbsSettings& settings, RandomSource& rng) {
  return run_bcc(d, h, nullptr, settings, rng, "bcc");
}

PosteriorSummary cbcc_gibbs(const Dataset& d, const Hyperparameters& h,
                            const CommunitySettings& communities, const GibbsSettings& settings,
                            RandomSource& rng) {
  if (communities.num_communities < 1)
    throw Error(ErrorKind::InvalidArgument, "CBCC needs at least one community");
  if (!(communities.concentration > 0.0))
    throw Error(ErrorKind::InvalidArgument, "community concentration must be positive");
  return run_bcc(d, h, &communities, settings, rng, "cbcc");
}

}  // namespace crowdtime
