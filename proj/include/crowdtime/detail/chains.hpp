#pragma once

#include <exception>
#include <thread>
#include <vector>

#include "crowdtime/random.hpp"
#include "crowdtime/summary.hpp"

namespace crowdtime::detail {

/// Runs `settings.chains` independent chains, chain c seeded from
/// `rng.split(c)`. Chains run on their own threads and results come back in
/// chain order, so the outcome does not depend on scheduling.
template <class Result, class RunChain>
std::vector<Result> run_chains(const GibbsSettings& settings, const RandomSource& rng,
                               RunChain&& run_chain) {
  std::vector<Result> results(settings.chains);
  if (settings.chains == 1) {
    RandomSource child = rng.split(0);
    results[0] = run_chain(child, 0);
    return results;
  }
  std::vector<std::exception_ptr> errors(settings.chains);
  std::vector<std::thread> workers;
  workers.reserve(settings.chains);
  for (int c = 0; c < settings.chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        RandomSource child = rng.split(static_cast<std::uint64_t>(c));
        results[c] = run_chain(child, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace crowdtime::detail
