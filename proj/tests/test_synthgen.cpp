#include <cmath>

#include <json.hpp>

#include "crowdtime/synthgen.hpp"
#include "support.hpp"

using namespace crowdtime;

TEST_CASE("noiseless limit") {
  SynthConfig c;
  c.spammer_fraction = 0.0;
  c.reliable_accuracy = 1.0;
  const auto data = generate(c);
  for (const auto& j : data.dataset.judgments()) REQUIRE(j.label == data.truth.labels[j.task]);
  CHECK(data.dataset.num_judgments() == c.num_tasks * c.judgments_per_task);
}

TEST_CASE("reliable agreement frequency") {
  SynthConfig c;
  c.num_tasks = 10000;
  c.num_workers = 10;
  c.judgments_per_task = 10;
  c.spammer_fraction = 0.0;
  c.reliable_accuracy = 0.8;
  const auto data = generate(c);
  const auto& d = data.dataset;
  REQUIRE(d.num_judgments() == 100000);
  for (int k = 0; k < d.num_workers(); ++k) {
    int agree = 0;
    for (int j : d.worker_judgments(k)) agree += d.judgment(j).label == data.truth.labels[d.judgment(j).task];
    CHECK(std::abs(agree / double(d.worker_judgments(k).size()) - 0.8) < 0.01);
  }
}

TEST_CASE("valid times inside, spam times outside") {
  SynthConfig c;
  c.spammer_fraction = 0.3;
  c.window_jitter = 0.5;
  c.reliable_propensity = 0.9;
  c.spammer_propensity = 0.1;
  const auto data = generate(c);
  const auto& t = data.truth;
  int spam = 0;
  for (int j = 0; j < data.dataset.num_judgments(); ++j) {
    const int i = data.dataset.judgment(j).task;
    const double x = t.log_times[j];
    CHECK(std::log(data.dataset.judgment(j).time) == doctest::Approx(x).epsilon(1e-12));
    if (t.valid[j]) {
      REQUIRE((t.window_lower[i] < x && x < t.window_upper[i]));
    } else {
      ++spam;
      REQUIRE((x < t.window_lower[i] || x > t.window_upper[i]));
    }
  }
  CHECK(spam > 0);
}

TEST_CASE("spammer count follows the floor rule") {
  SynthConfig c;
  c.spammer_fraction = 0.3;
  c.num_workers = 30;
  const auto data = generate(c);
  int n = 0;
  for (bool s : data.truth.spammer) n += s;
  CHECK(n == 9);
  c.spammer_fraction = 0.25;
  c.num_workers = 10;
  n = 0;
  for (bool s : generate(c).truth.spammer) n += s;
  CHECK(n == 2);
}

TEST_CASE("same seed, same data; sidecar and re-ingest") {
  SynthConfig c;
  c.seed = 77;
  const auto a = generate(c), b = generate(c);
  CHECK(a.dataset.task_ids() == b.dataset.task_ids());
  for (int j = 0; j < a.dataset.num_judgments(); ++j) {
    REQUIRE(a.dataset.judgment(j).label == b.dataset.judgment(j).label);
    REQUIRE(a.dataset.judgment(j).time == b.dataset.judgment(j).time);
  }
  CHECK(a.dataset.task_id(0) == "t000");

  auto dir = testing::scratch_dir("synth");
  write_judgments_csv(a.dataset, dir / "j.csv");
  write_gold_csv(a.dataset, dir / "g.csv");
  write_truth_json(c, a, dir / "truth.json");
  const Dataset back = load_judgments_csv(dir / "j.csv", LabelSpace(2), dir / "g.csv");
  CHECK(back.num_judgments() == a.dataset.num_judgments());
  CHECK(back.gold_map() == a.dataset.gold_map());
  const auto j = nlohmann::json::parse(testing::read_file(dir / "truth.json"));
  CHECK(j["num_spammers"] == 6);
  CHECK(j["workers"].size() == 30);
  CHECK(j["judgment_valid"].size() == static_cast<std::size_t>(a.dataset.num_judgments()));
}

TEST_CASE("spammer flags map onto dataset indices") {
  SynthConfig c;
  c.spammer_fraction = 0.5;
  c.num_workers = 6;
  c.judgments_per_task = 6;
  const auto data = generate(c);
  const auto flags = data.truth.spammer_by_index(data.dataset);
  for (int k = 0; k < 6; ++k) {
    const auto idx = data.dataset.worker_index(data.truth.worker_ids[k]);
    REQUIRE(idx);
    CHECK(flags[*idx] == data.truth.spammer[k]);
  }
}

TEST_CASE("invalid configurations") {
  auto bad = [](auto edit) {
    SynthConfig c;
    edit(c);
    return testing::error_kind([&] { generate(c); });
  };
  CHECK(bad([](SynthConfig& c) { c.judgments_per_task = 31; }) == ErrorKind::ConfigInvalid);
  CHECK(bad([](SynthConfig& c) { c.window_lower = 5.0; c.window_upper = 4.0; }) ==
        ErrorKind::ConfigInvalid);
  CHECK(bad([](SynthConfig& c) { c.spammer_fraction = 1.0; }) == ErrorKind::ConfigInvalid);
  CHECK(bad([](SynthConfig& c) { c.reliable_accuracy = 0.4; }) == ErrorKind::ConfigInvalid);
  CHECK(bad([](SynthConfig& c) { c.outlier_scale = 1.0; }) == ErrorKind::ConfigInvalid);
}
