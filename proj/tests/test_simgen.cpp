#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"

#include "bootmatch/simgen.hpp"
#include "bootmatch/stats.hpp"

using namespace bootmatch;
using test_support::expect_error;

TEST_SUITE_BEGIN("simgen");

TEST_CASE("all-zero model produces exactly zero responses") {
  simgen::SimulationConfig config;
  config.n_subjects = 50;
  config.confounder_shift = 0.0;
  config.confounder_to_outcome = 0.0;
  config.tau = 0.0;
  config.response_noise_sd = 0.0;
  config.day_effects.assign(12, 0.0);
  const PanelDataset ds = simgen::generate(config);
  for (double v : ds.responses.values) CHECK(v == 0.0);
}

TEST_CASE("generation is deterministic and validates") {
  simgen::SimulationConfig config;
  config.n_subjects = 500;
  config.tau = 0.7;
  config.seed = 424242;
  const PanelDataset a = simgen::generate(config);
  const PanelDataset b = simgen::generate(config);
  CHECK(a == b);
  CHECK_NOTHROW(validate(a));

  config.seed = 424243;
  CHECK(simgen::generate(config) != a);
}

TEST_CASE("digit-tail rule fixes the treated fraction") {
  for (std::size_t n : {20UL, 95UL, 1000UL, 1003UL}) {
    simgen::SimulationConfig config;
    config.n_subjects = n;
    const PanelDataset ds = simgen::generate(config);
    const std::size_t expected = (n + 9) / 10;  // ceil(n / 10)
    CHECK(ds.treated_count() == expected);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(ds.group[i] == (i % 10 == 0 ? 1 : 0));
      CHECK(ds.subject_ids[i] == std::to_string(i));
    }
  }
}

TEST_CASE("noiseless responses are constant after removing day effects") {
  simgen::SimulationConfig config;
  config.n_subjects = 60;
  config.tau = 0.0;
  config.response_noise_sd = 0.0;
  config.seed = 9;
  const PanelDataset ds = simgen::generate(config);
  const auto day = simgen::default_day_effects(config.total_periods);
  for (std::size_t i = 0; i < ds.n_subjects(); ++i) {
    const double base = ds.responses(i, 0) - day[0];
    for (std::size_t l = 1; l < ds.n_periods(); ++l) {
      CHECK(std::fabs(ds.responses(i, l) - day[l] - base) < 1e-12);
    }
  }
}

TEST_CASE("confounder shift separates the arms as configured") {
  simgen::SimulationConfig config;
  config.n_subjects = 20000;
  config.confounder_shift = 1.0;
  config.seed = 77;
  const auto draw = simgen::generate_draw(config);
  std::vector<double> u_t;
  std::vector<double> u_c;
  for (std::size_t i = 0; i < config.n_subjects; ++i) {
    (draw.dataset.group[i] == 1 ? u_t : u_c).push_back(draw.confounder[i]);
  }
  const double gap = stats::mean(u_t) - stats::mean(u_c);
  const double se = std::sqrt(1.0 / static_cast<double>(u_t.size()) +
                              1.0 / static_cast<double>(u_c.size()));
  CHECK(std::fabs(gap - config.confounder_shift) < 3.0 * se);
}

TEST_CASE("default confounding breaks the pre-period balance") {
  simgen::SimulationConfig config;
  config.n_subjects = 20000;
  config.seed = 3;
  const PanelDataset ds = simgen::generate(config);
  std::vector<double> pre_t;
  std::vector<double> pre_c;
  for (std::size_t i = 0; i < ds.n_subjects(); ++i) {
    (ds.group[i] == 1 ? pre_t : pre_c).push_back(pre_period_mean(ds, i));
  }
  const auto balance = stats::welch_t_test(pre_t, pre_c);
  CHECK(balance.p_value < 0.01);
  CHECK(stats::mean(pre_t) - stats::mean(pre_c) ==
        doctest::Approx(config.confounder_to_outcome * config.confounder_shift)
            .epsilon(0.1));
}

TEST_CASE("true_att echoes tau") {
  simgen::SimulationConfig config;
  CHECK(simgen::true_att(config) == 0.0);
  config.tau = 1.0;
  CHECK(simgen::true_att(config) == 1.0);
  config.tau = -0.5;
  CHECK(simgen::true_att(config) == -0.5);
}

TEST_CASE("invalid configurations are rejected") {
  simgen::SimulationConfig config;
  config.n_subjects = 10;
  expect_error(ErrorCode::ConfigInvalid, [&] { simgen::generate(config); });
  config.n_subjects = 100;
  config.pre_periods = 12;
  expect_error(ErrorCode::ConfigInvalid, [&] { simgen::generate(config); });
  config.pre_periods = 6;
  config.response_noise_sd = -1.0;
  expect_error(ErrorCode::ConfigInvalid, [&] { simgen::generate(config); });
  config.response_noise_sd = 1.0;
  config.day_effects = {1.0, 2.0};
  expect_error(ErrorCode::ConfigInvalid, [&] { simgen::generate(config); });
}

TEST_SUITE_END();
