#pragma once

#include <cstdint>
#include <vector>

#include "bootmatch/dataset.hpp"

namespace bootmatch::simgen {

// Synthetic panel with a digit-tail assignment rule: subject i is treated iff
// its id ends in 0. A latent confounder u_i ~ N(confounder_shift * D_i, 1)
// drives both the features and the responses, so the arms differ before any
// treatment is applied.
struct SimulationConfig {
  std::size_t n_subjects = 400000;
  std::size_t k = 6;                    // feature count
  double tau = 0.0;                     // true treatment effect (post periods)
  double confounder_shift = 1.0;        // mean shift of u for treated subjects
  double confounder_to_outcome = 1.0;   // weight of u in the response
  double feature_noise_sd = 0.25;
  double response_noise_sd = 1.0;
  std::vector<double> day_effects;      // empty selects the default profile
  std::size_t pre_periods = 6;
  std::size_t total_periods = 12;
  std::uint64_t seed = 0;
};

// Smooth weekly-ish seasonality used when day_effects is left empty.
std::vector<double> default_day_effects(std::size_t total_periods);

struct SimulationDraw {
  PanelDataset dataset;
  std::vector<double> confounder;  // latent u per subject
};

// Deterministic given the config; subjects use independent seeded streams.
SimulationDraw generate_draw(const SimulationConfig& config);
PanelDataset generate(const SimulationConfig& config);

double true_att(const SimulationConfig& config);

}  // namespace bootmatch::simgen
