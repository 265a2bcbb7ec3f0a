#include "bootmatch/simgen.hpp"

#include <cmath>
#include <random>

#include "bootmatch/errors.hpp"
#include "bootmatch/rng.hpp"

namespace bootmatch::simgen {

namespace {

void check_config(const SimulationConfig& config) {
  if (config.n_subjects < 20) {
    throw Error(ErrorCode::ConfigInvalid, "need at least 20 subjects");
  }
  if (config.k < 1) {
    throw Error(ErrorCode::ConfigInvalid, "need at least one feature");
  }
  if (config.pre_periods < 1 || config.pre_periods >= config.total_periods) {
    throw Error(ErrorCode::ConfigInvalid, "pre_periods must satisfy 1 <= t < T");
  }
  if (config.feature_noise_sd < 0.0 || config.response_noise_sd < 0.0) {
    throw Error(ErrorCode::ConfigInvalid, "noise scales must be >= 0");
  }
  if (!config.day_effects.empty() && config.day_effects.size() != config.total_periods) {
    throw Error(ErrorCode::ConfigInvalid, "day_effects length must equal total_periods");
  }
}

}  // namespace

std::vector<double> default_day_effects(std::size_t total_periods) {
  std::vector<double> effects(total_periods);
  constexpr double kTwoPi = 6.283185307179586;
  for (std::size_t l = 0; l < total_periods; ++l) {
    effects[l] = 0.5 * std::sin(kTwoPi * static_cast<double>(l) / 7.0);
  }
  return effects;
}

SimulationDraw generate_draw(const SimulationConfig& config) {
  check_config(config);
  const std::size_t n = config.n_subjects;
  const std::size_t k = config.k;
  const std::size_t periods = config.total_periods;
  const std::vector<double> day_effects =
      config.day_effects.empty() ? default_day_effects(periods) : config.day_effects;

  SimulationDraw draw;
  PanelDataset& ds = draw.dataset;
  ds.features = Matrix(n, k);
  ds.responses = Matrix(n, periods);
  ds.group.resize(n);
  ds.subject_ids.resize(n);
  ds.pre_periods = config.pre_periods;
  draw.confounder.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    ds.subject_ids[i] = std::to_string(i);
    const bool treated = i % 10 == 0;
    ds.group[i] = treated ? 1 : 0;

    auto engine = make_engine(mix_seed(config.seed, i));
    std::normal_distribution<double> normal(0.0, 1.0);

    const double u = (treated ? config.confounder_shift : 0.0) + normal(engine);
    draw.confounder[i] = u;

    for (std::size_t j = 0; j < k; ++j) {
      ds.features(i, j) = u + config.feature_noise_sd * normal(engine);
    }
    for (std::size_t l = 0; l < periods; ++l) {
      const double treatment =
          (treated && l >= config.pre_periods) ? config.tau : 0.0;
      ds.responses(i, l) = config.confounder_to_outcome * u + day_effects[l] +
                           treatment + config.response_noise_sd * normal(engine);
    }
  }
  return draw;
}

PanelDataset generate(const SimulationConfig& config) {
  return generate_draw(config).dataset;
}

double true_att(const SimulationConfig& config) { return config.tau; }

}  // namespace bootmatch::simgen
