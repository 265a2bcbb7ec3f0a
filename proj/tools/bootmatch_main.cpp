#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "bootmatch/engine.hpp"
#include "bootmatch/errors.hpp"
#include "bootmatch/io.hpp"
#include "bootmatch/simgen.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::size_t threads_from_env() {
  const char* env = std::getenv("BOOTMATCH_THREADS");
  if (env == nullptr) return 0;
  const long parsed = std::strtol(env, nullptr, 10);
  return parsed > 0 ? static_cast<std::size_t>(parsed) : 0;
}

struct AnalyzeOptions {
  std::string input;
  std::string output;
  std::size_t pre_periods = 0;
  bootmatch::engine::BootstrapConfig config;
  std::string caliper = "auto";
  bool no_features = false;
  bool no_pre_responses = false;
  bool no_standardize = false;
  std::string estimator = "did";
};

void apply_analyze_options(AnalyzeOptions& opt) {
  using bootmatch::matching::CaliperPolicy;
  if (opt.estimator == "did") {
    opt.config.estimator = bootmatch::inference::Estimator::did;
  } else if (opt.estimator == "post_only") {
    opt.config.estimator = bootmatch::inference::Estimator::post_only;
  } else {
    throw bootmatch::Error(bootmatch::ErrorCode::ConfigInvalid,
                           "estimator must be 'did' or 'post_only'");
  }
  opt.config.design_spec.use_features = !opt.no_features;
  opt.config.design_spec.use_pre_period_responses = !opt.no_pre_responses;
  opt.config.design_spec.standardize = !opt.no_standardize;
  if (opt.caliper == "auto") {
    opt.config.caliper = CaliperPolicy{};
  } else if (opt.caliper == "none") {
    opt.config.caliper = CaliperPolicy{CaliperPolicy::Mode::none, 0.0};
  } else {
    char* end = nullptr;
    const double width = std::strtod(opt.caliper.c_str(), &end);
    if (end == opt.caliper.c_str() || *end != '\0' || !(width > 0.0)) {
      throw bootmatch::Error(bootmatch::ErrorCode::ConfigInvalid,
                             "caliper must be 'auto', 'none' or a positive logit width");
    }
    opt.config.caliper = CaliperPolicy{CaliperPolicy::Mode::fixed, width};
  }
  if (opt.config.workers == 0) opt.config.workers = threads_from_env();
}

int cmd_simulate(const bootmatch::simgen::SimulationConfig& config, const std::string& out) {
  const bootmatch::PanelDataset dataset = bootmatch::simgen::generate(config);
  bootmatch::io::save_dataset_csv(dataset, out);
  std::cout << "wrote " << dataset.n_subjects() << " subjects ("
            << dataset.treated_count() << " treated) to " << out << "\n";
  return 0;
}

int cmd_analyze(AnalyzeOptions& opt) {
  apply_analyze_options(opt);

  const auto t_load = Clock::now();
  const bootmatch::PanelDataset dataset =
      bootmatch::io::load_dataset(opt.input, opt.pre_periods);
  const double load_ms = elapsed_ms(t_load);

  const auto t_run = Clock::now();
  bootmatch::engine::AggregateResult aggregate =
      bootmatch::engine::run(dataset, opt.config);
  const double run_ms = elapsed_ms(t_run);

  const bootmatch::io::RunReport report = bootmatch::io::make_report(
      std::move(aggregate), {{"load_ms", load_ms}, {"run_ms", run_ms}});
  bootmatch::io::write_report_file(report, opt.output);

  std::cout << "effect=" << report.aggregate.effect
            << " effect_sd=" << report.aggregate.effect_sd
            << " final_p=" << report.aggregate.final_p
            << " failed=" << report.aggregate.failed_count << "/"
            << report.aggregate.config_echo.replicates << "\n"
            << "report written to " << opt.output << "\n";
  return 0;
}

int cmd_figdata(const std::string& input, std::size_t pre_periods,
                const std::string& report_path, const std::string& fig1,
                const std::string& fig2) {
  const bootmatch::PanelDataset dataset = bootmatch::io::load_dataset(input, pre_periods);
  if (!fig1.empty()) {
    std::ofstream out(fig1);
    if (!out) {
      throw bootmatch::Error(bootmatch::ErrorCode::ParseError,
                             "cannot open '" + fig1 + "' for writing");
    }
    bootmatch::io::write_fig1_csv(bootmatch::io::emit_fig1_data(dataset), out);
    std::cout << "wrote " << fig1 << "\n";
  }
  if (!fig2.empty()) {
    const bootmatch::io::RunReport report = bootmatch::io::parse_report_file(report_path);
    std::ofstream out(fig2);
    if (!out) {
      throw bootmatch::Error(bootmatch::ErrorCode::ParseError,
                             "cannot open '" + fig2 + "' for writing");
    }
    bootmatch::io::write_fig2_csv(
        bootmatch::io::emit_fig2_data(report.aggregate, dataset), out);
    std::cout << "wrote " << fig2 << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subsampled matching analysis for A/B tests with broken randomization"};
  app.require_subcommand(1);

  bootmatch::simgen::SimulationConfig sim_config;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic digit-tail dataset");
  sim->add_option("--subjects", sim_config.n_subjects, "Number of subjects");
  sim->add_option("--features", sim_config.k, "Feature columns");
  sim->add_option("--tau", sim_config.tau, "True treatment effect");
  sim->add_option("--confounder-shift", sim_config.confounder_shift,
                  "Confounder mean shift for treated subjects");
  sim->add_option("--confounder-gamma", sim_config.confounder_to_outcome,
                  "Confounder weight in the response");
  sim->add_option("--feature-noise", sim_config.feature_noise_sd, "Feature noise sd");
  sim->add_option("--response-noise", sim_config.response_noise_sd, "Response noise sd");
  sim->add_option("--pre-periods", sim_config.pre_periods, "Pre-treatment periods");
  sim->add_option("--periods", sim_config.total_periods, "Total periods");
  sim->add_option("--seed", sim_config.seed, "RNG seed");
  sim->add_option("--out", sim_out, "Output CSV path")->required();

  AnalyzeOptions an;
  auto* analyze = app.add_subcommand("analyze", "Run the subsampled matching analysis");
  analyze->add_option("--input", an.input, "Input dataset CSV")->required();
  analyze->add_option("--pre-periods", an.pre_periods, "Pre-treatment periods in the data")
      ->required();
  analyze->add_option("--replicates", an.config.replicates, "Bootstrap replicates N");
  analyze->add_option("--ratio", an.config.ratio, "Subsample fraction q");
  analyze->add_flag("--with-replacement", an.config.with_replacement,
                    "Sample subjects with replacement");
  analyze->add_option("--seed", an.config.master_seed, "Master seed");
  analyze->add_option("--threads", an.config.workers,
                      "Worker threads (0 = auto; BOOTMATCH_THREADS as fallback)");
  analyze->add_option("--min-success", an.config.min_success_fraction,
                      "Minimum fraction of replicates that must succeed");
  analyze->add_option("--estimator", an.estimator, "Effect estimator: did or post_only");
  analyze->add_option("--caliper", an.caliper,
                      "Matching caliper: 'auto' (0.2 sd of logits), 'none', or a logit width");
  analyze->add_option("--storey-lambda", an.config.storey_lambda, "Storey lambda");
  analyze->add_flag("--no-features", an.no_features, "Exclude features from the score model");
  analyze->add_flag("--no-pre-responses", an.no_pre_responses,
                    "Exclude pre-period responses from the score model");
  analyze->add_flag("--no-standardize", an.no_standardize,
                    "Skip covariate standardization");
  analyze->add_option("--out", an.output, "Report JSON path")->required();

  std::string fig_input;
  std::string fig_report;
  std::string fig1_out;
  std::string fig2_out;
  std::size_t fig_pre_periods = 0;
  auto* figdata = app.add_subcommand("figdata", "Emit figure data tables as CSV");
  figdata->add_option("--input", fig_input, "Input dataset CSV")->required();
  figdata->add_option("--pre-periods", fig_pre_periods, "Pre-treatment periods")->required();
  figdata->add_option("--report", fig_report, "Report JSON (required for --fig2)");
  figdata->add_option("--fig1", fig1_out, "Per-day group means output CSV");
  figdata->add_option("--fig2", fig2_out, "Per-replicate pre-period differences output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_config, sim_out);
    if (analyze->parsed()) return cmd_analyze(an);
    if (figdata->parsed()) {
      if (!fig2_out.empty() && fig_report.empty()) {
        std::cerr << "error: --fig2 requires --report\n";
        return 1;
      }
      if (fig1_out.empty() && fig2_out.empty()) {
        std::cerr << "error: nothing to do; pass --fig1 and/or --fig2\n";
        return 1;
      }
      return cmd_figdata(fig_input, fig_pre_periods, fig_report, fig1_out, fig2_out);
    }
  } catch (const bootmatch::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == bootmatch::ErrorCode::TooManyFailures ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
