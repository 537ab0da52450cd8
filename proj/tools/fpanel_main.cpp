// Command-line front end: panel testing plus the simulation and Monte
// Carlo study commands. All heavy lifting lives in the core library; this
// file only maps flags and config files onto core calls and writes the
// requested output files.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpanel/config.hpp"
#include "fpanel/errors.hpp"
#include "fpanel/mcstudy.hpp"
#include "fpanel/panel_io.hpp"
#include "fpanel/portmanteau.hpp"
#include "fpanel/report_io.hpp"
#include "fpanel/simulate.hpp"

namespace {

using nlohmann::ordered_json;

// Everything a subcommand might need, collected from defaults, then the
// --config file, then explicit flags (later wins). The seed additionally
// honors the FPANEL_SEED environment variable above all flags.
struct CliOptions {
  fpanel::RunConfig run;
  std::string input;
  std::string output;
  std::string config_path;
  std::optional<double> rho;
  std::vector<int> h_list;
  int components = 12;
  bool components_set = false;
  int clt_dim = 10;
  int clt_length = 2000;
  std::optional<int> replicate_override;
  std::optional<ordered_json> inline_generator;
  std::string generator_path;
};

ordered_json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw fpanel::Error("cannot open " + path);
  }
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw fpanel::StructuralError("config " + path + ": " + e.what());
  }
}

template <typename T>
void take(const ordered_json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

// Config file keys mirror the long flag names with underscores.
void apply_config_file(CliOptions& opt) {
  if (opt.config_path.empty()) return;
  const ordered_json j = load_json_file(opt.config_path);
  if (!j.is_object()) {
    throw fpanel::StructuralError("config " + opt.config_path +
                                  ": top level must be an object");
  }
  take(j, "variance_threshold", opt.run.variance_threshold);
  take(j, "pooled_threshold", opt.run.pooled_threshold);
  take(j, "strict_cutoff", opt.run.strict_cutoff);
  take(j, "h_max", opt.run.h_max);
  take(j, "alpha", opt.run.alpha);
  take(j, "detrend", opt.run.detrend);
  take(j, "seed", opt.run.seed);
  take(j, "replications", opt.run.replications);
  if (j.contains("rho")) opt.rho = j.at("rho").get<double>();
  take(j, "h_list", opt.h_list);
  if (j.contains("components")) {
    opt.components = j.at("components").get<int>();
    opt.components_set = true;
  }
  take(j, "dim", opt.clt_dim);
  take(j, "series_length", opt.clt_length);
  if (j.contains("replicates")) {
    opt.replicate_override = j.at("replicates").get<int>();
  }
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    if (g.is_string()) {
      opt.generator_path = g.get<std::string>();
    } else if (g.is_object()) {
      opt.inline_generator = g;
    } else {
      throw fpanel::StructuralError(
          "config: generator must be an object or a path string");
    }
  }
}

void apply_env_seed(fpanel::RunConfig& run) {
  const char* env = std::getenv("FPANEL_SEED");
  if (env == nullptr || *env == '\0') return;
  std::uint64_t seed = 0;
  const std::string text(env);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw fpanel::Error("FPANEL_SEED is not an unsigned integer: \"" + text + "\"");
  }
  run.seed = seed;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw fpanel::Error("cannot open " + path + " for writing");
  }
  out << text;
  if (!out) {
    throw fpanel::Error("failed writing " + path);
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Resolve the generator for simulate/size/power: an explicit recipe (from
// the config file, inline or by path) wins; otherwise one is estimated
// from the --input panel.
fpanel::GeneratorConfig resolve_generator(const CliOptions& opt) {
  fpanel::GeneratorConfig gc = [&] {
    if (opt.inline_generator) {
      return fpanel::generator_from_json(opt.inline_generator->dump());
    }
    if (!opt.generator_path.empty()) {
      return fpanel::load_generator(opt.generator_path);
    }
    if (!opt.input.empty()) {
      const fpanel::FunctionalPanel panel = fpanel::load_panel_csv(opt.input);
      int k = opt.components;
      if (!opt.components_set) {
        // Default component count, capped by what the panel can supply.
        const int available =
            std::min(panel.replicate_count(), panel.grid_size());
        k = std::min(k, available);
      }
      return fpanel::GeneratorConfig{fpanel::estimate_generator(panel, k),
                                     std::nullopt};
    }
    throw fpanel::Error(
        "no generator: pass --input PANEL.csv or a config with a "
        "\"generator\" entry");
  }();
  if (opt.replicate_override) {
    gc.generator = gc.generator.with_replicates(*opt.replicate_override);
  }
  return gc;
}

std::vector<int> resolve_h_list(const CliOptions& opt) {
  if (!opt.h_list.empty()) return opt.h_list;
  std::vector<int> hs;
  for (int h = 1; h <= opt.run.h_max; ++h) hs.push_back(h);
  return hs;
}

int cmd_test(const CliOptions& opt) {
  if (opt.input.empty()) {
    throw fpanel::Error("test needs --input PANEL.csv");
  }
  const fpanel::FunctionalPanel panel = fpanel::load_panel_csv(opt.input);
  const fpanel::TestReport report = fpanel::run_test(panel, opt.run);
  std::cout << fpanel::render_test_report(report);
  if (!opt.output.empty()) {
    write_text_file(opt.output, fpanel::test_report_json(report));
  }
  return 0;
}

int cmd_simulate(const CliOptions& opt) {
  if (opt.output.empty()) {
    throw fpanel::Error("simulate needs --output PANEL.csv");
  }
  const fpanel::GeneratorConfig gc = resolve_generator(opt);
  const double rho = opt.rho.value_or(gc.rho.value_or(0.0));
  const fpanel::FunctionalPanel panel =
      (rho == 0.0) ? fpanel::generate_h0_panel(gc.generator, opt.run.seed)
                   : fpanel::generate_ar_panel(gc.generator, rho, opt.run.seed);
  fpanel::save_panel_csv(panel, opt.output);
  std::cout << "wrote " << panel.series_count() << " series x "
            << panel.replicate_count() << " replicates to " << opt.output
            << "\n";
  return 0;
}

int cmd_study(const CliOptions& opt, bool power) {
  const fpanel::GeneratorConfig gc = resolve_generator(opt);
  const std::vector<int> hs = resolve_h_list(opt);
  fpanel::StudyResult result;
  if (power) {
    const std::optional<double> rho = opt.rho ? opt.rho : gc.rho;
    if (!rho) {
      throw fpanel::Error("power needs --rho (or a generator carrying one)");
    }
    result = fpanel::run_power_study(gc.generator, *rho, hs, opt.run);
  } else {
    result = fpanel::run_size_study(gc.generator, hs, opt.run);
  }
  std::cout << fpanel::render_study_result(result);
  if (!opt.output.empty()) {
    if (ends_with(opt.output, ".json")) {
      write_text_file(opt.output, fpanel::study_result_json(result));
    } else {
      write_text_file(opt.output, fpanel::study_result_csv(result));
    }
  }
  return 0;
}

int cmd_clt(const CliOptions& opt) {
  const fpanel::CltSummary summary =
      fpanel::clt_check(opt.clt_dim, opt.clt_length, opt.run.h_max,
                        opt.run.replications, opt.run.seed);
  std::cout << fpanel::render_clt_summary(summary);
  if (!opt.output.empty()) {
    write_text_file(opt.output,
                    fpanel::clt_summary_json(summary, opt.clt_dim, opt.clt_length,
                                             opt.run.h_max, opt.run.seed));
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial-dependence portmanteau test for panels of curves"};
  app.require_subcommand(1);

  CliOptions opt;
  // Flag values land in these shadows; only flags the user actually set
  // override the config file.
  fpanel::RunConfig flag_run;
  double flag_rho = 0.0;
  std::vector<int> flag_h_list;
  int flag_components = 12;
  int flag_dim = 10, flag_length = 2000;
  int flag_replicates = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON config file");
    sub->add_option("--seed", flag_run.seed,
                    "base random seed (FPANEL_SEED env overrides)");
    sub->add_option("--output", opt.output, "output file path");
  };
  auto add_test_knobs = [&](CLI::App* sub) {
    sub->add_option("--h-max", flag_run.h_max, "largest lag horizon H");
    sub->add_option("--alpha", flag_run.alpha, "significance level");
    sub->add_option("--variance-threshold", flag_run.variance_threshold,
                    "per-series explained-variance cutoff");
    sub->add_option("--pooled-threshold", flag_run.pooled_threshold,
                    "pooled-covariance inversion cutoff");
    sub->add_flag("--strict-cutoff", flag_run.strict_cutoff,
                  "require the cumulative share to exceed the threshold");
    sub->add_flag("--detrend", flag_run.detrend,
                  "remove a linear trend in the replicate index");
  };

  CLI::App* test = app.add_subcommand("test", "run the test on a panel CSV");
  test->add_option("--input", opt.input, "panel CSV file")->required();
  add_common(test);
  add_test_knobs(test);

  CLI::App* simulate =
      app.add_subcommand("simulate", "draw one panel from a generator");
  simulate->add_option("--input", opt.input,
                       "panel CSV to estimate a generator from");
  simulate->add_option("--rho", flag_rho, "AR coefficient for the scores");
  simulate->add_option("--components", flag_components,
                       "score components when estimating (default 12, capped "
                       "by the data unless set explicitly)");
  simulate->add_option("--replications", flag_replicates,
                       "override the generated panel's replicate count");
  add_common(simulate);

  CLI::App* size = app.add_subcommand("size", "rejection frequency under the null");
  CLI::App* power = app.add_subcommand("power", "rejection frequency under AR scores");
  for (CLI::App* sub : {size, power}) {
    sub->add_option("--input", opt.input,
                    "panel CSV to estimate a generator from");
    sub->add_option("--replications", flag_run.replications,
                    "Monte Carlo trial count");
    sub->add_option("--h-list", flag_h_list, "lag horizons to tabulate")
        ->delimiter(',');
    sub->add_option("--components", flag_components,
                    "score components when estimating a generator");
    add_common(sub);
    add_test_knobs(sub);
  }
  power->add_option("--rho", flag_rho, "AR coefficient for the scores");

  CLI::App* clt = app.add_subcommand("clt", "normal-limit calibration check");
  clt->add_option("--dim", flag_dim, "score dimension");
  clt->add_option("--length", flag_length, "series length per trial");
  clt->add_option("--h-max", flag_run.h_max, "largest lag horizon H");
  clt->add_option("--replications", flag_run.replications,
                  "Monte Carlo trial count");
  add_common(clt);

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();

  try {
    apply_config_file(opt);

    // Flags beat the config file; check count() so unset flags keep the
    // config/default value.
    auto picked = [&](const char* name) {
      return sub->count(name) > 0;
    };
    if (picked("--seed")) opt.run.seed = flag_run.seed;
    if (sub->get_option_no_throw("--h-max") && picked("--h-max"))
      opt.run.h_max = flag_run.h_max;
    if (sub->get_option_no_throw("--alpha") && picked("--alpha"))
      opt.run.alpha = flag_run.alpha;
    if (sub->get_option_no_throw("--variance-threshold") &&
        picked("--variance-threshold"))
      opt.run.variance_threshold = flag_run.variance_threshold;
    if (sub->get_option_no_throw("--pooled-threshold") &&
        picked("--pooled-threshold"))
      opt.run.pooled_threshold = flag_run.pooled_threshold;
    if (sub->get_option_no_throw("--strict-cutoff") && picked("--strict-cutoff"))
      opt.run.strict_cutoff = flag_run.strict_cutoff;
    if (sub->get_option_no_throw("--detrend") && picked("--detrend"))
      opt.run.detrend = flag_run.detrend;
    if (sub->get_option_no_throw("--replications") && picked("--replications")) {
      if (sub == simulate) {
        opt.replicate_override = flag_replicates;
      } else {
        opt.run.replications = flag_run.replications;
      }
    }
    if (sub->get_option_no_throw("--rho") && picked("--rho")) opt.rho = flag_rho;
    if (sub->get_option_no_throw("--h-list") && picked("--h-list"))
      opt.h_list = flag_h_list;
    if (sub->get_option_no_throw("--components") && picked("--components")) {
      opt.components = flag_components;
      opt.components_set = true;
    }
    if (sub->get_option_no_throw("--dim") && picked("--dim"))
      opt.clt_dim = flag_dim;
    if (sub->get_option_no_throw("--length") && picked("--length"))
      opt.clt_length = flag_length;

    apply_env_seed(opt.run);

    if (sub == test) return cmd_test(opt);
    if (sub == simulate) return cmd_simulate(opt);
    if (sub == size) return cmd_study(opt, false);
    if (sub == power) return cmd_study(opt, true);
    return cmd_clt(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
