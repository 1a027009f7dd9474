// crossdiff: nonlinear cross-diffusion filtering of greymaps.
//
//   crossdiff filter         --input in.pgm --preset ncdf1 --steps 50 --snapshots 1,2.5
//   crossdiff metrics        --reference clean.pgm --test restored.pgm
//   crossdiff experiment     --input clean.pgm --preset ncdf1,ncdf2,ncdf3 --noise-sigma 30
//   crossdiff properties     --input clean.pgm --preset ncdf1 --strategy smoothed:1
//   crossdiff gen-test-image --kind shapes --width 128 --height 128 --out shapes.pgm
//
// Options may also come from a key=value file given with --config; command
// line flags take precedence over the file, which overrides built-in defaults.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crossdiff/workflow.hpp"

namespace {

struct RawFlags {
  std::string preset = "ncdf1";
  std::string matrix;
  std::string snapshots;
  std::string config;  // consumed by expand_config; listed for --help
};

void add_run_options(CLI::App& app, crossdiff::RunManifest& m, RawFlags& raw) {
  app.add_option("--config", raw.config, "key=value configuration file (flags on the command line win)");
  app.add_option("--input", m.input, "input greymap (binary PGM)")->required();
  app.add_option("--preset", raw.preset, "ncdf1..ncdf6 or rotation:<theta>; comma list for experiment")
      ->capture_default_str();
  app.add_option("--matrix", raw.matrix, "explicit d11,d12,d21,d22 (overrides --preset)");
  app.add_option("--kappa", m.kappa, "edge-stopping threshold")->capture_default_str();
  app.add_option("--strategy", m.strategy, "raw | cutoff:<M> | smoothed:<sigma>")->capture_default_str();
  app.add_option("--dt", m.dt, "time step")->capture_default_str();
  app.add_option("--h", m.h, "mesh spacing")->capture_default_str();
  app.add_option("--steps", m.steps, "number of time steps")->capture_default_str();
  app.add_option("--snapshots", raw.snapshots, "snapshot times t1,t2,...");
  app.add_option("--noise-sigma", m.noise_sigma, "standard deviation of added Gaussian noise")
      ->capture_default_str();
  app.add_option("--seed", m.seed, "noise seed")->capture_default_str();
  app.add_option("--boundary", m.boundary, "reflect | periodic")->capture_default_str();
  app.add_option("--scheme", m.scheme, "fluxform | central")->capture_default_str();
  app.add_flag("--clip-input", m.clip_input, "clip the (noisy) input to [0, 255]");
  app.add_option("--out-prefix", m.out_prefix, "prefix for output files")->capture_default_str();
  app.add_option("--u-rescale", m.u_rescale, "none | minmax for u snapshots")->capture_default_str();
  app.add_option("--property-steps", m.property_steps, "steps per property check")->capture_default_str();
}

void finish_manifest(crossdiff::RunManifest& m, const RawFlags& raw) {
  m.presets = crossdiff::detail::split(raw.preset, ',');
  if (!raw.matrix.empty()) m.matrix = crossdiff::parse_matrix(raw.matrix);
  m.snapshots = crossdiff::parse_times(raw.snapshots);
}

// CLI11 reads config files for the top-level app only, so the file is expanded
// into "--key value" arguments placed right after the subcommand. Options take
// their last value, which lets the real command line override the file.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end() || it + 1 == args.end() || it == args.begin()) return args;
  const std::string path = *(it + 1);
  args.erase(it, it + 2);
  std::ifstream is(path);
  if (!is) throw CLI::FileError::Missing(path);
  std::vector<std::string> injected;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(is)) {
    const std::string key = "--" + item.name;
    const std::string value = item.inputs.empty() ? "" : item.inputs.front();
    if (value == "true") {
      injected.push_back(key);
    } else if (value != "false") {
      injected.push_back(key);
      injected.push_back(value);
    }
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear cross-diffusion image filtering"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  // "-h" would clash with the mesh-spacing flag --h.
  app.set_help_flag("--help", "print this help message and exit");

  crossdiff::RunManifest manifest;
  RawFlags raw;

  auto* filter = app.add_subcommand("filter", "filter an image (u0 = image, v0 = 0)");
  add_run_options(*filter, manifest, raw);

  auto* experiment = app.add_subcommand("experiment", "noise, filter and score one or more presets");
  add_run_options(*experiment, manifest, raw);
  experiment->add_flag("--properties", manifest.properties, "also run the scale-space property suite");

  auto* properties = app.add_subcommand("properties", "run the scale-space property suite");
  add_run_options(*properties, manifest, raw);
  properties->add_option("--decay-steps", manifest.decay_steps, "also run the decay check (0 = skip)");

  std::string reference, test, metrics_prefix;
  auto* metrics = app.add_subcommand("metrics", "SNR, PSNR, RMSE and NPB of a test image");
  metrics->add_option("--reference", reference, "clean reference greymap")->required();
  metrics->add_option("--test", test, "greymap to score")->required();
  metrics->add_option("--out-prefix", metrics_prefix, "also write <prefix>_metrics.csv");

  std::string kind = "shapes", out_path;
  int width = 128, height = 128;
  auto* gen = app.add_subcommand("gen-test-image", "write a synthetic test greymap");
  gen->add_option("--kind", kind, "shapes | disk | step | checkerboard | ramp")->capture_default_str();
  gen->add_option("--width", width)->capture_default_str();
  gen->add_option("--height", height)->capture_default_str();
  gen->add_option("--out", out_path, "output path")->required();

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back
    app.parse(args);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return crossdiff::exit_code::io;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : crossdiff::exit_code::usage;
  }

  try {
    if (*metrics) return crossdiff::cmd_metrics(reference, test, metrics_prefix);
    if (*gen) return crossdiff::cmd_gen_test_image(kind, width, height, out_path);
    finish_manifest(manifest, raw);
  } catch (const crossdiff::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return crossdiff::exit_code::usage;
  }
  if (*filter) return crossdiff::cmd_filter(manifest);
  if (*experiment) return crossdiff::cmd_experiment(manifest);
  return crossdiff::cmd_properties(manifest);
}
