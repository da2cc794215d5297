#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rotsym/check.hpp"
#include "rotsym/fit.hpp"
#include "rotsym/metrics.hpp"
#include "rotsym/parallel.hpp"
#include "rotsym/projection.hpp"
#include "rotsym/scene_io.hpp"
#include "rotsym/synth.hpp"

namespace {

using namespace rotsym;

struct SynthArgs {
  std::string config_path;
  std::string out_prefix;
  std::string noise_override;
  int workers = default_worker_count();
  bool strict = false;
};

int run_synth(const SynthArgs& args) {
  SynthJob job = read_synth_config(args.config_path, {args.strict});
  if (args.noise_override == "zero") {
    job.noise = NoiseSpec{};
  } else if (args.noise_override == "none") {
    job.noise.reset();
  } else if (!args.noise_override.empty()) {
    SynthJob other = read_synth_config(args.noise_override, {args.strict});
    if (!other.noise) {
      throw ConfigError("--noise file '" + args.noise_override + "' has no noise block");
    }
    job.noise = other.noise;
  }

  const std::vector<SampledScene> sampled = sample_scenes(job.synth, args.workers);
  std::vector<Scene> gt;
  gt.reserve(sampled.size());
  for (const SampledScene& s : sampled) gt.push_back(s.ground_truth);

  const std::string gt_path = args.out_prefix + ".gt.json";
  write_scene_file(gt_path, gt);
  std::cout << "wrote " << gt_path << " (" << gt.size() << " scenes)\n";

  if (job.noise) {
    const std::vector<Scene> pred =
        perturb_scenes(sampled, *job.noise, job.synth.seed, args.workers);
    const std::string pred_path = args.out_prefix + ".pred.json";
    write_scene_file(pred_path, pred);
    std::cout << "wrote " << pred_path << "\n";
  }
  return 0;
}

struct EvalArgs {
  std::string gt_path;
  std::string pred_path;
  std::string report_path;
  double tau = 0.025;
  int dilate = 5;
  int thresholds = 100;
  bool with_f1 = false;
  bool square_dilation = false;
  int workers = default_worker_count();
  bool strict = false;
};

int run_eval(const EvalArgs& args) {
  const std::vector<Scene> gt = read_scene_file(args.gt_path, {args.strict});
  const std::vector<Scene> pred = read_scene_file(args.pred_path, {args.strict});

  EvalConfig cfg;
  cfg.tau = args.tau;
  cfg.dilation_px = args.dilate;
  cfg.n_thresholds = args.thresholds;
  cfg.square_dilation = args.square_dilation;
  cfg.with_f1 = args.with_f1;
  cfg.workers = args.workers;

  const EvalReport report = evaluate(gt, pred, cfg);
  std::cout << report_to_text(report);
  if (!args.report_path.empty()) {
    write_text_file(args.report_path, report_to_json(report));
  }
  return 0;
}

struct FitArgs {
  std::string in_path;
  std::string group_filter;
  std::string report_path;
  std::string out_path;
  bool strict = false;
};

int run_fit(const FitArgs& args) {
  const std::vector<Scene> scenes = read_scene_file(args.in_path, {args.strict});
  std::optional<RotationGroup> filter;
  if (!args.group_filter.empty()) filter = parse_group(args.group_filter);

  std::vector<Scene> refitted = scenes;
  std::string report = "{\n  \"fits\": [";
  char line[256];
  int attempted = 0;
  int failed = 0;
  bool first = true;

  for (std::size_t si = 0; si < scenes.size(); ++si) {
    const Scene& scene = scenes[si];
    const CameraIntrinsics K = scene.intrinsics_or_default();
    for (std::size_t pi = 0; pi < scene.polygons.size(); ++pi) {
      const Polygon2D& poly = scene.polygons[pi];
      if (poly.vertices.empty()) continue;  // SO2 carries nothing to fit
      if (filter && poly.group != *filter) continue;

      ++attempted;
      std::string entry;
      try {
        const FitReport fit = fit_polygon(poly, poly.group, K, poly.params3d);
        if (!fit.converged) ++failed;
        Polygon2D reprojected = project_polygon(fit.params, K);
        reprojected.scores = poly.scores;
        refitted[si].polygons[pi] = reprojected;
        std::snprintf(line, sizeof(line),
                      "\n    {\"scene\": \"%s\", \"polygon\": %zu, \"group\": \"%s\", "
                      "\"converged\": %s, \"iterations\": %d, \"rms_px\": %s, \"l1_px\": %s}",
                      scene.id.c_str(), pi, std::string(group_name(poly.group)).c_str(),
                      fit.converged ? "true" : "false", fit.iterations,
                      format_double(fit.rms_reprojection).c_str(),
                      format_double(fit.l1_reprojection).c_str());
        entry = line;
      } catch (const Error& e) {
        ++failed;
        std::snprintf(line, sizeof(line),
                      "\n    {\"scene\": \"%s\", \"polygon\": %zu, \"group\": \"%s\", "
                      "\"error\": \"%s\"}",
                      scene.id.c_str(), pi, std::string(group_name(poly.group)).c_str(),
                      e.what());
        entry = line;
      }
      if (!first) report += ",";
      first = false;
      report += entry;
    }
  }
  report += first ? "]" : "\n  ]";
  std::snprintf(line, sizeof(line), ",\n  \"attempted\": %d,\n  \"failed\": %d\n}\n", attempted,
                failed);
  report += line;

  std::cout << "fitted " << (attempted - failed) << "/" << attempted << " polygons\n";
  if (!args.report_path.empty()) write_text_file(args.report_path, report);
  if (!args.out_path.empty()) write_scene_file(args.out_path, refitted);
  return (attempted > 0 && failed == attempted) ? 1 : 0;
}

struct GridArgs {
  int nx = 50;
  int ny = 50;
  std::vector<double> x_range = {-1.0, 1.0};
  std::vector<double> y_range = {-1.0, 1.0};
  std::vector<double> depths = {0.5, 1.5, 2.5, 3.5};
  int width = 1280;
  int height = 720;
  double f = 1000.0;
  std::optional<double> cx;
  std::optional<double> cy;
  std::string out_path;
};

int run_grid(const GridArgs& args) {
  CameraGridSpec grid;
  grid.nx = args.nx;
  grid.ny = args.ny;
  grid.x_min = args.x_range[0];
  grid.x_max = args.x_range[1];
  grid.y_min = args.y_range[0];
  grid.y_max = args.y_range[1];
  grid.depths = args.depths;

  CameraIntrinsics K;
  K.f = args.f;
  K.cx = args.cx ? *args.cx : args.width / 2.0;
  K.cy = args.cy ? *args.cy : args.height / 2.0;

  const ReferenceSamples samples = cca_reference_points(grid, K, args.width, args.height);
  std::string out = "i\tj\tdepth\tu\tv\tin_bounds\n";
  for (int i = 0; i < samples.nx; ++i) {
    for (int j = 0; j < samples.ny; ++j) {
      for (int d = 0; d < samples.n_depths; ++d) {
        const ReferenceSample& s = samples.at(i, j, d);
        out += std::to_string(i) + '\t' + std::to_string(j) + '\t' +
               format_double(grid.depths[d]) + '\t' + format_double(s.point.u) + '\t' +
               format_double(s.point.v) + '\t' + (s.in_bounds ? "1" : "0") + '\n';
      }
    }
  }
  if (args.out_path.empty()) {
    std::cout << out;
  } else {
    write_text_file(args.out_path, out);
  }
  return 0;
}

struct CheckArgs {
  int n = 500;
  std::uint64_t seed = 20250809;
  bool inject_fault = false;
};

int run_check(const CheckArgs& args) {
  CheckOptions opt;
  opt.n = args.n;
  opt.seed = args.seed;
  opt.inject_jacobian_fault = args.inject_fault;
  const CheckSummary summary = run_self_checks(opt);
  std::cout << summarize_checks(summary);
  return summary.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D rotation-symmetry toolkit: synthetic scenes, matching, metrics, fitting"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate deterministic synthetic scene files");
  synth->add_option("--config", synth_args.config_path, "synth config (JSON)")->required();
  synth->add_option("--out", synth_args.out_prefix,
                    "output prefix; writes <prefix>.gt.json and <prefix>.pred.json")
      ->required();
  synth->add_option("--noise", synth_args.noise_override,
                    "'zero' = exact copies, 'none' = no prediction file, or a config path "
                    "whose noise block is used instead");
  synth->add_option("--workers", synth_args.workers, "worker threads");
  synth->add_flag("--strict", synth_args.strict, "reject unknown config fields");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "evaluate predictions against ground truth");
  eval->add_option("--gt", eval_args.gt_path, "ground-truth scene file")->required();
  eval->add_option("--pred", eval_args.pred_path, "prediction scene file")->required();
  eval->add_option("--tau", eval_args.tau, "distance threshold factor (d < tau*max(w,h))");
  eval->add_option("--dilate", eval_args.dilate, "score-map dilation radius, px");
  eval->add_option("--thresholds", eval_args.thresholds, "binarization threshold count");
  eval->add_flag("--f1", eval_args.with_f1, "also render score maps and report max-F1");
  eval->add_flag("--square-dilate", eval_args.square_dilation,
                 "square structuring element instead of a disk");
  eval->add_option("--report", eval_args.report_path, "write the JSON report here");
  eval->add_option("--workers", eval_args.workers, "worker threads");
  eval->add_flag("--strict", eval_args.strict, "reject unknown scene fields");

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "recover 3D parameters from observed 2D polygons");
  fit->add_option("--in", fit_args.in_path, "scene file with polygons to fit")->required();
  fit->add_option("--group", fit_args.group_filter, "fit only this group (e.g. C4)");
  fit->add_option("--report", fit_args.report_path, "write per-polygon fit results here");
  fit->add_option("--out", fit_args.out_path, "write the re-projected scene file here");
  fit->add_flag("--strict", fit_args.strict, "reject unknown scene fields");

  GridArgs grid_args;
  CLI::App* grid = app.add_subcommand("grid", "dump projected camera-grid reference points");
  grid->add_option("--nx", grid_args.nx, "grid cells along x");
  grid->add_option("--ny", grid_args.ny, "grid cells along y");
  grid->add_option("--x-range", grid_args.x_range, "x range, meters")->expected(2);
  grid->add_option("--y-range", grid_args.y_range, "y range, meters")->expected(2);
  grid->add_option("--depths", grid_args.depths, "depth values, meters")->expected(-1);
  grid->add_option("--width", grid_args.width, "image width, px");
  grid->add_option("--height", grid_args.height, "image height, px");
  grid->add_option("--f", grid_args.f, "focal length, px");
  grid->add_option("--cx", grid_args.cx, "principal point x (default: image center)");
  grid->add_option("--cy", grid_args.cy, "principal point y (default: image center)");
  grid->add_option("--out", grid_args.out_path, "write the table here instead of stdout");

  CheckArgs check_args;
  CLI::App* check = app.add_subcommand("check", "randomized gradient and invariant self-test");
  check->add_option("--n", check_args.n, "number of random samples");
  check->add_option("--seed", check_args.seed, "RNG seed");
  check->add_flag("--inject-fault", check_args.inject_fault)->group("");  // test fixture

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (fit->parsed()) return run_fit(fit_args);
    if (grid->parsed()) return run_grid(grid_args);
    if (check->parsed()) return run_check(check_args);
  } catch (const IdMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
