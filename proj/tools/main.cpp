// Command-line driver: dataset generation, training, sampling, evaluation,
// parameter sweeps and plot emission. All run parameters come from an
// INI-style config file plus --set overrides; outputs land in --out.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include <betacfg/checkpoint.hpp>
#include <betacfg/config.hpp>
#include <betacfg/guidance.hpp>
#include <betacfg/io.hpp>
#include <betacfg/metrics.hpp>
#include <betacfg/models.hpp>
#include <betacfg/sampler.hpp>
#include <betacfg/svg.hpp>
#include <betacfg/toydata.hpp>

namespace fs = std::filesystem;
using namespace betacfg;

namespace {

struct Session {
  RunConfig cfg;
  std::uint64_t seed = 0;
  fs::path out;

  fs::path resolve(const std::string& key, const std::string& fallback) const {
    const std::string v = cfg.get_string(key, (out / fallback).string());
    return fs::path(v);
  }

  fs::path require_input(const std::string& key,
                         const std::string& fallback) const {
    const fs::path p = resolve(key, fallback);
    if (!fs::exists(p))
      throw ConfigError("input file '" + p.string() + "' (config key " + key +
                        ") does not exist");
    return p;
  }
};

NoiseSchedule schedule_from_config(const RunConfig& cfg) {
  return linear_schedule(cfg.get_int("train.T", 1000),
                         cfg.get_double("train.beta_start", 1e-4),
                         cfg.get_double("train.beta_end", 0.02));
}

ToySpec toy_spec_from_config(const RunConfig& cfg, std::uint64_t seed) {
  ToySpec spec = default_toy_spec();
  spec.n_per_class = cfg.get_int("data.n_per_class", 5000);
  spec.sigma_across = cfg.get_double("data.sigma_across", 0.02);
  spec.seed = seed;
  return spec;
}

GuidanceRule rule_from_config(const RunConfig& cfg) {
  const std::string name = cfg.get_string("sample.rule", "none");
  GuidanceRule rule;
  if (name == "none") {
    rule = NoGuidance{};
  } else if (name == "classifier") {
    rule = ClassifierGuidanceRule{cfg.get_double("sample.w", 1.0)};
  } else if (name == "geoguide") {
    rule = GeoGuideRule{cfg.get_double("sample.w", 1.0)};
  } else if (name == "cfg") {
    rule = CfgRule{cfg.get_double("sample.w", 7.5)};
  } else if (name == "cfgpp") {
    rule = CfgPlusPlusRule{cfg.get_double("sample.lambda", 0.6)};
  } else if (name == "beta-cfg") {
    rule = BetaCfgRule{cfg.get_double("sample.omega", 7.5),
                       make_beta_weight(cfg.get_double("sample.a", 2.0),
                                        cfg.get_double("sample.b", 2.0)),
                       cfg.get_double("sample.gamma", 1.0)};
  } else if (name == "beta-cfgpp") {
    rule = BetaCfgPlusPlusRule{cfg.get_double("sample.lambda", 0.6),
                               make_beta_weight(cfg.get_double("sample.a", 2.0),
                                                cfg.get_double("sample.b", 2.0)),
                               cfg.get_double("sample.gamma", 1.0)};
  } else {
    throw ConfigError("unknown guidance rule '" + name + "'");
  }
  validate(rule);
  return rule;
}

void cmd_gen_data(const Session& s) {
  const ToySpec spec = toy_spec_from_config(s.cfg, s.seed);
  const LabeledSet set = generate(spec);
  const fs::path path = s.out / "dataset.csv";
  write_dataset_csv(path.string(), set);
  write_manifest((s.out / "manifest_gen-data.txt").string(), "gen-data", {},
                 {path.string()}, s.seed);
  std::cout << "wrote " << path.string() << " (" << set.points.cols()
            << " points)\n";
}

void cmd_train(const Session& s) {
  const fs::path data_path = s.require_input("train.dataset", "dataset.csv");
  const LabeledSet data = read_dataset_csv(data_path.string());
  const NoiseSchedule sched = schedule_from_config(s.cfg);

  DenoiserConfig dcfg;
  dcfg.hidden = s.cfg.get_int("train.hidden", 128);
  dcfg.hidden_layers = s.cfg.get_int("train.hidden_layers", 3);
  dcfg.embed_dim = s.cfg.get_int("train.embed_dim", 4);
  dcfg.n_time_freqs = s.cfg.get_int("train.time_freqs", 8);
  dcfg.steps = s.cfg.get_long("train.steps", 10000);
  dcfg.batch = s.cfg.get_int("train.batch", 128);
  dcfg.lr = s.cfg.get_double("train.lr", 1e-3);
  dcfg.p_uncond = s.cfg.get_double("train.p_uncond", 0.1);

  TrainStats stats;
  Checkpoint ckpt;
  ckpt.schedule_steps = sched.steps();
  ckpt.beta_start = s.cfg.get_double("train.beta_start", 1e-4);
  ckpt.beta_end = s.cfg.get_double("train.beta_end", 0.02);
  ckpt.denoiser = train_denoiser(data, sched, dcfg, s.seed, &stats);
  ckpt.p_uncond = dcfg.p_uncond;
  ckpt.seed = s.seed;
  ckpt.train_steps = dcfg.steps;
  ckpt.final_loss = stats.final_train_loss;
  ckpt.val_loss = stats.final_val_loss;

  if (s.cfg.get_bool("train.classifier", true)) {
    ClassifierConfig ccfg;
    ccfg.hidden = s.cfg.get_int("train.classifier_hidden", 64);
    ccfg.hidden_layers = s.cfg.get_int("train.classifier_hidden_layers", 2);
    ccfg.n_time_freqs = dcfg.n_time_freqs;
    ccfg.steps = s.cfg.get_long("train.classifier_steps", 4000);
    ccfg.batch = s.cfg.get_int("train.classifier_batch", 128);
    ccfg.lr = s.cfg.get_double("train.classifier_lr", 1e-3);
    ckpt.classifier = train_classifier(data, sched, ccfg, s.seed);
  }

  const fs::path ckpt_path = s.out / "checkpoint.txt";
  const fs::path curve_path = s.out / "loss_curve.csv";
  save_checkpoint(ckpt_path.string(), ckpt);
  write_loss_curve_csv(curve_path.string(), stats.curve);
  write_manifest((s.out / "manifest_train.txt").string(), "train",
                 {data_path.string()},
                 {ckpt_path.string(), curve_path.string()}, s.seed);
  std::cout << "trained denoiser: val loss " << stats.initial_val_loss
            << " -> " << stats.final_val_loss << "\nwrote "
            << ckpt_path.string() << "\n";
}

void cmd_sample(const Session& s) {
  const fs::path ckpt_path =
      s.require_input("sample.checkpoint", "checkpoint.txt");
  const Checkpoint ckpt = load_checkpoint(ckpt_path.string());
  const GuidanceRule rule = rule_from_config(s.cfg);

  SamplerConfig scfg;
  scfg.steps = s.cfg.get_int("sample.steps", 50);
  scfg.rule = rule;
  scfg.seed = s.seed;
  scfg.batch = s.cfg.get_int("sample.batch", 2000);
  const std::string mode = s.cfg.get_string("sample.mode", "ddim");
  if (mode == "ddim") scfg.mode = SamplerMode::Ddim;
  else if (mode == "ddpm") scfg.mode = SamplerMode::DdpmAncestral;
  else throw ConfigError("unknown sampler mode '" + mode + "'");
  const std::string variance = s.cfg.get_string("sample.variance", "posterior");
  if (variance == "posterior") scfg.variance = AncestralVariance::Posterior;
  else if (variance == "beta") scfg.variance = AncestralVariance::Beta;
  else throw ConfigError("unknown variance choice '" + variance + "'");
  const std::string renoise =
      s.cfg.get_string("sample.cfgpp_renoise", "uncond");
  if (renoise == "uncond") scfg.cfgpp_renoise = CfgppRenoise::Uncond;
  else if (renoise == "guided") scfg.cfgpp_renoise = CfgppRenoise::Guided;
  else throw ConfigError("unknown cfgpp_renoise choice '" + renoise + "'");

  const int cond_class = s.cfg.get_int("sample.class", 0);
  const NoisyClassifier* classifier =
      ckpt.classifier ? &*ckpt.classifier : nullptr;
  if (needs_classifier(rule) && !classifier)
    throw ConfigError("rule '" + describe(rule) +
                      "' needs a checkpoint with a classifier block");

  const SampleResult result = sample(scfg, ckpt.denoiser, cond_class,
                                     classifier);

  HeaderParams params{{"rule", describe(rule)},
                      {"seed", std::to_string(s.seed)},
                      {"steps", std::to_string(scfg.steps)},
                      {"batch", std::to_string(scfg.batch)},
                      {"mode", mode},
                      {"class", std::to_string(cond_class)},
                      {"checkpoint", ckpt_path.string()}};
  const fs::path samples_path = s.out / "samples.csv";
  const fs::path traj_path = s.out / "trajectory.csv";
  write_samples_csv(samples_path.string(), result.samples, params);
  write_trajectory_csv(traj_path.string(), result.trajectory, params);
  write_manifest((s.out / "manifest_sample.txt").string(), "sample",
                 {ckpt_path.string()},
                 {samples_path.string(), traj_path.string()}, s.seed);
  std::cout << "wrote " << samples_path.string() << " and "
            << traj_path.string() << "\n";
}

EvalReport evaluate_samples(const Matrix& samples, const LabeledSet& data,
                            const DiscretizedManifold& manifold,
                            const NoisyClassifier& classifier, int cls,
                            double r, const Matrix& reference,
                            const std::string& rule_desc,
                            std::uint64_t seed) {
  EvalReport rep;
  rep.outlier_rate = outlier_rate(samples, manifold, cls, r);
  rep.coverage = coverage(samples, reference, r);
  rep.mean_manifold_distance = mean_manifold_distance(samples, manifold, cls);
  rep.class_purity = class_purity(samples, classifier, cls);
  rep.n_samples = long(samples.cols());
  rep.rule = rule_desc;
  rep.seed = seed;
  return rep;
}

void print_report(const EvalReport& r) {
  std::cout << "rule=" << r.rule << " seed=" << r.seed
            << " n=" << r.n_samples << " outlier_rate=" << r.outlier_rate
            << " coverage=" << r.coverage
            << " mean_dist=" << r.mean_manifold_distance
            << " purity=" << r.class_purity << "\n";
}

void cmd_eval(const Session& s) {
  const fs::path data_path = s.require_input("eval.dataset", "dataset.csv");
  const fs::path samples_path = s.require_input("eval.samples", "samples.csv");
  const fs::path ckpt_path =
      s.require_input("eval.checkpoint", "checkpoint.txt");

  const LabeledSet data = read_dataset_csv(data_path.string());
  const Matrix samples = read_samples_csv(samples_path.string());
  const Checkpoint ckpt = load_checkpoint(ckpt_path.string());
  if (!ckpt.classifier)
    throw ConfigError("eval needs a checkpoint with a classifier block");

  const int cls = s.cfg.get_int("eval.class", 0);
  const DiscretizedManifold manifold(data.spec);
  const int calib_size = s.cfg.get_int("eval.calib_size", 10000);
  const double quantile = s.cfg.get_double("eval.calib_quantile", 0.99);
  const double r =
      s.cfg.has("eval.radius")
          ? s.cfg.get_double("eval.radius", 0.0)
          : calibrate_radius(data, manifold, cls, derive_seed(s.seed, 0xCA11B),
                             calib_size, quantile);
  const Matrix reference = draw_class_points(
      data, cls, s.cfg.get_int("eval.reference_size", 2000),
      derive_seed(s.seed, 0x2EF));

  std::string rule_desc = "unknown";
  std::uint64_t sample_seed = s.seed;
  for (const auto& [k, v] : read_header_params(samples_path.string())) {
    if (k == "rule") rule_desc = v;
    if (k == "seed") sample_seed = std::stoull(v);
  }

  const EvalReport rep =
      evaluate_samples(samples, data, manifold, *ckpt.classifier, cls, r,
                       reference, rule_desc, sample_seed);
  const fs::path results_path = s.resolve("eval.results", "results.log");
  append_eval_report(results_path.string(), rep);
  write_manifest((s.out / "manifest_eval.txt").string(), "eval",
                 {data_path.string(), samples_path.string(),
                  ckpt_path.string()},
                 {results_path.string()}, s.seed);
  std::cout << "radius=" << r << "\n";
  print_report(rep);
}

void cmd_sweep(const Session& s) {
  const fs::path data_path = s.require_input("sweep.dataset", "dataset.csv");
  const fs::path ckpt_path =
      s.require_input("sweep.checkpoint", "checkpoint.txt");
  const LabeledSet data = read_dataset_csv(data_path.string());
  const Checkpoint ckpt = load_checkpoint(ckpt_path.string());
  if (!ckpt.classifier)
    throw ConfigError("sweep needs a checkpoint with a classifier block");

  const std::string base_rule = s.cfg.get_string("sweep.rule", "beta-cfg");
  if (base_rule != "beta-cfg" && base_rule != "beta-cfgpp")
    throw ConfigError("sweep.rule must be beta-cfg or beta-cfgpp");
  const std::vector<double> a_grid = s.cfg.get_grid("sweep.a_grid", {2.0});
  const std::vector<double> b_grid = s.cfg.get_grid("sweep.b_grid", {2.0});
  const std::vector<double> g_grid = s.cfg.get_grid("sweep.gamma_grid", {1.0});
  const std::vector<double> s_grid =
      base_rule == "beta-cfg" ? s.cfg.get_grid("sweep.omega_grid", {7.5})
                              : s.cfg.get_grid("sweep.lambda_grid", {0.6});

  const int cls = s.cfg.get_int("sweep.class", 0);
  const int steps = s.cfg.get_int("sweep.steps", 50);
  const int batch = s.cfg.get_int("sweep.batch", 2000);
  const int workers =
      std::max(1, s.cfg.get_int("sweep.workers",
                                int(std::thread::hardware_concurrency())));

  const DiscretizedManifold manifold(data.spec);
  const double r = calibrate_radius(data, manifold, cls,
                                    derive_seed(s.seed, 0xCA11B));
  const Matrix reference =
      draw_class_points(data, cls, 2000, derive_seed(s.seed, 0x2EF));

  struct GridPoint {
    double a, b, gamma, scale;
    std::uint64_t seed;
    EvalReport report;
    std::string error;
  };
  std::vector<GridPoint> points;
  for (double a : a_grid)
    for (double b : b_grid)
      for (double g : g_grid)
        for (double sc : s_grid)
          points.push_back(
              {a, b, g, sc, derive_seed(s.seed, points.size()), {}, ""});

  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      GridPoint& p = points[i];
      try {
        GuidanceRule rule;
        if (base_rule == "beta-cfg")
          rule = BetaCfgRule{p.scale, make_beta_weight(p.a, p.b), p.gamma};
        else
          rule = BetaCfgPlusPlusRule{p.scale, make_beta_weight(p.a, p.b),
                                     p.gamma};
        validate(rule);
        SamplerConfig scfg;
        scfg.steps = steps;
        scfg.rule = rule;
        scfg.seed = p.seed;
        scfg.batch = batch;
        const SampleResult res = sample(scfg, ckpt.denoiser, cls,
                                        &*ckpt.classifier);
        p.report = evaluate_samples(res.samples, data, manifold,
                                    *ckpt.classifier, cls, r, reference,
                                    describe(rule), p.seed);
      } catch (const std::exception& e) {
        p.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();

  const fs::path results_path = s.resolve("eval.results", "results.log");
  for (const GridPoint& p : points)
    if (p.error.empty()) append_eval_report(results_path.string(), p.report);

  std::vector<size_t> order(points.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    const bool oki = points[i].error.empty(), okj = points[j].error.empty();
    if (oki != okj) return oki;
    return points[i].report.outlier_rate < points[j].report.outlier_rate;
  });

  const fs::path summary_path = s.out / "sweep_summary.csv";
  {
    std::ofstream f(summary_path);
    f << "a,b,gamma,scale,seed,outlier_rate,coverage,mean_manifold_distance,"
         "class_purity,status\n";
    for (size_t i : order) {
      const GridPoint& p = points[i];
      f << p.a << "," << p.b << "," << p.gamma << "," << p.scale << ","
        << p.seed << ",";
      if (p.error.empty())
        f << format_g17(p.report.outlier_rate) << ","
          << format_g17(p.report.coverage) << ","
          << format_g17(p.report.mean_manifold_distance) << ","
          << format_g17(p.report.class_purity) << ",ok\n";
      else
        f << ",,,,error: " << p.error << "\n";
    }
  }
  write_manifest((s.out / "manifest_sweep.txt").string(), "sweep",
                 {data_path.string(), ckpt_path.string()},
                 {summary_path.string(), results_path.string()}, s.seed);
  std::cout << "wrote " << summary_path.string() << " (" << points.size()
            << " grid points, radius " << r << ")\n";
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    const size_t b = item.find_first_not_of(" \t");
    const size_t e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? ""
                                         : item.substr(b, e - b + 1));
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#17becf"};

void cmd_plot(const Session& s) {
  const std::string kind = s.cfg.get_string("plot.kind", "scatter");
  const fs::path out_path = s.resolve("plot.output", "plot.svg");
  std::vector<std::string> inputs;

  SvgPlot plot;
  plot.set_title(s.cfg.get_string("plot.title", ""));

  if (kind == "scatter") {
    plot.set_axis_labels("x1", "x2");
    if (s.cfg.has("plot.dataset")) {
      const fs::path p = s.require_input("plot.dataset", "dataset.csv");
      inputs.push_back(p.string());
      const LabeledSet data = read_dataset_csv(p.string());
      Matrix c0(2, 0), c1(2, 0);
      for (Index j = 0; j < data.points.cols(); ++j) {
        Matrix& dst = data.labels[size_t(j)] == 0 ? c0 : c1;
        dst.conservativeResize(2, dst.cols() + 1);
        dst.col(dst.cols() - 1) = data.points.col(j);
      }
      plot.add_scatter(c0, "#bbbbbb", 1.2, 0.5, "data class 0");
      plot.add_scatter(c1, "#f2c28a", 1.2, 0.5, "data class 1");
    }
    const std::vector<std::string> files =
        split_list(s.cfg.get_string("plot.samples", ""));
    const std::vector<std::string> labels =
        split_list(s.cfg.get_string("plot.labels", ""));
    int color = 0;
    for (size_t i = 0; i < files.size(); ++i) {
      if (files[i].empty()) continue;
      if (!fs::exists(files[i]))
        throw ConfigError("samples file '" + files[i] + "' does not exist");
      inputs.push_back(files[i]);
      const Matrix pts = read_samples_csv(files[i]);
      std::string label = i < labels.size() && !labels[i].empty()
                              ? labels[i]
                              : fs::path(files[i]).stem().string();
      if (pts.cols() == 0) {
        plot.add_annotation("no data: " + label);
        continue;
      }
      plot.add_scatter(pts, kPalette[color++ % 6], 1.6, 0.8, label);
    }
  } else if (kind == "norm-profile") {
    plot.set_axis_labels("t", "mean modification norm");
    const std::vector<std::string> files =
        split_list(s.cfg.get_string("plot.trajectories", ""));
    const std::vector<std::string> labels =
        split_list(s.cfg.get_string("plot.labels", ""));
    int color = 0;
    for (size_t i = 0; i < files.size(); ++i) {
      if (files[i].empty()) continue;
      if (!fs::exists(files[i]))
        throw ConfigError("trajectory file '" + files[i] + "' does not exist");
      inputs.push_back(files[i]);
      const TrajectoryRows rows = read_trajectory_csv(files[i]);
      std::string label = i < labels.size() && !labels[i].empty()
                              ? labels[i]
                              : fs::path(files[i]).stem().string();
      if (rows.t.empty()) {
        plot.add_annotation("no data: " + label);
        continue;
      }
      // group by t, keep first-seen (descending) order
      std::vector<int> ts;
      std::map<int, std::pair<double, long>> acc;
      for (size_t k = 0; k < rows.t.size(); ++k) {
        auto [it, fresh] = acc.try_emplace(rows.t[k], std::pair{0.0, 0L});
        if (fresh) ts.push_back(rows.t[k]);
        it->second.first += rows.mod_norm[k];
        it->second.second += 1;
      }
      std::vector<double> xs, ys;
      for (int t : ts) {
        xs.push_back(double(t));
        ys.push_back(acc[t].first / double(acc[t].second));
      }
      plot.add_line(xs, ys, kPalette[color++ % 6], 1.8, label);
    }
  } else {
    throw ConfigError("unknown plot kind '" + kind + "'");
  }

  plot.write(out_path.string());
  write_manifest((s.out / "manifest_plot.txt").string(), "plot", inputs,
                 {out_path.string()}, s.seed);
  std::cout << "wrote " << out_path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale diffusion sampling lab"};
  app.fallthrough(true);
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed_flag;
  std::string out_flag;
  app.add_option("--config", config_path, "config file (INI-style)");
  app.add_option("--set", overrides, "override config: section.key=value");
  app.add_option("--seed", seed_flag, "global seed (overrides run.seed)");
  app.add_option("--out", out_flag, "output directory (overrides run.out)");

  CLI::App* c_gen = app.add_subcommand("gen-data", "generate the toy dataset");
  CLI::App* c_train =
      app.add_subcommand("train", "train denoiser and classifier");
  CLI::App* c_sample = app.add_subcommand("sample", "run the reverse sampler");
  CLI::App* c_eval = app.add_subcommand("eval", "evaluate a samples file");
  CLI::App* c_sweep =
      app.add_subcommand("sweep", "grid sweep over guidance parameters");
  CLI::App* c_plot = app.add_subcommand("plot", "emit SVG plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    Session s;
    if (!config_path.empty()) s.cfg = RunConfig::from_file(config_path);
    for (const std::string& o : overrides) s.cfg.apply_override(o);
    s.seed = seed_flag.value_or(s.cfg.get_seed(0));
    s.out = out_flag.empty() ? fs::path(s.cfg.get_string("run.out", "."))
                             : fs::path(out_flag);
    fs::create_directories(s.out);

    if (c_gen->parsed()) cmd_gen_data(s);
    else if (c_train->parsed()) cmd_train(s);
    else if (c_sample->parsed()) cmd_sample(s);
    else if (c_eval->parsed()) cmd_eval(s);
    else if (c_sweep->parsed()) cmd_sweep(s);
    else if (c_plot->parsed()) cmd_plot(s);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
