// Command-line front end: fit embeddings, evaluate cross-modal retrieval,
// sweep the embedding dimension, check deep gradients, generate synthetic
// datasets. Every command is a pure function of its flags plus --seed, so
// rerunning one reproduces its output files byte for byte.

#include "mvembed/eval.hpp"
#include "mvembed/io.hpp"
#include "mvembed/synth.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mvembed;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

struct RunConfig {
  std::string manifest;
  std::string method = "mvcca";
  std::string variant;  // empty: deep for d-prefixed methods, linear otherwise
  int d = 50;
  double delta = 1e-6;
  int pca = -1;  // -1: off; 0: keep min(D, N-1); k: cap at k
  std::string kernel = "rbf";
  double sigma = 0.0;
  bool sigma_auto = false;
  Index rff_features = 512;
  std::vector<Index> hidden = {64};
  Index embed_dim = 32;
  bool embed_dim_set = false;
  int epochs = 50;
  Index batch_size = 200;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::string out = "out";
};

bool deep_method_name(const std::string& name) { return !name.empty() && name[0] == 'd'; }

Method parse_method(const std::string& name) {
  const std::string base = deep_method_name(name) ? name.substr(1) : name;
  const auto m = method_from_name(base);
  if (!m.has_value()) throw InvalidInput("unknown method '" + name + "'");
  return *m;
}

std::string resolve_variant(const RunConfig& cfg) {
  std::string v = cfg.variant;
  const bool dm = deep_method_name(cfg.method);
  if (v.empty()) v = dm ? "deep" : "linear";
  if (v == "deep") {
    if (!dm || !deep_supported(parse_method(cfg.method)))
      throw InvalidInput("the deep variant supports dmvcca, dmvpls, dmvmda only");
  } else {
    if (dm)
      throw InvalidInput("method '" + cfg.method + "' requires --variant deep");
  }
  return v;
}

double resolve_sigma(const Dataset& data, const RunConfig& cfg) {
  if (!cfg.sigma_auto && cfg.sigma > 0.0) return cfg.sigma;
  const double s = sigma_heuristic(data, cfg.seed);
  log_msg(LogLevel::Info, "bandwidth heuristic chose sigma = " + std::to_string(s));
  return s;
}

AnyModel fit_any(const Dataset& data, const RunConfig& cfg, const std::string& variant) {
  MethodSpec spec;
  spec.method = parse_method(cfg.method);
  spec.d = cfg.d;
  spec.delta = cfg.delta;
  if (cfg.pca >= 0) spec.pca_dims = cfg.pca;
  if (variant == "linear") return fit_linear(data, spec);
  if (variant == "kernel") {
    KernelFunction k;
    const auto kind = kernel_from_name(cfg.kernel);
    if (!kind.has_value()) throw InvalidInput("unknown kernel '" + cfg.kernel + "'");
    k.kind = *kind;
    k.sigma = k.kind == KernelKind::Rbf ? resolve_sigma(data, cfg) : 1.0;
    return fit_kernel(data, spec, k);
  }
  if (variant == "rff")
    return fit_rff(data, spec, resolve_sigma(data, cfg), cfg.rff_features, cfg.seed);
  DeepConfig dc;
  dc.method = spec.method;
  dc.d = cfg.d;
  dc.delta = cfg.delta;
  dc.hidden = cfg.hidden;
  dc.output_dim = cfg.embed_dim_set ? cfg.embed_dim : std::max(cfg.embed_dim, Index(cfg.d));
  dc.epochs = cfg.epochs;
  dc.batch = cfg.batch_size;
  dc.lr = cfg.lr;
  dc.seed = cfg.seed;
  return fit_deep(data, dc);
}

std::string csv_double(double v) {
  std::string s;
  detail::append_double(s, v);
  return s;
}

int cmd_fit(const RunConfig& cfg) {
  const std::string variant = resolve_variant(cfg);
  const Dataset data = load_dataset(cfg.manifest);
  Timer timer;
  const AnyModel model = fit_any(data, cfg, variant);
  log_msg(LogLevel::Info, "fit finished in " + std::to_string(timer.seconds()) + " s");
  fs::create_directories(cfg.out);
  const fs::path out(cfg.out);
  save_model(model, out / "model.json");
  const EigenSolution& sol = model_solution(model);
  Json report;
  report["method"] = cfg.method;
  report["variant"] = variant;
  report["d"] = cfg.d;
  report["seed"] = cfg.seed;
  report["samples"] = data.num_samples();
  report["views"] = data.view_names;
  report["rho"] = sol.rho;
  report["eigenvalues"] =
      std::vector<double>(sol.values.data(), sol.values.data() + sol.values.size());
  detail::write_file(out / "fit_report.json", report.dump(2) + "\n");
  std::cout << (out / "model.json").string() << "\n"
            << (out / "fit_report.json").string() << "\n";
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string manifest;
  std::string train_manifest;
  std::string score = "cosine";
  std::string out = "out";
};

ScoreKind parse_score(const std::string& name) {
  if (name == "dot") return ScoreKind::Dot;
  if (name == "cosine") return ScoreKind::Cosine;
  throw InvalidInput("unknown score '" + name + "'");
}

// Matcher features: latents of every view stacked along the sample axis,
// so one classifier serves all query/gallery directions.
Matcher matcher_from(const std::vector<Matrix>& latents, const std::vector<int>& labels) {
  const Index d = latents.front().rows();
  Index total = 0;
  for (const Matrix& l : latents) total += l.cols();
  Matrix stacked(d, total);
  std::vector<int> stacked_labels;
  stacked_labels.reserve(std::size_t(total));
  Index at = 0;
  for (const Matrix& l : latents) {
    stacked.middleCols(at, l.cols()) = l;
    stacked_labels.insert(stacked_labels.end(), labels.begin(), labels.end());
    at += l.cols();
  }
  return fit_matcher(stacked, stacked_labels);
}

std::vector<RetrievalResult> all_directions(const Matcher& matcher,
                                            const std::vector<Matrix>& latents,
                                            const std::vector<int>& labels,
                                            const std::vector<std::string>& names,
                                            ScoreKind kind) {
  std::vector<RetrievalResult> results;
  for (std::size_t i = 0; i < latents.size(); ++i)
    for (std::size_t j = 0; j < latents.size(); ++j) {
      if (i == j) continue;
      results.push_back(run_cross_modal(matcher, latents[i], labels, latents[j], labels,
                                        names[i], names[j], kind));
    }
  return results;
}

std::string render_pr_svg(const std::vector<RetrievalResult>& results) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22", "#17becf"};
  const double left = 70, right = 610, top = 50, bottom = 420;
  const auto px = [&](double recall) { return left + recall * (right - left); };
  const auto py = [&](double precision) { return bottom - precision * (bottom - top); };
  char buf[256];
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
       "viewBox=\"0 0 640 480\">\n";
  s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"15\">11-point interpolated precision-recall</text>\n";
  for (int t = 0; t <= 10; t += 2) {
    const double r = t / 10.0;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n",
                  px(r), py(0.0), px(r), py(1.0));
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n",
                  px(0.0), py(r), px(1.0), py(r));
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" "
                  "font-family=\"sans-serif\" font-size=\"12\">%.1f</text>\n",
                  px(r), bottom + 18.0, r);
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" "
                  "font-family=\"sans-serif\" font-size=\"12\">%.1f</text>\n",
                  left - 8.0, py(r) + 4.0, r);
    s += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                px(0.0), py(0.0), px(1.0), py(0.0));
  s += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                px(0.0), py(0.0), px(0.0), py(1.0));
  s += buf;
  s += "<text x=\"340\" y=\"462\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\">recall</text>\n";
  s += "<text x=\"20\" y=\"235\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"13\" transform=\"rotate(-90 20 235)\">precision</text>\n";
  for (std::size_t k = 0; k < results.size(); ++k) {
    const char* color = palette[k % 10];
    std::string points;
    for (int t = 0; t <= 10; ++t) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(t / 10.0),
                    py(results[k].precision[std::size_t(t)]));
      points += buf;
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    const double ly = top + 16.0 * double(k);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                  "stroke-width=\"2\"/>\n",
                  right - 140.0, ly, right - 116.0, ly, color);
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" "
                  "font-size=\"12\">%s</text>\n",
                  right - 110.0, ly + 4.0,
                  (results[k].query_tag + " to " + results[k].gallery_tag).c_str());
    s += buf;
  }
  s += "</svg>\n";
  return s;
}

int cmd_eval(const EvalArgs& args) {
  const ScoreKind kind = parse_score(args.score);
  const AnyModel model = load_model(args.model);
  const Dataset test = load_dataset(args.manifest);
  require(test.has_labels(), "eval: the dataset must carry labels to define relevance");
  const auto test_latents = project_any(model, test.views);

  // matcher and class centroids come from the training manifest when given
  Dataset train_data;
  const Dataset* train = &test;
  std::vector<Matrix> train_latents = test_latents;
  if (!args.train_manifest.empty()) {
    train_data = load_dataset(args.train_manifest);
    require(train_data.has_labels(), "eval: the training dataset must carry labels");
    train_latents = project_any(model, train_data.views);
    train = &train_data;
  }
  const Matcher matcher = matcher_from(train_latents, train->labels);

  const auto results =
      all_directions(matcher, test_latents, test.labels, test.view_names, kind);

  fs::create_directories(args.out);
  const fs::path out(args.out);
  std::string map_csv = "direction,map\n";
  std::string pr_csv = "direction,recall,precision\n";
  for (const auto& r : results) {
    const std::string tag = r.query_tag + "->" + r.gallery_tag;
    map_csv += tag + "," + csv_double(r.map) + "\n";
    for (int t = 0; t <= 10; ++t)
      pr_csv += tag + "," + csv_double(t / 10.0) + "," +
                csv_double(r.precision[std::size_t(t)]) + "\n";
  }
  detail::write_file(out / "map.csv", map_csv);
  detail::write_file(out / "pr.csv", pr_csv);
  detail::write_file(out / "pr_curves.svg", render_pr_svg(results));

  std::string rec_csv = "view,accuracy\n";
  for (std::size_t v = 0; v < test_latents.size(); ++v)
    rec_csv += test.view_names[v] + "," +
               csv_double(nearest_class_mean_accuracy(train_latents[v], train->labels,
                                                      test_latents[v], test.labels)) +
               "\n";
  detail::write_file(out / "recognition.csv", rec_csv);

  for (const auto& r : results)
    std::cout << r.query_tag << "->" << r.gallery_tag << " map " << csv_double(r.map) << "\n";
  return 0;
}

struct SweepArgs {
  RunConfig cfg;
  std::string eval_manifest;
  std::string score = "cosine";
  std::vector<int> grid = {10, 20, 50, 100, 150, 200};
};

int cmd_sweep_d(const SweepArgs& args) {
  const ScoreKind kind = parse_score(args.score);
  const std::string variant = resolve_variant(args.cfg);
  require(!args.grid.empty(), "sweep-d: the d grid must not be empty");
  const Dataset train = load_dataset(args.cfg.manifest);
  Dataset eval_data;
  const Dataset* test = &train;
  if (!args.eval_manifest.empty()) {
    eval_data = load_dataset(args.eval_manifest);
    test = &eval_data;
  }
  require(test->has_labels(), "sweep-d: the evaluation dataset must carry labels");
  require(train.has_labels(), "sweep-d: the training dataset must carry labels");

  std::string csv = "d,method,direction,map\n";
  for (int d : args.grid) {
    RunConfig point = args.cfg;
    point.d = d;
    try {
      const AnyModel model = fit_any(train, point, variant);
      const auto train_latents = project_any(model, train.views);
      const auto test_latents = project_any(model, test->views);
      const Matcher matcher = matcher_from(train_latents, train.labels);
      for (const auto& r :
           all_directions(matcher, test_latents, test->labels, test->view_names, kind))
        csv += std::to_string(d) + "," + args.cfg.method + "," + r.query_tag + "->" +
               r.gallery_tag + "," + csv_double(r.map) + "\n";
    } catch (const InvalidInput& e) {
      warn("sweep-d: skipping d=" + std::to_string(d) + ": " + e.what());
    } catch (const SingularMetric& e) {
      warn("sweep-d: skipping d=" + std::to_string(d) + ": " + e.what());
    }
  }
  fs::create_directories(args.cfg.out);
  detail::write_file(fs::path(args.cfg.out) / "sweep_d.csv", csv);
  std::cout << (fs::path(args.cfg.out) / "sweep_d.csv").string() << "\n";
  return 0;
}

// Finite-difference verification of the deep gradients on seeded synthetic
// instances. --perturb-grad injects an error into the analytic side so the
// failure path itself stays testable.
int cmd_gradcheck(std::uint64_t seed, double perturb) {
  struct Item {
    const char* name;
    Method method;
  };
  const Item items[] = {{"dmvcca", Method::MvCCA},
                        {"dmvpls", Method::MvPLS},
                        {"dmvmda", Method::MvMDA}};
  Timer timer;
  double worst = 0.0;
  const char* worst_name = items[0].name;
  for (const Item& item : items) {
    SynthSpec spec;
    spec.n = 40;
    spec.latent_dim = 3;
    spec.view_dims = {6, 5};
    spec.noise = 0.3;
    spec.classes = 3;
    spec.separation = 1.5;
    spec.seed = seed;
    DeepConfig config;
    config.method = item.method;
    config.d = 2;
    config.hidden = {5};
    config.output_dim = 4;
    config.seed = seed;
    const double err = gradcheck_deep(synth_generate(spec).data, config, 1e-5, perturb);
    std::printf("%s max relative error %.3e\n", item.name, err);
    if (err > worst) {
      worst = err;
      worst_name = item.name;
    }
  }
  log_msg(LogLevel::Info, "gradcheck finished in " + std::to_string(timer.seconds()) + " s");
  if (worst <= 1e-4) {
    std::printf("gradient check passed (worst %.3e)\n", worst);
    return 0;
  }
  std::printf("gradient check FAILED: %s at %.3e exceeds 1e-4\n", worst_name, worst);
  return 3;
}

struct SynthArgs {
  Index n = 300;
  Index latent_dim = 5;
  Index views = 2;
  Index dim = 20;
  std::vector<Index> view_dims;
  double noise = 0.1;
  int classes = 0;
  double separation = 1.0;
  std::uint64_t seed = 0;
  std::string out = "out";
};

int cmd_synth(const SynthArgs& args) {
  SynthSpec spec;
  spec.n = args.n;
  spec.latent_dim = args.latent_dim;
  if (args.view_dims.empty()) {
    require(args.views >= 2, "synth: need at least two views");
    require(args.dim >= 1, "synth: view dimension must be positive");
    spec.view_dims.assign(std::size_t(args.views), args.dim);
  } else {
    spec.view_dims = args.view_dims;
  }
  spec.noise = args.noise;
  spec.classes = args.classes;
  spec.separation = args.separation;
  spec.seed = args.seed;
  const SynthResult result = synth_generate(spec);
  const fs::path manifest = save_dataset(result.data, args.out);

  // ground-truth sidecar: everything needed to audit the generator
  Json truth;
  truth["seed"] = spec.seed;
  truth["latent_dim"] = spec.latent_dim;
  truth["noise"] = spec.noise;
  truth["classes"] = spec.classes;
  truth["separation"] = spec.separation;
  Json mixing = Json::array();
  for (const Matrix& a : result.mixing) mixing.push_back(detail::mat_json(a));
  truth["mixing"] = std::move(mixing);
  if (spec.classes > 0) truth["class_means"] = detail::mat_json(result.class_means);
  detail::write_file(fs::path(args.out) / "generator.json", truth.dump(2) + "\n");

  std::cout << manifest.string() << "\n";
  return 0;
}

void add_model_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--manifest", cfg.manifest, "dataset manifest JSON")->required();
  cmd->add_option("--method", cfg.method, "embedding method")
      ->check(CLI::IsMember(
          {"mvcca", "mvpls", "slmvda", "mvmda", "mvda", "dmvcca", "dmvpls", "dmvmda"}));
  cmd->add_option("--variant", cfg.variant, "solver family (default: linear, deep for d-methods)")
      ->check(CLI::IsMember({"linear", "kernel", "rff", "deep"}));
  cmd->add_option("--d", cfg.d, "embedding dimension");
  cmd->add_option("--delta", cfg.delta, "metric ridge factor");
  cmd->add_option("--pca", cfg.pca, "per-view PCA cap (0 keeps min(D, N-1))");
  auto* sigma = cmd->add_option("--sigma", cfg.sigma, "RBF bandwidth");
  cmd->add_flag("--sigma-auto", cfg.sigma_auto, "choose the bandwidth by the pairwise-distance heuristic")
      ->excludes(sigma);
  cmd->add_option("--kernel", cfg.kernel, "kernel for the kernel variant")
      ->check(CLI::IsMember({"rbf", "linear"}));
  cmd->add_option("--rff-features", cfg.rff_features, "random cosine features per view");
  cmd->add_option("--hidden", cfg.hidden, "deep variant hidden widths")->delimiter(',');
  cmd->add_option("--embed-dim", cfg.embed_dim, "deep variant per-view output width")
      ->each([&cfg](const std::string&) { cfg.embed_dim_set = true; });
  cmd->add_option("--epochs", cfg.epochs, "deep variant training epochs");
  cmd->add_option("--batch-size", cfg.batch_size, "deep variant batch size");
  cmd->add_option("--lr", cfg.lr, "deep variant learning rate");
  cmd->add_option("--seed", cfg.seed, "random seed");
  cmd->add_option("--out", cfg.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generalized multi-view embedding toolkit"};
  app.require_subcommand(1);

  RunConfig fit_cfg;
  CLI::App* fit = app.add_subcommand("fit", "fit an embedding model");
  add_model_options(fit, fit_cfg);

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "cross-modal retrieval evaluation");
  eval->add_option("--model", eval_args.model, "model JSON from fit")->required();
  eval->add_option("--manifest", eval_args.manifest, "evaluation dataset manifest")->required();
  eval->add_option("--train-manifest", eval_args.train_manifest,
                   "manifest for matcher training (default: the evaluation set)");
  eval->add_option("--score", eval_args.score, "similarity on matcher probabilities")
      ->check(CLI::IsMember({"cosine", "dot"}));
  eval->add_option("--out", eval_args.out, "output directory");

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand("sweep-d", "retrieval quality across embedding sizes");
  add_model_options(sweep, sweep_args.cfg);
  sweep->add_option("--eval-manifest", sweep_args.eval_manifest,
                    "held-out manifest (default: evaluate on the training set)");
  sweep->add_option("--d-grid", sweep_args.grid, "embedding sizes to try")->delimiter(',');
  sweep->add_option("--score", sweep_args.score, "similarity on matcher probabilities")
      ->check(CLI::IsMember({"cosine", "dot"}));

  std::uint64_t gc_seed = 0;
  double gc_perturb = 0.0;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of deep gradients");
  gradcheck->add_option("--seed", gc_seed, "random seed");
  gradcheck->add_option("--perturb-grad", gc_perturb)->group("");

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a shared-latent synthetic dataset");
  synth->add_option("--n", synth_args.n, "sample count");
  synth->add_option("--latent-dim", synth_args.latent_dim, "shared latent dimension");
  synth->add_option("--views", synth_args.views, "view count");
  synth->add_option("--dim", synth_args.dim, "dimension of every view");
  synth->add_option("--view-dims", synth_args.view_dims, "per-view dimensions")->delimiter(',');
  synth->add_option("--noise", synth_args.noise, "observation noise level");
  synth->add_option("--classes", synth_args.classes, "class count (0 = unlabeled)");
  synth->add_option("--separation", synth_args.separation, "class mean distance from the origin");
  synth->add_option("--seed", synth_args.seed, "random seed");
  synth->add_option("--out", synth_args.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_cfg);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (sweep->parsed()) return cmd_sweep_d(sweep_args);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_seed, gc_perturb);
    if (synth->parsed()) return cmd_synth(synth_args);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SingularMetric& e) {
    std::cerr << "check failure: " << e.what() << "\n";
    return 3;
  } catch (const TrainingFailed& e) {
    std::cerr << "check failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
