#include "signdict/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ostream>

#include "signdict/dataset.hpp"
#include "signdict/error.hpp"
#include "signdict/estimator.hpp"
#include "signdict/eval.hpp"
#include "signdict/quality_gate.hpp"
#include "signdict/ranking.hpp"
#include "signdict/reports.hpp"
#include "signdict/service/http.hpp"
#include "signdict/service/submission.hpp"
#include "signdict/synth.hpp"
#include "signdict/text.hpp"

namespace signdict {

namespace fs = std::filesystem;

namespace {

struct TrainArgs {
  std::string catalog, data, out, history;
  std::uint64_t seed = 1;
  std::size_t epochs = 100;
  double lr = 1e-3;
  double factor = 0.1;
  std::size_t patience = 5;
  std::size_t batch_size = 16;
  std::string optimizer = "adam";
  std::string subset = "body-hands";
  std::size_t hidden = 0, layers = 6, heads = 9, ff_dim = 0, max_frames = 204;
  bool no_augment = false;
  bool quiet = false;
};

struct EvalArgs {
  std::string model, test, catalog, report, latency;
  std::vector<double> ratios;
  std::size_t k = eval::kDefaultTopK;
};

struct InputArgs {
  std::string pose, media;
};

struct CheckArgs {
  InputArgs input;
  std::string report;
};

struct PredictArgs {
  std::string model, catalog, report, view = "compact";
  InputArgs input;
  std::optional<double> trim_start, trim_end;
  std::string movement, hands, location, handshape;
  bool probabilities = false;
};

struct LatencyArgs {
  std::string data, model, write, report;
  std::vector<double> lengths;
  std::size_t repeats = 3;
};

struct SynthArgs {
  std::string out;
  std::size_t classes = 10, per_class = 250, frames = 60;
  double noise = 0.02, fps = 30.0;
  std::uint64_t seed = 1;
};

struct ServeArgs {
  std::string host, model, catalog, latency, storage, web_root;
  int port = 8080;
  bool retain_media = false;
  std::size_t workers = 0;
};

std::vector<std::size_t> subset_named(const std::string& name) {
  if (name == "body-hands") return landmarks::body_hands_subset();
  if (name == "compact") return landmarks::compact_subset();
  if (name == "all") return landmarks::all_indices();
  throw Error(ErrorCode::unknown_token, "unknown landmark subset '" + name + "'");
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string read_input(const InputArgs& in) { return read_text_file(in.pose.empty() ? in.media : in.pose); }

void add_input(CLI::App* cmd, InputArgs& in) {
  auto* pose = cmd->add_option("--pose", in.pose, "Pose file (POSE v1 text)");
  auto* media = cmd->add_option("--media", in.media, "Media file, handed to the pose estimator");
  pose->excludes(media);
  media->excludes(pose);
}

void require_input(const InputArgs& in) {
  if (in.pose.empty() && in.media.empty()) throw CLI::RequiredError("--pose or --media");
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const VocabularyCatalog catalog = load_catalog(a.catalog);
  const auto data = load_dataset(a.data, catalog);
  recognizer::TrainConfig tc;
  tc.epochs = a.epochs;
  tc.learning_rate = a.lr;
  tc.plateau_factor = a.factor;
  tc.plateau_patience = a.patience;
  tc.seed = a.seed;
  tc.batch_size = a.batch_size;
  tc.optimizer = recognizer::parse_optimizer(a.optimizer);
  tc.landmark_subset = subset_named(a.subset);
  recognizer::ModelConfig mc;
  mc.hidden_dim = a.hidden;
  mc.encoder_layers = a.layers;
  mc.attention_heads = a.heads;
  mc.ff_dim = a.ff_dim;
  mc.max_frames = a.max_frames;
  const recognizer::AugmentationConfig ac =
      a.no_augment ? recognizer::AugmentationConfig::disabled() : recognizer::AugmentationConfig{};
  if (!a.quiet) out << "training on " << data.size() << " samples, " << catalog.size() << " classes\n";
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = recognizer::train(data, catalog, tc, mc, ac, [&](const recognizer::EpochStats& e) {
    if (a.quiet) return;
    char line[160];
    std::snprintf(line, sizeof line, "epoch %3zu/%zu  loss %.5f  acc %.4f  lr %.1e  %.1fs\n", e.epoch, a.epochs,
                  e.loss, e.accuracy, e.learning_rate,
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    out << line << std::flush;
  });
  recognizer::save_model(model, a.out);
  if (!a.history.empty()) {
    nlohmann::json h = nlohmann::json::array();
    for (const auto& e : model.history()) {
      h.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}, {"learning_rate", e.learning_rate}});
    }
    write_json(a.history, h);
  }
  out << "wrote " << a.out << " (catalog " << fingerprint_hex(model.fingerprint()) << ")\n";
  return 0;
}

recognizer::TrainedModel load_checked(const std::string& model_path, const std::string& catalog_path) {
  auto model = recognizer::load_model(model_path);
  if (!catalog_path.empty()) {
    const auto active = load_catalog(catalog_path);
    if (active.fingerprint() != model.fingerprint()) {
      throw Error(ErrorCode::fingerprint_mismatch, "model was trained on catalog " + fingerprint_hex(model.fingerprint()) +
                                                       " but " + catalog_path + " is " +
                                                       fingerprint_hex(active.fingerprint()));
    }
  }
  return model;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, bool sweep_only) {
  const auto model = load_checked(a.model, a.catalog);
  const auto test = load_dataset(a.test, model.catalog());
  EvaluationRun run;
  if (!sweep_only) run.accuracy = eval::evaluate_model(model, test, a.k);
  if (!a.ratios.empty()) run.sweep = eval::resolution_sweep(model, test, a.ratios, a.k);
  if (!a.latency.empty()) run.latency = eval::latency_fit(eval::load_latency_observations(a.latency));
  out << report_table(run, model.catalog());
  if (!a.report.empty()) {
    write_json(a.report, report_json(run, model.catalog()));
    out << "report written to " << a.report << "\n";
  }
  return 0;
}

int cmd_check(const CheckArgs& a, std::ostream& out) {
  require_input(a.input);
  const std::string bytes = read_input(a.input);
  const AutoPoseEstimator estimator;
  const MediaProbe probe = estimator.probe(bytes);
  auto technical = check_technical(probe.resolution.value_or(kStandardResolution), probe.status);
  std::vector<Issue> visibility;
  if (probe.status == ByteStatus::complete) {
    std::vector<PoseSequence> people;
    try {
      people = estimator.estimate(bytes);
    } catch (const Error&) {
    }
    if (people.empty()) {
      technical.push_back(make_issue(IssueCode::undecodable));
    } else {
      visibility = check_visibility(people);
    }
  }
  const SubmissionReport report = gate(std::move(technical), std::move(visibility));
  out << "verdict: " << to_string(report.verdict) << "\n";
  for (const auto& issue : report.issues) {
    out << "[" << to_string(issue.severity) << "] " << to_string(issue.code) << "\n" << render_message(issue) << "\n";
  }
  if (!a.report.empty()) write_json(a.report, service::report_json(report));
  return 0;
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  require_input(a.input);
  if (a.trim_start.has_value() != a.trim_end.has_value()) {
    throw CLI::ValidationError("--trim-start and --trim-end go together");
  }
  const auto model = load_checked(a.model, a.catalog);
  const AutoPoseEstimator estimator;
  PoseSequence seq = estimate(estimator, read_input(a.input));
  if (a.trim_start) seq = trim(seq, *a.trim_start, std::min(*a.trim_end, seq.duration_s()));
  const auto dist = recognizer::predict(model, model.catalog(), seq);
  const auto ranked = rank(dist, model.catalog());
  const ViewKind kind = parse_view_kind(a.view);
  const FilterCriteria filter =
      kind == ViewKind::compact ? FilterCriteria{} : parse_filter(a.movement, a.hands, a.location, a.handshape);
  const auto filtered = filter_results(ranked, filter);
  const ResultView view = filtered.empty() ? ResultView{kind, std::nullopt, {}} : compose_view(filtered, kind);
  auto print = [&](const RankedResult& r) {
    char line[256];
    std::snprintf(line, sizeof line, "%3zu  %-20s %-12s %-9s", r.rank, r.gloss.c_str(), r.rendition_id.c_str(),
                  std::string(to_string(r.confidence)).c_str());
    out << line;
    if (a.probabilities) {
      std::snprintf(line, sizeof line, " %6.2f%%", 100.0 * r.probability);
      out << line;
    }
    out << "\n";
  };
  if (kind == ViewKind::detailed) out << "Applied filter: " << filter.describe() << "\n";
  if (view.primary) print(*view.primary);
  for (const auto& r : view.grid) print(r);
  if (!view.primary && view.grid.empty()) out << "no matching signs\n";
  if (!a.report.empty()) write_json(a.report, service::view_json("", view, filter, filtered.size()));
  return 0;
}

int cmd_latency(const LatencyArgs& a, std::ostream& out) {
  std::vector<eval::LatencyObservation> obs;
  if (!a.data.empty()) obs = eval::load_latency_observations(a.data);
  if (!a.model.empty()) {
    const auto model = recognizer::load_model(a.model);
    const auto lengths = a.lengths.empty() ? std::vector<double>{1, 2, 3, 4, 5, 6} : a.lengths;
    for (const double seconds : lengths) {
      SynthSpec spec;
      spec.num_classes = model.catalog().size();
      spec.frames = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(seconds * spec.fps)));
      for (std::size_t r = 0; r < a.repeats; ++r) {
        const PoseSequence seq = synth_sample(spec, r % spec.num_classes, r);
        const auto t0 = std::chrono::steady_clock::now();
        (void)recognizer::predict(model, seq);
        obs.emplace_back(seq.duration_s(),
                         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      }
    }
  }
  if (obs.empty()) throw CLI::RequiredError("--data or --model");
  if (!a.write.empty()) {
    std::string text = "# input_seconds\tprediction_seconds\n";
    char line[64];
    for (const auto& [x, y] : obs) {
      std::snprintf(line, sizeof line, "%.6f\t%.6f\n", x, y);
      text += line;
    }
    write_text_file(a.write, text);
  }
  EvaluationRun run;
  run.latency = eval::latency_fit(obs);
  out << "observations     " << obs.size() << "\n" << report_table(run, VocabularyCatalog{});
  if (!a.report.empty()) write_json(a.report, report_json(run, VocabularyCatalog{}));
  return 0;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthSpec spec;
  spec.num_classes = a.classes;
  spec.per_class = a.per_class;
  spec.frames = a.frames;
  spec.noise_sigma = a.noise;
  spec.seed = a.seed;
  spec.fps = a.fps;
  const auto catalog = synth_catalog(a.classes);
  const auto data = synthesize_dataset(spec);
  write_dataset(a.out, data, catalog);
  save_catalog(catalog, fs::path(a.out) / "catalog.tsv");
  out << "wrote " << data.size() << " sequences and catalog.tsv to " << a.out << "\n";
  return 0;
}

int cmd_serve(const ServeArgs& a, CLI::App* cmd, std::ostream& out) {
  service::ServiceConfig base;
  base.web_root = SIGNDICT_WEB_ROOT;
  service::ServiceConfig c = service::ServiceConfig::from_env(base);
  if (cmd->count("--host")) c.host = a.host;
  if (cmd->count("--port")) c.port = a.port;
  if (cmd->count("--model")) c.model_path = a.model;
  if (cmd->count("--catalog")) c.catalog_path = fs::path(a.catalog);
  if (cmd->count("--retain-media")) c.retain_media = a.retain_media;
  if (cmd->count("--latency-calibration")) c.latency_calibration_path = fs::path(a.latency);
  if (cmd->count("--storage")) c.storage_dir = a.storage;
  if (cmd->count("--web-root")) c.web_root = a.web_root;
  if (cmd->count("--workers")) c.workers = a.workers;
  return service::run_server(c, out);
}

std::vector<double> default_ratios() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}; }

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Video-based sign dictionary engine: training, evaluation, gating and serving.", "signdict"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a recognizer on a labeled pose dataset");
  train->add_option("--catalog", ta.catalog, "Vocabulary catalog (TSV)")->required();
  train->add_option("--data", ta.data, "Dataset directory with labels.tsv")->required();
  train->add_option("--out", ta.out, "Model file to write")->required();
  train->add_option("--seed", ta.seed, "Random seed")->capture_default_str();
  train->add_option("--epochs", ta.epochs)->capture_default_str();
  train->add_option("--lr", ta.lr, "Initial learning rate")->capture_default_str();
  train->add_option("--plateau-factor", ta.factor)->capture_default_str();
  train->add_option("--plateau-patience", ta.patience)->capture_default_str();
  train->add_option("--batch-size", ta.batch_size)->capture_default_str();
  train->add_option("--optimizer", ta.optimizer)->check(CLI::IsMember({"adam", "sgd"}))->capture_default_str();
  train->add_option("--subset", ta.subset, "Landmark subset")
      ->check(CLI::IsMember({"body-hands", "compact", "all"}))
      ->capture_default_str();
  train->add_option("--hidden", ta.hidden, "Hidden width (0: 2 x landmarks)")->capture_default_str();
  train->add_option("--layers", ta.layers, "Encoder layers")->capture_default_str();
  train->add_option("--heads", ta.heads, "Attention heads")->capture_default_str();
  train->add_option("--ff-dim", ta.ff_dim, "Feed-forward width (0: 4 x hidden)")->capture_default_str();
  train->add_option("--max-frames", ta.max_frames)->capture_default_str();
  train->add_flag("--no-augment", ta.no_augment, "Disable augmentation");
  train->add_option("--history", ta.history, "Write per-epoch history as JSON");
  train->add_flag("--quiet", ta.quiet);

  EvalArgs ea;
  auto* evalc = app.add_subcommand("eval", "Evaluate a model on a labeled test set");
  evalc->add_option("--model", ea.model)->required();
  evalc->add_option("--test", ea.test, "Test dataset directory")->required();
  evalc->add_option("--catalog", ea.catalog, "Active catalog; must match the model");
  evalc->add_option("--report", ea.report, "Write the JSON report here");
  evalc->add_option("--ratios", ea.ratios, "Also sweep these resolution ratios")->delimiter(',');
  evalc->add_option("--latency", ea.latency, "Also fit latency observations from this file");
  evalc->add_option("--k", ea.k, "Top-k depth")->capture_default_str();

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "Run the submission quality gate on one input");
  add_input(check, ca.input);
  check->add_option("--report", ca.report, "Write the JSON report here");

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Rank the vocabulary for one input");
  predict->add_option("--model", pa.model)->required();
  predict->add_option("--catalog", pa.catalog, "Active catalog; must match the model");
  add_input(predict, pa.input);
  predict->add_option("--view", pa.view)->check(CLI::IsMember({"compact", "detailed"}))->capture_default_str();
  predict->add_option("--trim-start", pa.trim_start, "Seconds");
  predict->add_option("--trim-end", pa.trim_end, "Seconds");
  predict->add_option("--movement", pa.movement);
  predict->add_option("--hands", pa.hands);
  predict->add_option("--location", pa.location);
  predict->add_option("--handshape", pa.handshape);
  predict->add_flag("--probabilities", pa.probabilities, "Show percentages next to the labels");
  predict->add_option("--report", pa.report, "Write the view as JSON");

  EvalArgs sa;
  sa.ratios = default_ratios();
  auto* sweep = app.add_subcommand("sweep-resolution", "Accuracy at reduced capture resolutions");
  sweep->add_option("--model", sa.model)->required();
  sweep->add_option("--test", sa.test)->required();
  sweep->add_option("--catalog", sa.catalog);
  sweep->add_option("--ratios", sa.ratios, "Ascending, ending at 1.0")->delimiter(',')->capture_default_str();
  sweep->add_option("--report", sa.report);
  sweep->add_option("--k", sa.k)->capture_default_str();

  LatencyArgs la;
  auto* latency = app.add_subcommand("latency-fit", "Fit prediction time against input length");
  latency->add_option("--data", la.data, "Observations: input seconds and prediction seconds per line");
  latency->add_option("--model", la.model, "Measure this model on synthetic inputs");
  latency->add_option("--lengths", la.lengths, "Input lengths in seconds to measure")->delimiter(',');
  latency->add_option("--repeats", la.repeats)->capture_default_str();
  latency->add_option("--write", la.write, "Save the observations (calibration file)");
  latency->add_option("--report", la.report);

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth-data", "Write a synthetic labeled dataset and its catalog");
  synth->add_option("--out", ya.out)->required();
  synth->add_option("--classes", ya.classes)->capture_default_str();
  synth->add_option("--per-class", ya.per_class)->capture_default_str();
  synth->add_option("--frames", ya.frames)->capture_default_str();
  synth->add_option("--noise", ya.noise)->capture_default_str();
  synth->add_option("--seed", ya.seed)->capture_default_str();
  synth->add_option("--fps", ya.fps)->capture_default_str();

  ServeArgs va;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service (flags override environment)");
  serve->add_option("--host", va.host);
  serve->add_option("--port", va.port);
  serve->add_option("--model", va.model);
  serve->add_option("--catalog", va.catalog);
  serve->add_flag("--retain-media", va.retain_media);
  serve->add_option("--latency-calibration", va.latency);
  serve->add_option("--storage", va.storage);
  serve->add_option("--web-root", va.web_root);
  serve->add_option("--workers", va.workers);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return 2;
  }

  try {
    if (*train) return cmd_train(ta, out);
    if (*evalc) return cmd_eval(ea, out, false);
    if (*check) return cmd_check(ca, out);
    if (*predict) return cmd_predict(pa, out);
    if (*sweep) return cmd_eval(sa, out, true);
    if (*latency) return cmd_latency(la, out);
    if (*synth) return cmd_synth(ya, out);
    if (*serve) return cmd_serve(va, serve, out);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace signdict
