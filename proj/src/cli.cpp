#include "seglock/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <sstream>

#include "seglock/decode.hpp"
#include "seglock/io.hpp"
#include "seglock/parallel.hpp"

namespace seglock::cli {
namespace {

namespace fs = std::filesystem;

struct DecodeArgs {
  std::vector<std::string> grids;
  std::string truth;
  std::string space;
  std::string model;
  std::string out;
};

struct FuseArgs {
  std::vector<std::string> proposals;
  double sigma = SoftNmsConfig{}.sigma;
  double pre_threshold = SoftNmsConfig{}.pre_threshold;
  std::size_t max_output = 0;
  std::string model = "fused";
  std::string out;
};

struct EvalArgs {
  std::string proposals;
  std::string truth;
  std::string report;
  bool table = false;
  std::string label;
};

struct TrainArgs {
  std::vector<std::string> scores;
  std::string out;
  int degree = 2;
  std::vector<double> lambda_grid;
};

struct ScoreArgs {
  std::string fusion;
  std::string scores;
  std::string out;
  bool print_auc = false;
};

struct SynthArgs {
  std::string config;
  std::string out_dir;
};

void decode_command(const DecodeArgs& a, unsigned threads, std::ostream& out) {
  const TruthSet truth = io::to_truth_set(io::read_manifest(a.truth));
  std::vector<io::GridRecord> records;
  for (const auto& path : a.grids) {
    auto part = io::read_grids(path);
    for (auto& r : part) records.push_back(std::move(r));
  }
  if (records.empty()) throw InputError("decode: no frame grids found");

  std::optional<ScoreSpace> forced;
  if (!a.space.empty()) forced = parse_score_space(a.space);
  const ScoreSpace space = forced.value_or(records.front().space);
  for (const auto& r : records) {
    if (!forced && r.space != space) {
      throw InputError("decode: grids mix score spaces; pass --space to choose one");
    }
    if (!truth.contains(r.video)) throw InputError("decode: video '" + r.video + "' not in manifest");
  }

  std::vector<std::vector<Segment>> decoded(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) {
    decoded[i] = decode_grid(records[i].grid, truth.at(records[i].video).duration, space);
  });

  io::ProposalFile file;
  file.model = a.model.empty() ? fs::path(a.grids.front()).stem().string() : a.model;
  file.score_space = to_string(space);
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& list = file.videos[records[i].video];
    if (!list.empty()) throw InputError("decode: video '" + records[i].video + "' appears twice");
    list = std::move(decoded[i]);
  }
  io::write_proposals(a.out, file);
  out << "decoded " << records.size() << " grids -> " << a.out << "\n";
}

void fuse_command(const FuseArgs& a, unsigned threads, std::ostream& out) {
  std::vector<io::ProposalFile> inputs;
  for (const auto& path : a.proposals) inputs.push_back(io::read_proposals(path));

  std::vector<std::string> videos;
  for (const auto& f : inputs) {
    for (const auto& [id, segs] : f.videos) videos.push_back(id);
  }
  std::sort(videos.begin(), videos.end());
  videos.erase(std::unique(videos.begin(), videos.end()), videos.end());

  SoftNmsConfig cfg;
  cfg.sigma = a.sigma;
  cfg.pre_threshold = a.pre_threshold;
  if (a.max_output > 0) cfg.max_output = a.max_output;

  std::vector<std::vector<Segment>> fused(videos.size());
  parallel_for(videos.size(), threads, [&](std::size_t v) {
    std::vector<Segment> pooled;
    for (const auto& f : inputs) {
      const auto it = f.videos.find(videos[v]);
      if (it != f.videos.end()) pooled.insert(pooled.end(), it->second.begin(), it->second.end());
    }
    fused[v] = soft_nms(pooled, cfg);
  });

  io::ProposalFile result;
  result.model = a.model;
  result.score_space = inputs.front().score_space;
  for (const auto& f : inputs) {
    if (f.score_space != result.score_space) result.score_space = "mixed";
  }
  for (std::size_t v = 0; v < videos.size(); ++v) result.videos[videos[v]] = std::move(fused[v]);
  io::write_proposals(a.out, result);
  out << "fused " << inputs.size() << " proposal files over " << videos.size() << " videos -> "
      << a.out << "\n";
}

void eval_command(const EvalArgs& a, unsigned threads, std::ostream& out) {
  const TruthSet truth = io::to_truth_set(io::read_manifest(a.truth));
  const io::ProposalFile preds = io::read_proposals(a.proposals);
  const MetricConfig cfg;
  const MetricReport report = evaluate_localization(preds.videos, truth, cfg, threads);
  io::write_text(a.report, io::dump(io::report_to_json(report)));
  if (a.table) out << format_report_table(report, cfg, a.label);
}

void train_command(const TrainArgs& a, unsigned threads, std::ostream& out) {
  if (a.scores.size() != 2) throw InputError("train-fusion: --scores needs <train.csv> <val.csv>");
  const io::ScoreTable train = io::read_score_table(a.scores[0]);
  const io::ScoreTable val = io::read_score_table(a.scores[1]);
  if (!train.labels || !val.labels) throw InputError("train-fusion: score files need a 'label' column");
  if (train.model_ids != val.model_ids) {
    throw InputError("train-fusion: train and validation model columns differ");
  }
  FusionFitOptions opts;
  opts.degree = a.degree;
  opts.model_ids = train.model_ids;
  opts.threads = threads;
  if (!a.lambda_grid.empty()) opts.lambda_grid = a.lambda_grid;
  const FusionFit fit = fit_fusion(train.scores, *train.labels, val.scores, *val.labels, opts);
  io::write_text(a.out, io::dump(io::fusion_to_json(fit.model)));
  out << "lambda " << fit.model.reg_lambda << ", validation AUC " << fit.validation_auc << " -> "
      << a.out << "\n";
}

void score_command(const ScoreArgs& a, std::ostream& out) {
  const FusionModel model =
      io::fusion_from_json(io::parse_json_text(io::read_text(a.fusion), a.fusion));
  const io::ScoreTable table = io::read_score_table(a.scores);
  if (table.model_ids != model.model_ids) {
    throw InputError("score: score columns do not match the fusion model's model_ids");
  }
  std::vector<double> fused;
  fused.reserve(table.scores.size());
  for (const auto& row : table.scores) fused.push_back(apply_fusion(model, row));
  io::write_text(a.out, io::fused_scores_to_csv(table.videos, fused));
  if (a.print_auc) {
    if (!table.labels) throw InputError("score: --auc needs a 'label' column");
    out << "AUC " << auc(fused, *table.labels) << "\n";
  }
}

void synth_command(const SynthArgs& a, unsigned threads, std::ostream& out) {
  io::CorpusConfig cfg = io::corpus_config_from_json(
      io::parse_json_text(io::read_text(a.config), a.config));
  if (const char* seed = std::getenv("SEGLOCK_SEED")) {
    try {
      std::size_t used = 0;
      cfg.truth.seed = std::stoull(seed, &used);
      if (used != std::string(seed).size()) throw std::invalid_argument(seed);
    } catch (const std::exception&) {
      throw InputError(std::string("SEGLOCK_SEED is not an unsigned integer: ") + seed);
    }
  }
  const fs::path dir(a.out_dir);
  const auto truth = synth_truth(cfg.truth, threads);
  io::write_manifest(dir / "manifest.json", truth);

  const auto models = synth_predictions(truth, cfg.models, cfg.noise, cfg.truth.seed, threads);
  for (const auto& m : models) {
    io::ProposalFile file{m.model.name, to_string(m.model.space), m.predictions};
    io::write_proposals(dir / "proposals" / (m.model.name + ".json"), file);

    std::vector<io::GridRecord> grids(truth.size());
    parallel_for(truth.size(), threads, [&](std::size_t v) {
      const auto& segs = m.predictions.at(truth[v].video_id);
      grids[v] = {truth[v].video_id, m.model.space,
                  rasterize(segs, truth[v].duration, cfg.resolution, m.model.space)};
    });
    io::write_text(dir / "grids" / (m.model.name + ".json"), io::dump(io::grids_to_json(grids)));
  }
  out << "wrote " << truth.size() << " videos and " << models.size() << " models to " << a.out_dir
      << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Segment-level deepfake localization toolkit", "seglock"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  DecodeArgs decode;
  auto* decode_cmd = app.add_subcommand("decode", "Decode frame grids into segment proposals");
  decode_cmd->add_option("--grid", decode.grids, "Frame grid files (.json or .csv)")->required();
  decode_cmd->add_option("--truth", decode.truth, "Manifest with video durations")->required();
  decode_cmd->add_option("--space", decode.space, "Score space override")
      ->check(CLI::IsMember({"probability", "logit"}));
  decode_cmd->add_option("--model", decode.model, "Model name (default: grid file stem)");
  decode_cmd->add_option("--out", decode.out, "Output proposal file")->required();
  decode_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  FuseArgs fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Joint Soft-NMS over several proposal files");
  fuse_cmd->add_option("--proposals", fuse.proposals, "Proposal files")->required();
  fuse_cmd->add_option("--sigma", fuse.sigma, "Gaussian decay parameter")->capture_default_str()
      ->check(CLI::PositiveNumber);
  fuse_cmd->add_option("--pre-threshold", fuse.pre_threshold, "Drop proposals scoring below")->capture_default_str();
  fuse_cmd->add_option("--max-output", fuse.max_output, "Cap on kept proposals per video (0 = none)");
  fuse_cmd->add_option("--model", fuse.model, "Model name for the output")->capture_default_str();
  fuse_cmd->add_option("--out", fuse.out, "Output proposal file")->required();
  fuse_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "AP@IoU, AR@N and overall score");
  eval_cmd->add_option("--proposals", eval.proposals, "Proposal file")->required();
  eval_cmd->add_option("--truth", eval.truth, "Manifest")->required();
  eval_cmd->add_option("--report", eval.report, "Output report JSON")->required();
  eval_cmd->add_flag("--table", eval.table, "Print a text table");
  eval_cmd->add_option("--label", eval.label, "Row label for the table");
  eval_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train-fusion", "Fit polynomial logistic score fusion");
  train_cmd->add_option("--scores", train.scores, "<train.csv> <val.csv>")->required()->expected(2);
  train_cmd->add_option("--out", train.out, "Output fusion model JSON")->required();
  train_cmd->add_option("--degree", train.degree, "Polynomial degree")->capture_default_str()->check(CLI::Range(1, 6));
  train_cmd->add_option("--lambda-grid", train.lambda_grid, "Regularization values to search");
  train_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Apply a fusion model to a score table");
  score_cmd->add_option("--fusion", score.fusion, "Fusion model JSON")->required();
  score_cmd->add_option("--scores", score.scores, "Score CSV")->required();
  score_cmd->add_option("--out", score.out, "Output CSV")->required();
  score_cmd->add_flag("--auc", score.print_auc, "Print AUC when labels are present");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a reproducible synthetic corpus");
  synth_cmd->add_option("--config", synth.config, "Synthetic corpus config JSON")->required();
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (*decode_cmd) decode_command(decode, threads, out);
    if (*fuse_cmd) fuse_command(fuse, threads, out);
    if (*eval_cmd) eval_command(eval, threads, out);
    if (*train_cmd) train_command(train, threads, out);
    if (*score_cmd) score_command(score, out);
    if (*synth_cmd) synth_command(synth, threads, out);
  } catch (const MetricUndefined& e) {
    err << "error: " << e.what() << "\n";
    return kMetricUndefined;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

}  // namespace seglock::cli
