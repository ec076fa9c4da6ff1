#pragma once

// File formats. All JSON writers emit sorted keys, two-space indentation and
// shortest round-trip decimals, so equal inputs give byte-identical files.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seglock/core.hpp"
#include "seglock/fuse.hpp"
#include "seglock/metrics.hpp"
#include "seglock/oracle.hpp"

namespace seglock::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Manifest: [{"video", "duration_s", "modality", "fake_segments": [{"start","end"}]}]
std::vector<VideoAnnotation> manifest_from_json(const json& doc);
json manifest_to_json(const std::vector<VideoAnnotation>& annotations);
std::vector<VideoAnnotation> read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const std::vector<VideoAnnotation>& annotations);
TruthSet to_truth_set(const std::vector<VideoAnnotation>& annotations);

// Frame grid: header (video, resolution_s, n_frames, score_space) plus rows
// (frame_index, logit, start_offset_s, end_offset_s, valid).
struct GridRecord {
  std::string video;
  ScoreSpace space = ScoreSpace::Probability;
  FrameGrid grid;
};

/// JSON: one grid object or an array of them. Each object carries the header
/// fields and "frames": [{"frame_index", "logit", "start_offset_s",
/// "end_offset_s", "valid"}].
std::vector<GridRecord> grids_from_json(const json& doc);
json grids_to_json(const std::vector<GridRecord>& grids);

/// CSV: a header line "video,resolution_s,n_frames,score_space", its value
/// line, the column line "frame_index,logit,start_offset_s,end_offset_s,valid"
/// and one row per frame. Several blocks may be concatenated.
std::vector<GridRecord> grids_from_csv(const std::string& text);
std::string grids_to_csv(const std::vector<GridRecord>& grids);

/// Dispatches on the .csv extension, JSON otherwise.
std::vector<GridRecord> read_grids(const fs::path& path);

// Proposals: {"model", "score_space", "videos": {id: [{"start","end","score"}]}}
struct ProposalFile {
  std::string model;
  std::string score_space;  // probability | logit | mixed
  PredictionSet videos;
};

ProposalFile proposals_from_json(const json& doc);
json proposals_to_json(const ProposalFile& file);
ProposalFile read_proposals(const fs::path& path);
void write_proposals(const fs::path& path, const ProposalFile& file);

/// {"format": "seglock-fusion", "version": 1, "model_ids", "means", "stds",
///  "degree", "coefficients", "bias", "reg_lambda"}
json fusion_to_json(const FusionModel& model);
FusionModel fusion_from_json(const json& doc);

/// {"ap": {"0.5": ..}, "ar": {"50": ..}, "auc": number|null, "overall": ..}
json report_to_json(const MetricReport& report);

// Score tables: video, one column per model, optional trailing "label" (0/1).
struct ScoreTable {
  std::vector<std::string> videos;
  std::vector<std::string> model_ids;
  ScoreMatrix scores;
  std::optional<std::vector<bool>> labels;
};

ScoreTable score_table_from_csv(const std::string& text);
ScoreTable read_score_table(const fs::path& path);
std::string fused_scores_to_csv(const std::vector<std::string>& videos,
                                const std::vector<double>& scores);

/// Synthetic corpus settings; every key is optional.
struct CorpusConfig {
  SynthConfig truth;
  PredictionNoise noise;
  double resolution = 0.04;
  std::vector<ModelSpec> models{{"audio_logit", ScoreSpace::Logit},
                                {"audio_prob", ScoreSpace::Probability},
                                {"visual_prob", ScoreSpace::Probability}};
};
CorpusConfig corpus_config_from_json(const json& doc);

json parse_json_text(const std::string& text, const std::string& origin);
std::string read_text(const fs::path& path);
/// Writes `text` to `path`, creating parent directories.
void write_text(const fs::path& path, const std::string& text);
std::string dump(const json& doc);

}  // namespace seglock::io
