#include "seglock/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace seglock::io {
namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + ": expected a JSON object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw InputError(where + ": missing field '" + key + "'");
  return *it;
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) throw InputError(where + ": field '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InputError(where + ": field '" + key + "' must be finite");
  return x;
}

std::string text(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw InputError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> number_array(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_array()) throw InputError(where + ": field '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw InputError(where + ": '" + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& token, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size() || !std::isfinite(v)) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw InputError(where + ": '" + token + "' is not a finite number");
  }
}

bool parse_flag(const std::string& token, const std::string& where) {
  if (token == "1" || token == "true") return true;
  if (token == "0" || token == "false") return false;
  throw InputError(where + ": '" + token + "' is not a boolean (0/1/true/false)");
}

std::string format_double(double v) {
  return json(v).dump();  // shortest round-trip form
}

GridRecord build_grid(const std::string& video, double resolution, std::size_t n_frames,
                      ScoreSpace space, std::vector<double> logits, std::vector<double> starts,
                      std::vector<double> ends, std::vector<bool> valid,
                      const std::string& where) {
  if (logits.size() != n_frames) {
    throw InputError(where + ": n_frames is " + std::to_string(n_frames) + " but " +
                     std::to_string(logits.size()) + " frame rows were given");
  }
  for (std::size_t i = 0; i < n_frames; ++i) {
    if (valid[i] && (starts[i] < 0.0 || ends[i] < 0.0)) {
      throw InputError(where + ": frame_index " + std::to_string(i) +
                       " has a negative offset");
    }
  }
  try {
    return {video, space,
            FrameGrid(resolution, std::move(logits), std::move(starts), std::move(ends),
                      std::move(valid))};
  } catch (const InputError& e) {
    throw InputError(where + ": " + e.what());
  }
}

GridRecord grid_from_object(const json& obj, const std::string& where_in) {
  const std::string video = text(obj, "video", where_in);
  const std::string where = where_in + " video '" + video + "'";
  const double resolution = number(obj, "resolution_s", where);
  const json& nf = field(obj, "n_frames", where);
  if (!nf.is_number_integer() || nf.get<long long>() < 0) {
    throw InputError(where + ": n_frames must be a non-negative integer");
  }
  const auto n = static_cast<std::size_t>(nf.get<long long>());
  const ScoreSpace space = parse_score_space(text(obj, "score_space", where));
  const json& frames = field(obj, "frames", where);
  if (!frames.is_array()) throw InputError(where + ": 'frames' must be an array");

  std::vector<double> logits, starts, ends;
  std::vector<bool> valid;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string fw = where + " frames[" + std::to_string(i) + "]";
    const json& row = frames[i];
    const json& idx = field(row, "frame_index", fw);
    if (!idx.is_number_integer() || idx.get<long long>() != static_cast<long long>(i)) {
      throw InputError(fw + ": frame_index must be contiguous from 0 (expected " +
                       std::to_string(i) + ")");
    }
    logits.push_back(number(row, "logit", fw));
    starts.push_back(number(row, "start_offset_s", fw));
    ends.push_back(number(row, "end_offset_s", fw));
    const json& v = field(row, "valid", fw);
    if (!v.is_boolean()) throw InputError(fw + ": 'valid' must be a boolean");
    valid.push_back(v.get<bool>());
  }
  return build_grid(video, resolution, n, space, std::move(logits), std::move(starts),
                    std::move(ends), std::move(valid), where);
}

}  // namespace

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json parse_json_text(const std::string& body, const std::string& origin) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw InputError(origin + ": invalid JSON (" + e.what() + ")");
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << body;
}

// ---------------------------------------------------------------------------
// Manifest

std::vector<VideoAnnotation> manifest_from_json(const json& doc) {
  if (!doc.is_array()) throw InputError("manifest: top level must be an array");
  std::vector<VideoAnnotation> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "manifest[" + std::to_string(i) + "]";
    VideoAnnotation ann;
    ann.video_id = text(doc[i], "video", where);
    ann.duration = number(doc[i], "duration_s", where);
    ann.modality = parse_modality(text(doc[i], "modality", where));
    const json& segs = field(doc[i], "fake_segments", where);
    if (!segs.is_array()) throw InputError(where + ": 'fake_segments' must be an array");
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const std::string sw = where + ".fake_segments[" + std::to_string(k) + "]";
      ann.fake_segments.push_back({number(segs[k], "start", sw), number(segs[k], "end", sw), 1.0});
    }
    ann.validate();
    out.push_back(std::move(ann));
  }
  return out;
}

json manifest_to_json(const std::vector<VideoAnnotation>& annotations) {
  json doc = json::array();
  for (const auto& ann : annotations) {
    json segs = json::array();
    for (const auto& s : ann.fake_segments) segs.push_back({{"start", s.start}, {"end", s.end}});
    doc.push_back({{"video", ann.video_id},
                   {"duration_s", ann.duration},
                   {"modality", to_string(ann.modality)},
                   {"fake_segments", segs}});
  }
  return doc;
}

std::vector<VideoAnnotation> read_manifest(const fs::path& path) {
  return manifest_from_json(parse_json_text(read_text(path), path.string()));
}

void write_manifest(const fs::path& path, const std::vector<VideoAnnotation>& annotations) {
  write_text(path, dump(manifest_to_json(annotations)));
}

TruthSet to_truth_set(const std::vector<VideoAnnotation>& annotations) {
  TruthSet truth;
  for (const auto& ann : annotations) {
    if (!truth.emplace(ann.video_id, ann).second) {
      throw InputError("manifest: duplicate video '" + ann.video_id + "'");
    }
  }
  return truth;
}

// ---------------------------------------------------------------------------
// Frame grids

std::vector<GridRecord> grids_from_json(const json& doc) {
  std::vector<GridRecord> out;
  if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      out.push_back(grid_from_object(doc[i], "grid[" + std::to_string(i) + "]"));
    }
  } else {
    out.push_back(grid_from_object(doc, "grid"));
  }
  return out;
}

json grids_to_json(const std::vector<GridRecord>& grids) {
  json doc = json::array();
  for (const auto& rec : grids) {
    json frames = json::array();
    const FrameGrid& g = rec.grid;
    for (std::size_t i = 0; i < g.n_frames(); ++i) {
      frames.push_back({{"frame_index", i},
                        {"logit", g.scores()[i]},
                        {"start_offset_s", g.start_offsets()[i]},
                        {"end_offset_s", g.end_offsets()[i]},
                        {"valid", static_cast<bool>(g.valid()[i])}});
    }
    doc.push_back({{"video", rec.video},
                   {"resolution_s", g.resolution()},
                   {"n_frames", g.n_frames()},
                   {"score_space", to_string(rec.space)},
                   {"frames", frames}});
  }
  return doc;
}

std::vector<GridRecord> grids_from_csv(const std::string& body) {
  std::vector<std::string> lines;
  {
    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line)) lines.push_back(trim(line));
  }
  std::vector<GridRecord> out;
  std::size_t i = 0;
  const auto where = [&](std::size_t line) { return "grid csv line " + std::to_string(line + 1); };
  while (i < lines.size()) {
    if (lines[i].empty()) {
      ++i;
      continue;
    }
    if (lines[i] != "video,resolution_s,n_frames,score_space") {
      throw InputError(where(i) + ": expected header 'video,resolution_s,n_frames,score_space'");
    }
    if (i + 2 >= lines.size()) throw InputError(where(i) + ": truncated grid header");
    const auto head = split(lines[i + 1], ',');
    if (head.size() != 4) throw InputError(where(i + 1) + ": expected 4 header values");
    const std::string video = head[0];
    const double resolution = parse_double(head[1], where(i + 1) + " resolution_s");
    const double nf = parse_double(head[2], where(i + 1) + " n_frames");
    if (nf < 0 || nf != std::floor(nf)) {
      throw InputError(where(i + 1) + ": n_frames must be a non-negative integer");
    }
    const auto n = static_cast<std::size_t>(nf);
    const ScoreSpace space = parse_score_space(head[3]);
    if (lines[i + 2] != "frame_index,logit,start_offset_s,end_offset_s,valid") {
      throw InputError(where(i + 2) +
                       ": expected columns 'frame_index,logit,start_offset_s,end_offset_s,valid'");
    }
    i += 3;
    std::vector<double> logits, starts, ends;
    std::vector<bool> valid;
    while (i < lines.size() && !lines[i].empty() && lines[i].rfind("video,", 0) != 0) {
      const auto cols = split(lines[i], ',');
      if (cols.size() != 5) throw InputError(where(i) + ": expected 5 columns");
      const double idx = parse_double(cols[0], where(i) + " frame_index");
      if (idx != static_cast<double>(logits.size())) {
        throw InputError(where(i) + ": frame_index must be contiguous from 0 (expected " +
                         std::to_string(logits.size()) + ")");
      }
      logits.push_back(parse_double(cols[1], where(i) + " logit"));
      starts.push_back(parse_double(cols[2], where(i) + " start_offset_s"));
      ends.push_back(parse_double(cols[3], where(i) + " end_offset_s"));
      valid.push_back(parse_flag(cols[4], where(i) + " valid"));
      ++i;
    }
    out.push_back(build_grid(video, resolution, n, space, std::move(logits), std::move(starts),
                             std::move(ends), std::move(valid), "grid csv video '" + video + "'"));
  }
  return out;
}

std::string grids_to_csv(const std::vector<GridRecord>& grids) {
  std::ostringstream out;
  for (const auto& rec : grids) {
    const FrameGrid& g = rec.grid;
    out << "video,resolution_s,n_frames,score_space\n"
        << rec.video << ',' << format_double(g.resolution()) << ',' << g.n_frames() << ','
        << to_string(rec.space) << "\n"
        << "frame_index,logit,start_offset_s,end_offset_s,valid\n";
    for (std::size_t i = 0; i < g.n_frames(); ++i) {
      out << i << ',' << format_double(g.scores()[i]) << ','
          << format_double(g.start_offsets()[i]) << ',' << format_double(g.end_offsets()[i])
          << ',' << (g.valid()[i] ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::vector<GridRecord> read_grids(const fs::path& path) {
  const std::string body = read_text(path);
  try {
    if (path.extension() == ".csv") return grids_from_csv(body);
    return grids_from_json(parse_json_text(body, path.string()));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Proposals

ProposalFile proposals_from_json(const json& doc) {
  ProposalFile file;
  file.model = text(doc, "model", "proposals");
  file.score_space = text(doc, "score_space", "proposals");
  if (file.score_space != "probability" && file.score_space != "logit" &&
      file.score_space != "mixed") {
    throw InputError("proposals: unknown score_space '" + file.score_space + "'");
  }
  const json& videos = field(doc, "videos", "proposals");
  if (!videos.is_object()) throw InputError("proposals: 'videos' must be an object");
  for (const auto& [id, segs] : videos.items()) {
    const std::string where = "proposals video '" + id + "'";
    if (!segs.is_array()) throw InputError(where + ": expected an array of segments");
    auto& list = file.videos[id];
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const std::string sw = where + "[" + std::to_string(k) + "]";
      Segment s{number(segs[k], "start", sw), number(segs[k], "end", sw),
                number(segs[k], "score", sw)};
      if (s.start < 0.0) throw InputError(sw + ": start must be >= 0");
      try {
        validate(s);
      } catch (const InputError& e) {
        throw InputError(sw + ": " + e.what());
      }
      list.push_back(s);
    }
  }
  return file;
}

json proposals_to_json(const ProposalFile& file) {
  json videos = json::object();
  for (const auto& [id, segs] : file.videos) {
    json list = json::array();
    for (const auto& s : segs) list.push_back({{"start", s.start}, {"end", s.end}, {"score", s.score}});
    videos[id] = list;
  }
  return {{"model", file.model}, {"score_space", file.score_space}, {"videos", videos}};
}

ProposalFile read_proposals(const fs::path& path) {
  try {
    return proposals_from_json(parse_json_text(read_text(path), path.string()));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_proposals(const fs::path& path, const ProposalFile& file) {
  write_text(path, dump(proposals_to_json(file)));
}

// ---------------------------------------------------------------------------
// Fusion model and reports

json fusion_to_json(const FusionModel& m) {
  return {{"format", "seglock-fusion"},
          {"version", 1},
          {"model_ids", m.model_ids},
          {"means", m.means},
          {"stds", m.stds},
          {"degree", m.degree},
          {"coefficients", m.coefficients},
          {"bias", m.bias},
          {"reg_lambda", m.reg_lambda}};
}

FusionModel fusion_from_json(const json& doc) {
  const std::string where = "fusion model";
  if (text(doc, "format", where) != "seglock-fusion") throw InputError(where + ": wrong format tag");
  if (number(doc, "version", where) != 1.0) throw InputError(where + ": unsupported version");
  FusionModel m;
  const json& ids = field(doc, "model_ids", where);
  if (!ids.is_array()) throw InputError(where + ": 'model_ids' must be an array");
  for (const auto& id : ids) {
    if (!id.is_string()) throw InputError(where + ": model_ids must be strings");
    m.model_ids.push_back(id.get<std::string>());
  }
  m.means = number_array(doc, "means", where);
  m.stds = number_array(doc, "stds", where);
  m.degree = static_cast<int>(number(doc, "degree", where));
  m.coefficients = number_array(doc, "coefficients", where);
  m.bias = number(doc, "bias", where);
  m.reg_lambda = number(doc, "reg_lambda", where);
  const std::size_t mcount = m.model_ids.size();
  if (m.means.size() != mcount || m.stds.size() != mcount) {
    throw InputError(where + ": means/stds length differs from model_ids");
  }
  for (double s : m.stds) {
    if (!(s > 0.0)) throw InputError(where + ": stds must be positive");
  }
  if (m.degree < 1 || m.coefficients.size() != poly_feature_count(mcount, m.degree)) {
    throw InputError(where + ": coefficient count does not match degree and model count");
  }
  return m;
}

json report_to_json(const MetricReport& report) {
  json ap = json::object();
  for (const auto& [t, v] : report.ap) ap[json(t).dump()] = v;
  json ar = json::object();
  for (const auto& [n, v] : report.ar) ar[std::to_string(n)] = v;
  return {{"ap", ap},
          {"ar", ar},
          {"auc", report.auc ? json(*report.auc) : json(nullptr)},
          {"overall", report.overall}};
}

// ---------------------------------------------------------------------------
// Score tables

ScoreTable score_table_from_csv(const std::string& body) {
  std::istringstream in(body);
  std::string line;
  std::size_t line_no = 0;
  ScoreTable table;
  bool has_label = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    const std::string where = "scores csv line " + std::to_string(line_no);
    if (table.model_ids.empty() && !has_label) {
      if (cols.size() < 2 || trim(cols[0]) != "video") {
        throw InputError(where + ": header must start with 'video' and name model columns");
      }
      std::size_t last = cols.size();
      if (trim(cols.back()) == "label") {
        has_label = true;
        --last;
      }
      for (std::size_t c = 1; c < last; ++c) table.model_ids.push_back(trim(cols[c]));
      if (table.model_ids.empty()) throw InputError(where + ": no model columns");
      if (has_label) table.labels.emplace();
      continue;
    }
    const std::size_t expected = 1 + table.model_ids.size() + (has_label ? 1 : 0);
    if (cols.size() != expected) {
      throw InputError(where + ": expected " + std::to_string(expected) + " columns");
    }
    table.videos.push_back(trim(cols[0]));
    std::vector<double> row;
    for (std::size_t c = 0; c < table.model_ids.size(); ++c) {
      row.push_back(parse_double(trim(cols[c + 1]), where + " column '" + table.model_ids[c] + "'"));
    }
    table.scores.push_back(std::move(row));
    if (has_label) table.labels->push_back(parse_flag(trim(cols.back()), where + " label"));
  }
  if (table.model_ids.empty()) throw InputError("scores csv: missing header");
  return table;
}

ScoreTable read_score_table(const fs::path& path) {
  try {
    return score_table_from_csv(read_text(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string fused_scores_to_csv(const std::vector<std::string>& videos,
                                const std::vector<double>& scores) {
  std::ostringstream out;
  out << "video,score\n";
  for (std::size_t i = 0; i < videos.size(); ++i) out << videos[i] << ',' << format_double(scores[i]) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Synthetic corpus configuration

CorpusConfig corpus_config_from_json(const json& doc) {
  const std::string where = "synth config";
  if (!doc.is_object()) throw InputError(where + ": expected a JSON object");
  CorpusConfig cfg;
  auto& t = cfg.truth;
  if (doc.contains("n_videos")) {
    const double n = number(doc, "n_videos", where);
    if (n < 0 || n != std::floor(n)) throw InputError(where + ": n_videos must be a count");
    t.n_videos = static_cast<std::size_t>(n);
  }
  if (doc.contains("duration_range")) {
    const auto r = number_array(doc, "duration_range", where);
    if (r.size() != 2) throw InputError(where + ": duration_range needs two values");
    t.min_duration = r[0];
    t.max_duration = r[1];
  }
  if (doc.contains("segments_per_video")) {
    const auto r = number_array(doc, "segments_per_video", where);
    if (r.size() != 2) throw InputError(where + ": segments_per_video needs two values");
    t.min_segments = static_cast<int>(r[0]);
    t.max_segments = static_cast<int>(r[1]);
  }
  if (doc.contains("segment_duration_mean")) t.segment_duration_mean = number(doc, "segment_duration_mean", where);
  if (doc.contains("segment_duration_min")) t.segment_duration_min = number(doc, "segment_duration_min", where);
  if (doc.contains("modality_mix")) {
    const json& mix = field(doc, "modality_mix", where);
    t.modality_mix = {0.0, 0.0, 0.0, 0.0};
    for (const auto& [key, value] : mix.items()) {
      if (!value.is_number()) throw InputError(where + ": modality_mix values must be numbers");
      t.modality_mix[static_cast<std::size_t>(parse_modality(key))] = value.get<double>();
    }
  }
  if (doc.contains("seed")) {
    const json& s = field(doc, "seed", where);
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      throw InputError(where + ": seed must be a non-negative integer");
    }
    t.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("resolution_s")) cfg.resolution = number(doc, "resolution_s", where);
  if (doc.contains("jitter_std")) cfg.noise.jitter_std = number(doc, "jitter_std", where);
  if (doc.contains("noise_rate")) cfg.noise.noise_rate = number(doc, "noise_rate", where);
  if (doc.contains("miss_rate")) cfg.noise.miss_rate = number(doc, "miss_rate", where);
  if (doc.contains("models")) {
    const json& models = field(doc, "models", where);
    if (!models.is_array() || models.empty()) throw InputError(where + ": 'models' must be a non-empty array");
    cfg.models.clear();
    for (const auto& m : models) {
      cfg.models.push_back({text(m, "name", where + " model"),
                            parse_score_space(text(m, "score_space", where + " model"))});
    }
  }
  if (!(cfg.resolution > 0.0)) throw InputError(where + ": resolution_s must be positive");
  t.validate();
  return cfg;
}

}  // namespace seglock::io
