#pragma once

// Drives synth -> decode -> fuse -> eval through the command-line entry point.

#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seglock/cli.hpp"
#include "seglock/io.hpp"

namespace seglock::testing {

namespace fs = std::filesystem;

struct CliResult {
  int code = 0;
  std::string out, err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

inline fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("seglock_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct PipelineRun {
  io::json report;
  std::string report_text;
  std::string fused_text;
  std::vector<std::string> decoded_text;
};

/// Runs the full pipeline in `dir` with the given synth config. Throws on any
/// non-zero exit status.
inline PipelineRun run_pipeline(const fs::path& dir, const io::json& config, unsigned threads) {
  const auto check = [](const CliResult& r, const std::string& step) {
    if (r.code != 0) throw std::runtime_error(step + " failed: " + r.err);
  };
  const std::string t = std::to_string(threads);
  io::write_text(dir / "config.json", io::dump(config));
  check(run_cli({"synth", "--config", (dir / "config.json").string(), "--out-dir",
                 (dir / "corpus").string(), "--threads", t}),
        "synth");

  PipelineRun run;
  std::vector<std::string> fuse_args{"fuse", "--proposals"};
  const auto models = io::corpus_config_from_json(config).models;
  for (const auto& m : models) {
    const fs::path decoded = dir / "decoded" / (m.name + ".json");
    check(run_cli({"decode", "--grid", (dir / "corpus" / "grids" / (m.name + ".json")).string(),
                   "--truth", (dir / "corpus" / "manifest.json").string(), "--model", m.name,
                   "--out", decoded.string(), "--threads", t}),
          "decode " + m.name);
    run.decoded_text.push_back(io::read_text(decoded));
    fuse_args.push_back(decoded.string());
  }
  const fs::path fused = dir / "fused.json";
  fuse_args.insert(fuse_args.end(), {"--out", fused.string(), "--threads", t});
  check(run_cli(fuse_args), "fuse");
  const fs::path report = dir / "report.json";
  check(run_cli({"eval", "--proposals", fused.string(), "--truth",
                 (dir / "corpus" / "manifest.json").string(), "--report", report.string(),
                 "--threads", t}),
        "eval");
  run.fused_text = io::read_text(fused);
  run.report_text = io::read_text(report);
  run.report = io::parse_json_text(run.report_text, report.string());
  return run;
}

}  // namespace seglock::testing
