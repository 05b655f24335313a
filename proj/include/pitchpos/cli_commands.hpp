#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pitchpos/registration.hpp"
#include "pitchpos/synth.hpp"

namespace pitchpos {

/// One flat configuration for the whole pipeline; every key can come from a
/// key=value config file, with command-line flags taking precedence.
struct PipelineConfig {
  double field_length = 105.0;
  double field_width = 68.0;

  std::string preset = "wc14-base";
  int db_count = 50000;
  std::uint64_t seed = 1;

  double tau = 0.35;
  double rho = 3.0;
  double zeta = 0.3;
  double n_cls = 0.2;
  double q = 0.8;
  std::string agg = "best_q";

  DescriptorConfig descriptor;
  RefinementParams refinement;
  int render_w = 1280;
  int render_h = 720;
  double line_width = 2.0;
  int candidates = 3;
  int coarse_scale = 4;

  double eps_lo = 0.01, eps_hi = 0.5, eps_step = 0.01;
  int team_sample_frames = 20;

  int image_w = 1280;
  int image_h = 720;
  unsigned threads = 0;

  MatchConfig synth;
  NoiseConfig noise;
  bool synth_emit_edges = true;

  FieldTemplate field() const { return standard_field(field_length, field_width); }
};

/// Applies config-file entries onto cfg; unknown keys raise
/// std::runtime_error so typos never pass silently.
void apply_config_map(PipelineConfig& cfg, const std::map<std::string, std::string>& kv);

PipelineConfig load_pipeline_config(const std::string& path);

// Command bodies shared between the CLI binary and the integration tests.
// Each throws on malformed input; the CLI turns that into a nonzero exit.

void cmd_builddb(const PipelineConfig& cfg, const std::string& out_path);

void cmd_register(const PipelineConfig& cfg, const std::string& db_path,
                  const std::string& edges_dir, const std::string& out_csv, bool refine);

void cmd_shots(const PipelineConfig& cfg, const std::string& homography_csv,
               const std::string& shots_csv, const std::string& out_csv);

void cmd_extract(const PipelineConfig& cfg, const std::string& detections_jsonl,
                 const std::string& homography_csv, const std::string& out_jsonl);

void cmd_teams(const PipelineConfig& cfg, const std::string& positions_jsonl,
               const std::string& colors_jsonl, const std::string& out_jsonl);

struct EvalMatchInput {
  std::string label;
  std::string positions_jsonl;
  std::string gt_csv;
  std::string homography_csv;
};

void cmd_eval(const PipelineConfig& cfg, const std::vector<EvalMatchInput>& matches,
              const std::string& out_csv, const std::string& histogram_svg = "");

void cmd_synth(const PipelineConfig& cfg, const std::string& out_dir);

}  // namespace pitchpos
