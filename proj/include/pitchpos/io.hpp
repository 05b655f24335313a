#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pitchpos/camera.hpp"
#include "pitchpos/evaluation.hpp"
#include "pitchpos/geometry.hpp"
#include "pitchpos/projection.hpp"
#include "pitchpos/team_assignment.hpp"

namespace pitchpos {

// All emitted numeric text uses 6 significant digits with '.' as the decimal
// separator, locale-independent.
std::string fmt6(double v);

// --- homography CSV: "frame,h11,...,h33", canonicalized; failed frames ---
// --- carry nan entries ---------------------------------------------------
struct HomographyRow {
  int frame = 0;
  std::optional<Homography> h;  // nullopt = failed registration
};

void write_homography_csv(const std::vector<HomographyRow>& rows, const std::string& path);
std::vector<HomographyRow> read_homography_csv(const std::string& path);

// --- pose CSV: "x,y,z,focal,pan,tilt" ------------------------------------
void write_pose_csv(const std::vector<CameraPose>& poses, const std::string& path);
std::vector<CameraPose> read_pose_csv(const std::string& path);

// --- detections JSONL: {frame, x1, y1, x2, y2, confidence} ----------------
void write_detections_jsonl(const std::vector<Detection>& dets, const std::string& path);
std::vector<Detection> read_detections_jsonl(const std::string& path);

// --- color features JSONL: {frame, detection_id, h, s, v} -----------------
struct ColorRow {
  int frame = 0;
  int detection_id = 0;
  double h = 0, s = 0, v = 0;
};

void write_colors_jsonl(const std::vector<ColorRow>& rows, const std::string& path);
std::vector<ColorRow> read_colors_jsonl(const std::string& path);

// --- positions JSONL: {frame, sv, players:[{x, y, team, det}]} ------------
void write_positions_jsonl(const std::vector<FrameEstimate>& frames, const std::string& path);
std::vector<FrameEstimate> read_positions_jsonl(const std::string& path);

// --- ground truth CSV: "frame,player_id,team,x,y" (team A|B|R) ------------
void write_gt_csv(const std::vector<GroundTruthFrame>& frames, const std::string& path);
std::vector<GroundTruthFrame> read_gt_csv(const std::string& path);

// --- shot CSV in: "start,end"; out: "start,end,score,label" ---------------
struct ShotRange {
  int start = 0;
  int end = 0;
};

std::vector<ShotRange> read_shots_csv(const std::string& path);

struct ShotResultRow {
  int start = 0;
  int end = 0;
  double score = 0.0;
  bool main_camera = false;
};

void write_shot_results_csv(const std::vector<ShotResultRow>& rows, const std::string& path);

// --- metrics report CSV ----------------------------------------------------
void write_report_csv(const std::vector<MetricsReport>& reports, const std::string& path);

// --- flat key=value configuration files; '#' starts a comment --------------
std::map<std::string, std::string> read_config_file(const std::string& path);

}  // namespace pitchpos
