#include "pitchpos/cli_commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

#include "pitchpos/evaluation.hpp"
#include "pitchpos/io.hpp"
#include "pitchpos/parallel.hpp"
#include "pitchpos/shot_classifier.hpp"

namespace pitchpos {

namespace fs = std::filesystem;

void apply_config_map(PipelineConfig& cfg, const std::map<std::string, std::string>& kv) {
  auto as_double = [](const std::string& v) { return std::stod(v); };
  auto as_int = [](const std::string& v) { return std::stoi(v); };
  auto as_u64 = [](const std::string& v) { return static_cast<std::uint64_t>(std::stoull(v)); };
  auto as_bool = [](const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw std::runtime_error("expected boolean, got '" + v + "'");
  };

  for (const auto& [key, value] : kv) {
    try {
      if (key == "field_length") cfg.field_length = as_double(value);
      else if (key == "field_width") cfg.field_width = as_double(value);
      else if (key == "preset") cfg.preset = value;
      else if (key == "db_count") cfg.db_count = as_int(value);
      else if (key == "seed") cfg.seed = as_u64(value);
      else if (key == "tau") cfg.tau = as_double(value);
      else if (key == "rho") cfg.rho = value == "inf" ? std::numeric_limits<double>::infinity() : as_double(value);
      else if (key == "zeta") cfg.zeta = as_double(value);
      else if (key == "n_cls") cfg.n_cls = as_double(value);
      else if (key == "q") cfg.q = as_double(value);
      else if (key == "agg") cfg.agg = value;
      else if (key == "descriptor_sigma") cfg.descriptor.sigma = as_double(value);
      else if (key == "descriptor_grid_w") cfg.descriptor.grid_w = as_int(value);
      else if (key == "descriptor_grid_h") cfg.descriptor.grid_h = as_int(value);
      else if (key == "descriptor_input_w") cfg.descriptor.input_w = as_int(value);
      else if (key == "descriptor_input_h") cfg.descriptor.input_h = as_int(value);
      else if (key == "render_w") cfg.render_w = as_int(value);
      else if (key == "render_h") cfg.render_h = as_int(value);
      else if (key == "line_width") cfg.line_width = as_double(value);
      else if (key == "candidates") cfg.candidates = as_int(value);
      else if (key == "coarse_scale") cfg.coarse_scale = as_int(value);
      else if (key == "refine_max_iterations") cfg.refinement.max_iterations = as_int(value);
      else if (key == "refine_convergence") cfg.refinement.convergence_threshold = as_double(value);
      else if (key == "refine_truncation") cfg.refinement.truncation = as_double(value);
      else if (key == "refine_damping") cfg.refinement.damping = as_double(value);
      else if (key == "refine_sample_step") cfg.refinement.sample_step_m = as_double(value);
      else if (key == "eps_lo") cfg.eps_lo = as_double(value);
      else if (key == "eps_hi") cfg.eps_hi = as_double(value);
      else if (key == "eps_step") cfg.eps_step = as_double(value);
      else if (key == "team_sample_frames") cfg.team_sample_frames = as_int(value);
      else if (key == "image_w") cfg.image_w = as_int(value);
      else if (key == "image_h") cfg.image_h = as_int(value);
      else if (key == "threads") cfg.threads = static_cast<unsigned>(as_int(value));
      else if (key == "synth_frames") cfg.synth.frames = as_int(value);
      else if (key == "synth_frame_rate") cfg.synth.frame_rate = as_double(value);
      else if (key == "synth_players_per_team") cfg.synth.players_per_team = as_int(value);
      else if (key == "synth_include_referee") cfg.synth.include_referee = as_bool(value);
      else if (key == "synth_referee_in_gt") cfg.synth.referee_in_gt = as_bool(value);
      else if (key == "synth_v_max") cfg.synth.v_max = as_double(value);
      else if (key == "synth_pan_min") cfg.synth.pan_min_deg = as_double(value);
      else if (key == "synth_pan_max") cfg.synth.pan_max_deg = as_double(value);
      else if (key == "synth_tilt_min") cfg.synth.tilt_min_deg = as_double(value);
      else if (key == "synth_tilt_max") cfg.synth.tilt_max_deg = as_double(value);
      else if (key == "synth_focal_min") cfg.synth.focal_min = as_double(value);
      else if (key == "synth_focal_max") cfg.synth.focal_max = as_double(value);
      else if (key == "synth_emit_edges") cfg.synth_emit_edges = as_bool(value);
      else if (key == "noise_anchor_sigma_px") cfg.noise.anchor_sigma_px = as_double(value);
      else if (key == "noise_dropout") cfg.noise.dropout_prob = as_double(value);
      else if (key == "noise_fp_rate") cfg.noise.false_positive_rate = as_double(value);
      else if (key == "noise_color_sigma") cfg.noise.color_sigma = as_double(value);
      else if (key == "noise_h_prob") cfg.noise.h_corruption_prob = as_double(value);
      else if (key == "noise_h_mag") cfg.noise.h_corruption_mag_m = as_double(value);
      else throw std::runtime_error("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("bad value for config key " + key + ": '" + value + "'");
    }
  }
  cfg.synth.field_length = cfg.field_length;
  cfg.synth.field_width = cfg.field_width;
  cfg.synth.image_w = cfg.image_w;
  cfg.synth.image_h = cfg.image_h;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  PipelineConfig cfg;
  apply_config_map(cfg, read_config_file(path));
  return cfg;
}

void cmd_builddb(const PipelineConfig& cfg, const std::string& out_path) {
  PoseDistributionConfig pd = preset_by_name(cfg.preset);
  pd.count = cfg.db_count;
  pd.seed = cfg.seed;
  const auto poses = sample_poses(pd);

  DbBuildConfig bc;
  bc.render_w = cfg.render_w;
  bc.render_h = cfg.render_h;
  bc.line_width = cfg.line_width;
  bc.descriptor = cfg.descriptor;
  bc.threads = cfg.threads;
  const FeatureDB db = build_feature_db(poses, cfg.field(), bc);
  save_feature_db(db, out_path);
  std::cout << "builddb: " << db.size() << " entries (" << db.excluded << " excluded) -> "
            << out_path << "\n";
}

void cmd_register(const PipelineConfig& cfg, const std::string& db_path,
                  const std::string& edges_dir, const std::string& out_csv, bool refine) {
  const FeatureDB db = load_feature_db(db_path);
  std::vector<std::pair<int, std::string>> frames;
  for (const auto& entry : fs::directory_iterator(edges_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
    try {
      frames.emplace_back(std::stoi(entry.path().stem().string()), entry.path().string());
    } catch (const std::exception&) {
      throw std::runtime_error("register: non-numeric frame file name: " + entry.path().string());
    }
  }
  if (frames.empty()) throw std::runtime_error("register: no .pgm frames in " + edges_dir);
  std::sort(frames.begin(), frames.end());

  RegisterFrameParams rp;
  rp.candidates = cfg.candidates;
  rp.refine = refine;
  rp.coarse_scale = cfg.coarse_scale;
  rp.refinement = cfg.refinement;
  const FieldTemplate field = cfg.field();

  std::vector<HomographyRow> rows(frames.size());
  parallel_for(frames.size(), [&](std::size_t i) {
    rows[i].frame = frames[i].first;
    const EdgeImage obs = read_pgm(frames[i].second);
    const RegisterFrameResult res = register_frame(db, obs, field, rp);
    if (res.ok) rows[i].h = res.h;
  }, cfg.threads);

  write_homography_csv(rows, out_csv);
  const auto failed = std::count_if(rows.begin(), rows.end(),
                                    [](const HomographyRow& r) { return !r.h.has_value(); });
  std::cout << "register: " << rows.size() << " frames, " << failed << " failed -> " << out_csv
            << "\n";
}

void cmd_shots(const PipelineConfig& cfg, const std::string& homography_csv,
               const std::string& shots_csv, const std::string& out_csv) {
  const auto rows = read_homography_csv(homography_csv);
  std::map<int, std::optional<Homography>> by_frame;
  for (const auto& r : rows) by_frame[r.frame] = r.h;

  std::vector<ShotResultRow> out;
  for (const auto& shot : read_shots_csv(shots_csv)) {
    ShotSegment seg;
    seg.start_frame = shot.start;
    seg.end_frame = shot.end;
    for (int t = shot.start; t <= shot.end; ++t) {
      const auto it = by_frame.find(t);
      seg.homographies.push_back(it == by_frame.end() ? std::nullopt : it->second);
    }
    const ShotScore score = shot_change_score(seg);
    out.push_back({shot.start, shot.end, score.mean_change,
                   classify_shot(score, cfg.tau) == ShotType::MainCamera});
  }
  write_shot_results_csv(out, out_csv);
  std::cout << "shots: " << out.size() << " shots -> " << out_csv << "\n";
}

void cmd_extract(const PipelineConfig& cfg, const std::string& detections_jsonl,
                 const std::string& homography_csv, const std::string& out_jsonl) {
  const auto dets = read_detections_jsonl(detections_jsonl);
  const auto rows = read_homography_csv(homography_csv);
  std::map<int, std::vector<Detection>> by_frame;
  for (const auto& d : dets) by_frame[d.frame].push_back(d);

  const FieldTemplate field = cfg.field();
  const SvConfig sv{cfg.rho};
  std::vector<FrameEstimate> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (!row.h) {
      // No registration: the frame cannot be projected and is discarded.
      FrameEstimate fe;
      fe.frame = row.frame;
      fe.sv_keep = false;
      out.push_back(fe);
      continue;
    }
    const auto it = by_frame.find(row.frame);
    static const std::vector<Detection> kNone;
    FrameEstimate fe = extract_frame_positions(it == by_frame.end() ? kNone : it->second,
                                               *row.h, field, sv);
    fe.frame = row.frame;
    out.push_back(fe);
  }
  write_positions_jsonl(out, out_jsonl);
  const auto discarded = std::count_if(out.begin(), out.end(),
                                       [](const FrameEstimate& f) { return !f.sv_keep; });
  std::cout << "extract: " << out.size() << " frames, " << discarded << " sv-discarded -> "
            << out_jsonl << "\n";
}

void cmd_teams(const PipelineConfig& cfg, const std::string& positions_jsonl,
               const std::string& colors_jsonl, const std::string& out_jsonl) {
  auto frames = read_positions_jsonl(positions_jsonl);
  const auto colors = read_colors_jsonl(colors_jsonl);

  MatchColorData data;
  data.frame.reserve(colors.size());
  data.feature.reserve(colors.size());
  for (const auto& c : colors) {
    data.frame.push_back(c.frame);
    data.feature.push_back(hsv_embed(c.h, c.s, c.v));
  }
  TeamClusterConfig tc;
  tc.n_cls = cfg.n_cls;
  tc.eps_lo = cfg.eps_lo;
  tc.eps_hi = cfg.eps_hi;
  tc.eps_step = cfg.eps_step;
  tc.sample_frames = cfg.team_sample_frames;
  tc.seed = cfg.seed;
  const auto labels = assign_teams(data, tc);

  std::map<std::pair<int, int>, TeamLabel> by_det;
  for (std::size_t i = 0; i < colors.size(); ++i) {
    by_det[{colors[i].frame, colors[i].detection_id}] = labels[i];
  }
  for (auto& fr : frames) {
    for (auto& p : fr.players) {
      const auto it = by_det.find({fr.frame, p.detection_id});
      if (it != by_det.end()) p.team = it->second;
    }
  }
  write_positions_jsonl(frames, out_jsonl);
  std::cout << "teams: labeled " << colors.size() << " detections -> " << out_jsonl << "\n";
}

void cmd_eval(const PipelineConfig& cfg, const std::vector<EvalMatchInput>& matches,
              const std::string& out_csv, const std::string& histogram_svg) {
  if (matches.empty()) throw std::runtime_error("eval: no matches given");

  std::vector<MetricsReport> all;
  // The Table-3 filter grid: (none, sv, sv+pm) x (team constraint off/on).
  struct Combo {
    bool sv, pm, team;
  };
  const std::vector<Combo> combos = {{false, false, false}, {true, false, false},
                                     {true, true, false},   {false, false, true},
                                     {true, false, true},   {true, true, true}};

  std::vector<std::vector<MetricsReport>> per_combo(combos.size());
  for (const auto& m : matches) {
    auto estimates = read_positions_jsonl(m.positions_jsonl);
    const auto gt = read_gt_csv(m.gt_csv);
    if (!m.homography_csv.empty()) {
      std::map<int, std::optional<Homography>> by_frame;
      for (const auto& r : read_homography_csv(m.homography_csv)) by_frame[r.frame] = r.h;
      for (auto& e : estimates) {
        const auto it = by_frame.find(e.frame);
        if (it != by_frame.end() && it->second) {
          e.has_homography = true;
          e.h = *it->second;
        }
      }
    }
    for (std::size_t c = 0; c < combos.size(); ++c) {
      ReportConfig rc;
      rc.use_sv = combos[c].sv;
      rc.use_pm = combos[c].pm;
      rc.team_constraint = combos[c].team;
      rc.pm.zeta = cfg.zeta;
      rc.agg = agg_mode_from_name(cfg.agg);
      rc.q = cfg.q;
      rc.image_w = cfg.image_w;
      rc.image_h = cfg.image_h;
      MetricsReport rep = combos[c].team ? team_constrained_report(estimates, gt, rc)
                                         : match_report(estimates, gt, rc);
      rep.match = m.label;
      per_combo[c].push_back(rep);
    }
  }
  for (std::size_t c = 0; c < combos.size(); ++c) {
    for (const auto& r : per_combo[c]) all.push_back(r);
    if (per_combo[c].size() > 1) all.push_back(overall_report(per_combo[c]));
  }
  write_report_csv(all, out_csv);

  // Human-readable table alongside the CSV.
  std::printf("%-10s %-3s %-3s %-5s %7s %8s %9s", "match", "sv", "pm", "team", "ratio", "d_mean",
              "d_median");
  for (const double l : all.front().thresholds) std::printf("  acc_%-4s", fmt6(l).c_str());
  std::printf("\n");
  for (const auto& r : all) {
    std::printf("%-10s %-3s %-3s %-5s %7.3f %8s %9s", r.match.c_str(), r.use_sv ? "x" : "-",
                r.use_pm ? "x" : "-", r.team_constraint ? "x" : "-", r.ratio,
                r.empty ? "-" : fmt6(r.d_mean).c_str(), r.empty ? "-" : fmt6(r.d_median).c_str());
    for (const double a : r.acc) std::printf("  %8s", r.empty ? "-" : fmt6(a).c_str());
    std::printf("\n");
  }
  if (!histogram_svg.empty()) {
    // Histogram of the system-output configuration (sv only, unconstrained).
    write_error_histogram_svg(per_combo[1].size() > 1 ? overall_report(per_combo[1])
                                                      : per_combo[1].front(),
                              histogram_svg);
    std::cout << "eval: histogram -> " << histogram_svg << "\n";
  }
  std::cout << "eval: " << matches.size() << " match(es), " << all.size() << " report rows -> "
            << out_csv << "\n";
}

void cmd_synth(const PipelineConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const SyntheticMatch match = generate_match(cfg.synth, cfg.seed);
  const SynthDetections dets = corrupt_detections(match, cfg.noise, cfg.seed);
  const CorruptedHomographies corrupted = corrupt_homographies(match, cfg.noise, cfg.seed);

  write_gt_csv(match.ground_truth(), out_dir + "/gt.csv");
  write_pose_csv(match.poses, out_dir + "/poses_gt.csv");

  std::vector<HomographyRow> gt_rows, reg_rows;
  for (int t = 0; t < static_cast<int>(match.homographies.size()); ++t) {
    gt_rows.push_back({t, match.homographies[static_cast<std::size_t>(t)]});
    reg_rows.push_back({t, corrupted.homographies[static_cast<std::size_t>(t)]});
  }
  write_homography_csv(gt_rows, out_dir + "/homographies_gt.csv");
  write_homography_csv(reg_rows, out_dir + "/homographies.csv");

  write_detections_jsonl(dets.detections, out_dir + "/detections.jsonl");
  std::vector<ColorRow> colors;
  colors.reserve(dets.detections.size());
  for (std::size_t i = 0; i < dets.detections.size(); ++i) {
    // Persist HSV rather than the embedded vector, per the interchange format.
    const Vec3& e = dets.colors.feature[i];
    ColorRow c;
    c.frame = dets.colors.frame[i];
    c.detection_id = dets.detection_id[i];
    c.s = std::hypot(e.x(), e.y());
    c.h = c.s > 1e-12 ? std::atan2(e.y(), e.x()) / (2.0 * M_PI) : 0.0;
    if (c.h < 0.0) c.h += 1.0;
    c.v = e.z();
    colors.push_back(c);
  }
  write_colors_jsonl(colors, out_dir + "/colors.jsonl");

  std::ofstream shots(out_dir + "/shots.csv");
  shots << "start,end\n0," << cfg.synth.frames - 1 << "\n";

  if (cfg.synth_emit_edges) {
    const fs::path edges = fs::path(out_dir) / "edges";
    fs::create_directories(edges);
    const FieldTemplate field = match.field;
    parallel_for(match.homographies.size(), [&](std::size_t t) {
      const EdgeImage img = render_edge_image(field, match.homographies[t], cfg.render_w,
                                              cfg.render_h, cfg.line_width);
      char name[32];
      std::snprintf(name, sizeof(name), "%06d.pgm", static_cast<int>(t));
      write_pgm(img, (edges / name).string());
    }, cfg.threads);
  }
  std::cout << "synth: " << cfg.synth.frames << " frames, " << dets.detections.size()
            << " detections -> " << out_dir << "\n";
}

}  // namespace pitchpos
