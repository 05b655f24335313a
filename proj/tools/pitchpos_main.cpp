// pitchpos: player positions from broadcast-style soccer footage inputs.
// Subcommands cover the full pipeline: synthetic data generation, reference
// database construction, field registration, shot classification, player
// projection, team assignment, and evaluation.

#include <CLI11.hpp>
#include <iostream>

#include "pitchpos/cli_commands.hpp"
#include "pitchpos/io.hpp"

using namespace pitchpos;

int main(int argc, char** argv) {
  CLI::App app{"player position extraction pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool have_seed = false;

  // Flags shared by every subcommand; values override the config file.
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value configuration file");
    cmd->add_option("--seed", seed, "RNG seed (overrides config)")
        ->each([&](const std::string&) { have_seed = true; });
  };
  auto make_config = [&]() {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_pipeline_config(config_path);
    if (have_seed) cfg.seed = seed;
    apply_config_map(cfg, {});  // re-sync derived synth fields
    return cfg;
  };

  // builddb
  auto* builddb = app.add_subcommand("builddb", "sample camera poses and build the feature database");
  std::string out_db, preset;
  int db_count = -1;
  builddb->add_option("--out", out_db, "output database file")->required();
  builddb->add_option("--preset", preset, "wc14-base | extended | uniform-focal | uniform-focal-xyz");
  builddb->add_option("--count", db_count, "number of camera poses");
  add_common(builddb);

  // register
  auto* reg = app.add_subcommand("register", "estimate per-frame homographies from edge images");
  std::string db_path, edges_dir, out_csv;
  bool no_refine = false;
  int candidates = -1;
  reg->add_option("--db", db_path, "feature database")->required();
  reg->add_option("--edges", edges_dir, "directory of <frame>.pgm edge images")->required();
  reg->add_option("--out", out_csv, "output homography CSV")->required();
  reg->add_flag("--no-refine", no_refine, "skip the Gauss-Newton refinement");
  reg->add_option("--candidates", candidates, "retrieval candidates refined per frame");
  add_common(reg);

  // shots
  auto* shots = app.add_subcommand("shots", "classify shots as main camera vs other");
  std::string shots_h, shots_list, shots_out;
  double tau = -1.0;
  shots->add_option("--homographies", shots_h, "homography CSV")->required();
  shots->add_option("--shots", shots_list, "shot list CSV (start,end)")->required();
  shots->add_option("--out", shots_out, "output classification CSV")->required();
  shots->add_option("--tau", tau, "main-camera threshold");
  add_common(shots);

  // extract
  auto* extract = app.add_subcommand("extract", "project detections to field positions");
  std::string det_path, ext_h, ext_out;
  double rho = -1.0;
  extract->add_option("--detections", det_path, "detections JSONL")->required();
  extract->add_option("--homographies", ext_h, "homography CSV")->required();
  extract->add_option("--out", ext_out, "output positions JSONL")->required();
  extract->add_option("--rho", rho, "self-verification tolerance, meters");
  add_common(extract);

  // teams
  auto* teams = app.add_subcommand("teams", "assign team labels by color clustering");
  std::string pos_path, colors_path, teams_out;
  double n_cls = -1.0;
  teams->add_option("--positions", pos_path, "positions JSONL")->required();
  teams->add_option("--colors", colors_path, "color features JSONL")->required();
  teams->add_option("--out", teams_out, "output labeled positions JSONL")->required();
  teams->add_option("--ncls", n_cls, "cluster-mass fraction in [0, 0.5]");
  add_common(teams);

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate positions against ground truth");
  std::vector<std::string> match_dirs;
  std::string eval_pos, eval_gt, eval_h, eval_out;
  double zeta = -1.0, qq = -1.0;
  std::string agg;
  eval->add_option("--match", match_dirs,
                   "LABEL=DIR with positions.jsonl, gt.csv, homographies.csv (repeatable)");
  eval->add_option("--positions", eval_pos, "positions JSONL (single match)");
  eval->add_option("--gt", eval_gt, "ground-truth CSV (single match)");
  eval->add_option("--homographies", eval_h, "homography CSV (single match)");
  eval->add_option("--out", eval_out, "output report CSV")->required();
  std::string eval_histogram;
  eval->add_option("--histogram", eval_histogram, "optional SVG error-histogram output");
  eval->add_option("--zeta", zeta, "player-mismatch ratio tolerance");
  eval->add_option("--q", qq, "best-q aggregation fraction");
  eval->add_option("--agg", agg, "mean | median | best_q");
  add_common(eval);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic match dataset");
  std::string synth_out;
  int frames = -1;
  bool no_edges = false;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--frames", frames, "number of frames");
  synth->add_flag("--no-edges", no_edges, "skip writing edge images");
  add_common(synth);

  CLI11_PARSE(app, argc, argv);

  try {
    if (builddb->parsed()) {
      PipelineConfig cfg = make_config();
      if (!preset.empty()) cfg.preset = preset;
      if (db_count > 0) cfg.db_count = db_count;
      cmd_builddb(cfg, out_db);
    } else if (reg->parsed()) {
      PipelineConfig cfg = make_config();
      if (candidates > 0) cfg.candidates = candidates;
      cmd_register(cfg, db_path, edges_dir, out_csv, !no_refine);
    } else if (shots->parsed()) {
      PipelineConfig cfg = make_config();
      if (tau >= 0.0) cfg.tau = tau;
      cmd_shots(cfg, shots_h, shots_list, shots_out);
    } else if (extract->parsed()) {
      PipelineConfig cfg = make_config();
      if (rho >= 0.0) cfg.rho = rho;
      cmd_extract(cfg, det_path, ext_h, ext_out);
    } else if (teams->parsed()) {
      PipelineConfig cfg = make_config();
      if (n_cls >= 0.0) cfg.n_cls = n_cls;
      cmd_teams(cfg, pos_path, colors_path, teams_out);
    } else if (eval->parsed()) {
      PipelineConfig cfg = make_config();
      if (zeta >= 0.0) cfg.zeta = zeta;
      if (qq > 0.0) cfg.q = qq;
      if (!agg.empty()) cfg.agg = agg;
      std::vector<EvalMatchInput> matches;
      for (const auto& spec : match_dirs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
          throw std::runtime_error("--match expects LABEL=DIR, got '" + spec + "'");
        }
        const std::string label = spec.substr(0, eq);
        const std::string dir = spec.substr(eq + 1);
        matches.push_back({label, dir + "/positions.jsonl", dir + "/gt.csv",
                           dir + "/homographies.csv"});
      }
      if (!eval_pos.empty()) {
        if (eval_gt.empty()) throw std::runtime_error("eval: --gt required with --positions");
        matches.push_back({"match", eval_pos, eval_gt, eval_h});
      }
      cmd_eval(cfg, matches, eval_out, eval_histogram);
    } else if (synth->parsed()) {
      PipelineConfig cfg = make_config();
      if (frames > 0) cfg.synth.frames = frames;
      if (no_edges) cfg.synth_emit_edges = false;
      cmd_synth(cfg, synth_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
