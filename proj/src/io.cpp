#include "pitchpos/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pitchpos {

using nlohmann::json;

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  return f;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("malformed number '" + s + "' in " + context);
  }
}

int parse_int(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("malformed integer '" + s + "' in " + context);
  }
}

}  // namespace

void write_homography_csv(const std::vector<HomographyRow>& rows, const std::string& path) {
  auto f = open_out(path);
  f << "frame,h11,h12,h13,h21,h22,h23,h31,h32,h33\n";
  for (const auto& r : rows) {
    f << r.frame;
    if (r.h) {
      const Mat3& m = r.h->matrix();
      for (int i = 0; i < 9; ++i) f << ',' << fmt6(m(i / 3, i % 3));
    } else {
      for (int i = 0; i < 9; ++i) f << ",nan";
    }
    f << '\n';
  }
}

std::vector<HomographyRow> read_homography_csv(const std::string& path) {
  auto f = open_in(path);
  std::vector<HomographyRow> rows;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 10) throw std::runtime_error("homography csv: bad row in " + path);
    HomographyRow r;
    r.frame = parse_int(cells[0], path);
    Mat3 m;
    bool any_nan = false;
    for (int i = 0; i < 9; ++i) {
      const double v = parse_double(cells[static_cast<std::size_t>(i + 1)], path);
      if (std::isnan(v)) any_nan = true;
      m(i / 3, i % 3) = v;
    }
    if (!any_nan) r.h = Homography(m);
    rows.push_back(r);
  }
  return rows;
}

void write_pose_csv(const std::vector<CameraPose>& poses, const std::string& path) {
  auto f = open_out(path);
  f << "x,y,z,focal,pan,tilt\n";
  for (const auto& p : poses) {
    f << fmt6(p.location.x()) << ',' << fmt6(p.location.y()) << ',' << fmt6(p.location.z()) << ','
      << fmt6(p.focal_length) << ',' << fmt6(p.pan_deg) << ',' << fmt6(p.tilt_deg) << '\n';
  }
}

std::vector<CameraPose> read_pose_csv(const std::string& path) {
  auto f = open_in(path);
  std::vector<CameraPose> poses;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 6) throw std::runtime_error("pose csv: bad row in " + path);
    CameraPose p;
    p.location.x() = parse_double(cells[0], path);
    p.location.y() = parse_double(cells[1], path);
    p.location.z() = parse_double(cells[2], path);
    p.focal_length = parse_double(cells[3], path);
    p.pan_deg = parse_double(cells[4], path);
    p.tilt_deg = parse_double(cells[5], path);
    poses.push_back(p);
  }
  return poses;
}

void write_detections_jsonl(const std::vector<Detection>& dets, const std::string& path) {
  auto f = open_out(path);
  for (const auto& d : dets) {
    json j;
    j["frame"] = d.frame;
    j["x1"] = d.x1;
    j["y1"] = d.y1;
    j["x2"] = d.x2;
    j["y2"] = d.y2;
    j["confidence"] = d.confidence;
    f << j.dump() << '\n';
  }
}

std::vector<Detection> read_detections_jsonl(const std::string& path) {
  auto f = open_in(path);
  std::vector<Detection> dets;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    Detection d;
    d.frame = j.at("frame").get<int>();
    d.x1 = j.at("x1").get<double>();
    d.y1 = j.at("y1").get<double>();
    d.x2 = j.at("x2").get<double>();
    d.y2 = j.at("y2").get<double>();
    d.confidence = j.value("confidence", 1.0);
    if (!d.valid_box()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": degenerate box");
    }
    dets.push_back(d);
  }
  return dets;
}

void write_colors_jsonl(const std::vector<ColorRow>& rows, const std::string& path) {
  auto f = open_out(path);
  for (const auto& r : rows) {
    json j;
    j["frame"] = r.frame;
    j["detection_id"] = r.detection_id;
    j["h"] = r.h;
    j["s"] = r.s;
    j["v"] = r.v;
    f << j.dump() << '\n';
  }
}

std::vector<ColorRow> read_colors_jsonl(const std::string& path) {
  auto f = open_in(path);
  std::vector<ColorRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ColorRow r;
    r.frame = j.at("frame").get<int>();
    r.detection_id = j.at("detection_id").get<int>();
    r.h = j.at("h").get<double>();
    r.s = j.at("s").get<double>();
    r.v = j.at("v").get<double>();
    rows.push_back(r);
  }
  return rows;
}

void write_positions_jsonl(const std::vector<FrameEstimate>& frames, const std::string& path) {
  auto f = open_out(path);
  for (const auto& fr : frames) {
    json players = json::array();
    for (const auto& p : fr.players) {
      json pj;
      pj["x"] = p.valid ? p.position.x() : 0.0;
      pj["y"] = p.valid ? p.position.y() : 0.0;
      pj["team"] = team_label_name(p.team);
      pj["det"] = p.detection_id;
      pj["valid"] = p.valid;
      players.push_back(pj);
    }
    json j;
    j["frame"] = fr.frame;
    j["sv"] = fr.sv_keep;
    j["players"] = players;
    f << j.dump() << '\n';
  }
}

std::vector<FrameEstimate> read_positions_jsonl(const std::string& path) {
  auto f = open_in(path);
  std::vector<FrameEstimate> frames;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    FrameEstimate fr;
    fr.frame = j.at("frame").get<int>();
    fr.sv_keep = j.at("sv").get<bool>();
    fr.has_homography = false;
    for (const auto& pj : j.at("players")) {
      FrameEstimate::Player p;
      p.position = Vec2(pj.at("x").get<double>(), pj.at("y").get<double>());
      p.team = team_label_from_name(pj.at("team").get<std::string>());
      p.detection_id = pj.value("det", -1);
      p.valid = pj.value("valid", true);
      fr.players.push_back(p);
    }
    frames.push_back(fr);
  }
  return frames;
}

namespace {

const char* gt_team_name(TeamLabel t) {
  switch (t) {
    case TeamLabel::A: return "A";
    case TeamLabel::B: return "B";
    default: return "R";
  }
}

TeamLabel gt_team_from_name(const std::string& s, const std::string& context) {
  if (s == "A") return TeamLabel::A;
  if (s == "B") return TeamLabel::B;
  if (s == "R") return TeamLabel::Other;
  throw std::runtime_error("unknown ground-truth team '" + s + "' in " + context);
}

}  // namespace

void write_gt_csv(const std::vector<GroundTruthFrame>& frames, const std::string& path) {
  auto f = open_out(path);
  f << "frame,player_id,team,x,y\n";
  for (const auto& fr : frames) {
    for (const auto& p : fr.players) {
      f << fr.frame << ',' << p.id << ',' << gt_team_name(p.team) << ',' << fmt6(p.position.x())
        << ',' << fmt6(p.position.y()) << '\n';
    }
  }
}

std::vector<GroundTruthFrame> read_gt_csv(const std::string& path) {
  auto f = open_in(path);
  std::vector<GroundTruthFrame> frames;
  std::map<int, std::size_t> index;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5) throw std::runtime_error("gt csv: bad row in " + path);
    const int frame = parse_int(cells[0], path);
    GroundTruthFrame::Player p;
    p.id = parse_int(cells[1], path);
    p.team = gt_team_from_name(cells[2], path);
    p.position = Vec2(parse_double(cells[3], path), parse_double(cells[4], path));
    auto it = index.find(frame);
    if (it == index.end()) {
      GroundTruthFrame fr;
      fr.frame = frame;
      frames.push_back(fr);
      it = index.emplace(frame, frames.size() - 1).first;
    }
    frames[it->second].players.push_back(p);
  }
  return frames;
}

std::vector<ShotRange> read_shots_csv(const std::string& path) {
  auto f = open_in(path);
  std::vector<ShotRange> shots;
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw std::runtime_error("shot csv: bad row in " + path);
    ShotRange s;
    s.start = parse_int(cells[0], path);
    s.end = parse_int(cells[1], path);
    if (s.end < s.start) throw std::runtime_error("shot csv: end before start in " + path);
    shots.push_back(s);
  }
  return shots;
}

void write_shot_results_csv(const std::vector<ShotResultRow>& rows, const std::string& path) {
  auto f = open_out(path);
  f << "start,end,score,label\n";
  for (const auto& r : rows) {
    f << r.start << ',' << r.end << ',' << fmt6(r.score) << ','
      << (r.main_camera ? "main" : "other") << '\n';
  }
}

void write_report_csv(const std::vector<MetricsReport>& reports, const std::string& path) {
  auto f = open_out(path);
  f << "match,sv,pm,team_constraint,agg,ratio,kept,total,d_mean,d_median";
  if (!reports.empty()) {
    for (const double l : reports.front().thresholds) f << ",acc_" << fmt6(l);
  }
  f << ",gt_visible_frames,gt_all_frames,empty\n";
  for (const auto& r : reports) {
    f << r.match << ',' << (r.use_sv ? 1 : 0) << ',' << (r.use_pm ? 1 : 0) << ','
      << (r.team_constraint ? 1 : 0) << ',' << agg_mode_name(r.agg) << ',' << fmt6(r.ratio) << ','
      << r.kept_frames << ',' << r.total_frames << ',' << fmt6(r.d_mean) << ','
      << fmt6(r.d_median);
    for (const double a : r.acc) f << ',' << fmt6(a);
    f << ',' << r.frames_gt_visible << ',' << r.frames_gt_all << ',' << (r.empty ? 1 : 0) << '\n';
  }
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  auto f = open_in(path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    // Trim.
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace pitchpos
