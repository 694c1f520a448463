// Copyright 2026 The trilat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trilat/artifacts.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "trilat/error.hpp"

namespace trilat {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + file.string());
  return out;
}

std::ifstream open_in(const fs::path& file) {
  if (!fs::exists(file)) throw Error(Errc::MissingArtifact, "missing artifact " + file.filename().string());
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + file.string());
  return in;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse(std::string_view field, const fs::path& file, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw Error(Errc::Io, file.filename().string() + ":" + std::to_string(line) + ": bad field '" +
                              std::string(field) + "'");
  }
  return value;
}

/// Calls `row(fields, line_no)` for each data row of a CSV with the expected header.
template <typename F>
void read_csv(const fs::path& file, std::string_view header, F&& row) {
  std::ifstream in = open_in(file);
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw Error(Errc::Io, file.filename().string() + ": unexpected header");
  }
  const std::size_t width = split(header).size();
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != width) {
      throw Error(Errc::Io, file.filename().string() + ":" + std::to_string(n) + ": expected " +
                                std::to_string(width) + " fields");
    }
    row(fields, n);
  }
}

Joint parse_joint(std::string_view s, const fs::path& file, std::size_t line) {
  if (auto j = joint_from_name(s)) return *j;
  throw Error(Errc::Io, file.filename().string() + ":" + std::to_string(line) + ": unknown joint '" +
                            std::string(s) + "'");
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  const double lo = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

constexpr std::array<const char*, 4> kMethodNames{"k1", "k2", "k3", "trilateration"};

json localization_section(const LoadedArtifacts& a, const RigGeometryd& rig) {
  for (const auto& r : a.raw) {
    if (!r) return nullptr;
  }
  using Key = std::pair<std::int64_t, Joint>;
  std::map<Key, Point3d> truth;
  for (const auto& g : a.ground_truth) truth[{g.iteration, g.joint}] = g.position;
  std::array<std::map<Key, RawMeasurementd>, 3> raw;
  for (std::size_t i = 0; i < 3; ++i) {
    for (const auto& r : *a.raw[i]) raw[i][{r.iteration, r.joint}] = r.measurement;
  }

  std::array<std::vector<double>, 4> errors;
  std::array<std::uint64_t, 4> wins{};
  for (const auto& p : a.trilaterated) {
    const Key key{p.iteration, p.joint};
    const auto t = truth.find(key);
    if (t == truth.end()) continue;
    std::array<Point3d, 3> singles;
    bool complete = true;
    for (std::size_t i = 0; i < 3 && complete; ++i) {
      const auto m = raw[i].find(key);
      if (m == raw[i].end()) {
        complete = false;
        break;
      }
      singles[i] = single_sensor_locate(rig, kSensors[i], m->second);
    }
    if (!complete) continue;
    const AccuracyReport r = localization_errors(t->second, singles, p.position);
    for (std::size_t m = 0; m < 4; ++m) errors[m].push_back(r.error_of(static_cast<Method>(m)));
    ++wins[static_cast<std::size_t>(r.winner)];
  }

  json mean_mm, median_mm, win_counts;
  for (std::size_t m = 0; m < 4; ++m) {
    mean_mm[kMethodNames[m]] = mean(errors[m]);
    median_mm[kMethodNames[m]] = median(errors[m]);
    win_counts[kMethodNames[m]] = wins[m];
  }
  return {{"samples", errors[3].size()}, {"mean_mm", mean_mm}, {"median_mm", median_mm}, {"wins", win_counts}};
}

json trace_section(const LoadedArtifacts& a) {
  using Key = std::pair<std::int64_t, Joint>;
  std::map<Key, Point3d> truth;
  for (const auto& g : a.ground_truth) truth[{g.iteration, g.joint}] = g.position;

  std::map<Joint, std::vector<std::pair<Point3d, Point3d>>> pairs;
  for (const auto& p : a.trilaterated) {
    const auto t = truth.find({p.iteration, p.joint});
    if (t != truth.end()) pairs[p.joint].emplace_back(p.position, t->second);
  }
  if (pairs.empty()) return nullptr;
  Trace fused, reference;
  for (const auto& [joint, rows] : pairs) {
    if (rows.size() < 2) return nullptr;
    Eigen::MatrixX3d f(static_cast<Eigen::Index>(rows.size()), 3);
    Eigen::MatrixX3d g(static_cast<Eigen::Index>(rows.size()), 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      f.row(static_cast<Eigen::Index>(i)) = rows[i].first.transpose();
      g.row(static_cast<Eigen::Index>(i)) = rows[i].second.transpose();
    }
    fused.joints[joint] = std::move(f);
    reference.joints[joint] = std::move(g);
  }
  const TraceDiffReport r = trace_diff_std(fused, reference);
  json per_joint = json::object();
  for (const auto& [joint, s] : r.std_cm) {
    per_joint[std::string(joint_name(joint))] = {s.x(), s.y(), s.z()};
  }
  return {{"std_cm", per_joint}, {"total_cm", r.total_cm}, {"mean_of_stds_cm", r.mean_of_stds_cm}};
}

}  // namespace

std::string raw_sensor_file(Sensor s) { return "raw_sensor" + std::to_string(index_of(s) + 1) + ".csv"; }

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

json to_json(const SessionSummary& s) {
  json j = {
      {"iterations_planned", s.iterations_planned},
      {"iterations_completed", s.iterations_completed},
      {"iterations_skipped", s.iterations_skipped},
      {"frames_received", s.frames_received},
      {"frames_late", s.frames_late},
      {"frames_duplicate", s.frames_duplicate},
      {"frames_rejected", s.frames_rejected},
      {"frames_out_of_slot", s.frames_out_of_slot},
      {"sequence_gaps", s.sequence_gaps},
      {"positions_emitted", s.positions_emitted},
      {"trilateration_failures", s.trilateration_failures},
      {"sync_requests_answered", s.sync_requests_answered},
      {"connections_refused", s.connections_refused},
      {"clients_lost", s.clients_lost},
  };
  j["epoch_us"] = s.epoch ? json(*s.epoch) : json(nullptr);
  return j;
}

void write_ground_truth(const fs::path& file, const std::vector<GroundTruthSample>& rows) {
  std::ofstream out = open_out(file);
  out << "iteration,joint,x_mm,y_mm,z_mm\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << joint_name(r.joint) << ',' << format_number(r.position.x()) << ','
        << format_number(r.position.y()) << ',' << format_number(r.position.z()) << '\n';
  }
}

void write_trilaterated(const fs::path& file, const std::vector<TrilateratedPosition>& rows) {
  std::ofstream out = open_out(file);
  out << "iteration,joint,x_mm,y_mm,z_mm,server_time_us\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << joint_name(r.joint) << ',' << format_number(r.position.x()) << ','
        << format_number(r.position.y()) << ',' << format_number(r.position.z()) << ','
        << r.server_time << '\n';
  }
}

void write_raw(const fs::path& file, const std::vector<RawFrameRecord>& rows) {
  std::ofstream out = open_out(file);
  out << "iteration,joint,depth_mm,theta1_rad,theta2_rad\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << joint_name(r.joint) << ',' << format_number(r.measurement.depth)
        << ',' << format_number(r.measurement.theta1) << ',' << format_number(r.measurement.theta2)
        << '\n';
  }
}

void write_events(const fs::path& file, const std::vector<Arrival>& rows) {
  std::ofstream out = open_out(file);
  for (const auto& r : rows) {
    out << json{{"client", r.client}, {"seq", r.seq}, {"server_time_us", r.server_time}}.dump()
        << '\n';
  }
}

std::vector<GroundTruthSample> read_ground_truth(const fs::path& file) {
  std::vector<GroundTruthSample> rows;
  read_csv(file, "iteration,joint,x_mm,y_mm,z_mm", [&](const auto& f, std::size_t n) {
    rows.push_back({parse<std::int64_t>(f[0], file, n), parse_joint(f[1], file, n),
                    Point3d(parse<double>(f[2], file, n), parse<double>(f[3], file, n),
                            parse<double>(f[4], file, n))});
  });
  return rows;
}

std::vector<TrilateratedPosition> read_trilaterated(const fs::path& file) {
  std::vector<TrilateratedPosition> rows;
  read_csv(file, "iteration,joint,x_mm,y_mm,z_mm,server_time_us", [&](const auto& f, std::size_t n) {
    rows.push_back({parse<std::int64_t>(f[0], file, n), parse_joint(f[1], file, n),
                    Point3d(parse<double>(f[2], file, n), parse<double>(f[3], file, n),
                            parse<double>(f[4], file, n)),
                    parse<Micros>(f[5], file, n)});
  });
  return rows;
}

std::vector<RawFrameRecord> read_raw(const fs::path& file) {
  std::vector<RawFrameRecord> rows;
  read_csv(file, "iteration,joint,depth_mm,theta1_rad,theta2_rad", [&](const auto& f, std::size_t n) {
    rows.push_back({parse<std::int64_t>(f[0], file, n), parse_joint(f[1], file, n),
                    RawMeasurementd{parse<double>(f[2], file, n), parse<double>(f[3], file, n),
                                    parse<double>(f[4], file, n)}});
  });
  return rows;
}

std::vector<Arrival> read_events(const fs::path& file) {
  std::ifstream in = open_in(file);
  std::vector<Arrival> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      rows.push_back({j.at("client").get<ClientId>(), j.at("seq").get<std::uint32_t>(),
                      j.at("server_time_us").get<Micros>()});
    } catch (const json::exception& e) {
      throw Error(Errc::Io, file.filename().string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return rows;
}

void write_session(const fs::path& dir, const SessionArtifacts& a) {
  fs::create_directories(dir);
  write_ground_truth(dir / kGroundTruthFile, a.ground_truth);
  write_trilaterated(dir / kTrilateratedFile, a.trilaterated);
  for (Sensor s : kSensors) write_raw(dir / raw_sensor_file(s), a.raw[static_cast<std::size_t>(index_of(s))]);
  write_events(dir / kEventsFile, a.events);
}

LoadedArtifacts load_artifacts(const fs::path& dir) {
  LoadedArtifacts a;
  {
    std::ifstream in = open_in(dir / kManifestFile);
    try {
      a.manifest = json::parse(in);
      a.config = parse_config(a.manifest.at("config"));
    } catch (const json::exception& e) {
      throw Error(Errc::Io, std::string(kManifestFile) + ": " + e.what());
    }
  }
  a.ground_truth = read_ground_truth(dir / kGroundTruthFile);
  a.trilaterated = read_trilaterated(dir / kTrilateratedFile);
  a.events = read_events(dir / kEventsFile);
  for (Sensor s : kSensors) {
    const fs::path file = dir / raw_sensor_file(s);
    if (fs::exists(file)) a.raw[static_cast<std::size_t>(index_of(s))] = read_raw(file);
  }
  return a;
}

json build_report(const LoadedArtifacts& a) {
  const ScheduleConfig& schedule = a.config.session.schedule;
  const RigGeometryd rig = a.config.scene().rig;

  const TimingAnalysis analysis = timing_errors(a.events, schedule);
  const std::vector<TimingError>& errors = analysis.errors;
  Micros span = 0;
  if (!a.events.empty()) {
    const auto [lo, hi] = std::minmax_element(
        a.events.begin(), a.events.end(),
        [](const Arrival& x, const Arrival& y) { return x.server_time < y.server_time; });
    span = hi->server_time - lo->server_time;
  }
  const TimingReport t = timing_report(errors, span);
  json max_err = json::object();
  for (const auto& [client, v] : t.max_error_ms) max_err[std::to_string(client)] = v;
  json hist = json::object();
  for (std::size_t i = 0; i < kHistogramLabels.size(); ++i) hist[kHistogramLabels[i]] = t.histogram[i];
  json gaps = json::array();
  for (const auto& g : analysis.gaps) {
    gaps.push_back({{"client", g.client}, {"after_seq", g.after_seq}, {"next_seq", g.next_seq}});
  }
  std::size_t within = 0;
  for (const auto& e : errors) within += std::abs(e.error_ms) <= 1.0 ? 1 : 0;

  std::set<std::int64_t> iterations;
  for (const auto& p : a.trilaterated) iterations.insert(p.iteration);

  json report = {
      {"seed", a.config.noise.seed},
      {"config_hash", config_hash(a.config)},
      {"mode", a.manifest.value("mode", "")},
      {"nominal_interframe_ms", static_cast<double>(schedule.nominal_interframe()) / 1000.0},
      {"iterations_trilaterated", iterations.size()},
      {"positions", a.trilaterated.size()},
      {"localization", localization_section(a, rig)},
      {"timing",
       {{"frame_count", t.frame_count},
        {"frames_within_1ms", within},
        {"fraction_within_1ms", t.fraction_within_1ms},
        {"max_error_ms", max_err},
        {"histogram", hist},
        {"span_s", t.span_s},
        {"ordering_ok", ordering_ok(errors, schedule)},
        {"sequence_gaps", gaps}}},
      {"trace_diff", trace_section(a)},
  };
  report["session"] = a.manifest.contains("summary") ? a.manifest.at("summary") : json(nullptr);
  return report;
}

json analyze_dir(const fs::path& dir) {
  const LoadedArtifacts a = load_artifacts(dir);
  const json report = build_report(a);

  const TimingAnalysis analysis = timing_errors(a.events, a.config.session.schedule);
  {
    std::ofstream out = open_out(dir / kTimingErrorsFile);
    out << "client,seq,error_ms\n";
    for (const auto& e : analysis.errors) {
      out << int(e.client) << ',' << e.seq << ',' << format_number(e.error_ms) << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / kTimingHistogramFile);
    out << "bucket_ms,fraction\n";
    const json& hist = report.at("timing").at("histogram");
    for (const char* label : kHistogramLabels) {
      out << label << ',' << format_number(hist.at(label).get<double>()) << '\n';
    }
  }
  {
    using Key = std::pair<std::int64_t, Joint>;
    std::map<Key, Point3d> truth;
    for (const auto& g : a.ground_truth) truth[{g.iteration, g.joint}] = g.position;
    std::ofstream out = open_out(dir / kTraceOverlayFile);
    out << "iteration,joint,truth_x_mm,truth_y_mm,truth_z_mm,fused_x_mm,fused_y_mm,fused_z_mm\n";
    for (const auto& p : a.trilaterated) {
      const auto t = truth.find({p.iteration, p.joint});
      if (t == truth.end()) continue;
      out << p.iteration << ',' << joint_name(p.joint);
      for (int i = 0; i < 3; ++i) out << ',' << format_number(t->second[i]);
      for (int i = 0; i < 3; ++i) out << ',' << format_number(p.position[i]);
      out << '\n';
    }
  }
  std::ofstream out = open_out(dir / kReportFile);
  out << report.dump(2) << '\n';
  return report;
}

}  // namespace trilat
