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

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "trilat/analysis.hpp"
#include "trilat/config.hpp"
#include "trilat/simulator.hpp"

namespace trilat {

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kGroundTruthFile = "ground_truth.csv";
inline constexpr const char* kTrilateratedFile = "trilaterated.csv";
inline constexpr const char* kEventsFile = "events.jsonl";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kTimingErrorsFile = "timing_errors.csv";
inline constexpr const char* kTimingHistogramFile = "timing_histogram.csv";
inline constexpr const char* kTraceOverlayFile = "trace_overlay.csv";

/// "raw_sensor1.csv" etc.
std::string raw_sensor_file(Sensor s);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

nlohmann::json to_json(const SessionSummary& s);

void write_ground_truth(const std::filesystem::path& file, const std::vector<GroundTruthSample>& rows);
void write_trilaterated(const std::filesystem::path& file,
                        const std::vector<TrilateratedPosition>& rows);
void write_raw(const std::filesystem::path& file, const std::vector<RawFrameRecord>& rows);
void write_events(const std::filesystem::path& file, const std::vector<Arrival>& rows);

std::vector<GroundTruthSample> read_ground_truth(const std::filesystem::path& file);
std::vector<TrilateratedPosition> read_trilaterated(const std::filesystem::path& file);
std::vector<RawFrameRecord> read_raw(const std::filesystem::path& file);
std::vector<Arrival> read_events(const std::filesystem::path& file);

/// Writes the CSV and JSONL outputs of a session (no manifest, no report).
void write_session(const std::filesystem::path& dir, const SessionArtifacts& a);

/// Artifacts as read back from disk. Raw sensor logs are optional.
struct LoadedArtifacts {
  nlohmann::json manifest;
  RunConfig config;
  std::vector<GroundTruthSample> ground_truth;
  std::vector<TrilateratedPosition> trilaterated;
  std::array<std::optional<std::vector<RawFrameRecord>>, 3> raw;
  std::vector<Arrival> events;
};

/// Throws Errc::MissingArtifact naming the first absent file.
LoadedArtifacts load_artifacts(const std::filesystem::path& dir);

/// Builds report.json content from loaded artifacts.
nlohmann::json build_report(const LoadedArtifacts& a);

/// Loads `dir`, writes report.json and the plot CSVs, returns the report.
nlohmann::json analyze_dir(const std::filesystem::path& dir);

}  // namespace trilat
