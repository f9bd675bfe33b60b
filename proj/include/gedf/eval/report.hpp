// SPDX-License-Identifier: Apache-2.0
/**
 * @file   report.hpp
 * @brief  Per-(location, category) evaluation and the text report format.
 *
 * Report layout:
 *
 *   location,category,metric,value
 *   loc1,car_left,kendall,0.8
 *   loc1,car_left,rmse,0.41
 *   loc2,cv_left,kendall,absent
 *   ...
 *   [ranking]
 *   system,score
 *   run_a,1.25
 */
#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gedf/eval/metrics.hpp"
#include "gedf/fusion/model.hpp"
#include "gedf/synth/dataset.hpp"

namespace gedf::eval {

struct MetricsReport {
  MetricGrid grid;
  RankingScores ranking;  // empty when no ranking was requested

  std::size_t present_cells() const {
    std::size_t n = 0;
    for (const auto &loc : grid.cells)
      for (const auto &cat : loc)
        for (const auto &v : cat) n += v.has_value();
    return n;
  }
};

/// One evaluated scene.
struct EvalRecord {
  std::string location;
  std::array<double, kNumCategories> predicted{};
  std::array<double, kNumCategories> truth{};
};

/// Groups records by (location, category). Kendall is absent below two
/// samples or for an all-tied variable; RMSE is absent only for empty cells.
inline MetricsReport metrics_from_records(const std::vector<EvalRecord> &records) {
  std::array<std::array<std::vector<double>, kNumCategories>, kNumLocations> pred, truth;
  for (const auto &r : records) {
    const auto li = location_index(r.location);
    if (!li)
      throw ProtocolError("unknown location '" + r.location + "' (expected loc1..loc6)");
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      pred[*li][c].push_back(r.predicted[c]);
      truth[*li][c].push_back(r.truth[c]);
    }
  }
  MetricsReport rep;
  for (std::size_t l = 0; l < kNumLocations; ++l)
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      const auto &p = pred[l][c];
      const auto &t = truth[l][c];
      if (p.empty()) continue;
      rep.grid.at(l, c, Metric::rmse) = rmse(p, t);
      if (p.size() >= 2) rep.grid.at(l, c, Metric::kendall) = kendall_tau(p, t);
    }
  return rep;
}

using LocationMap = std::function<std::string(const synth::ManifestRow &)>;

inline std::string location_from_manifest(const synth::ManifestRow &row) {
  if (row.location.empty())
    throw ProtocolError("manifest row '" + row.filename +
                        "' has no location; supply a location column or grouping");
  return row.location;
}

/// Runs inference on every manifest row and scores each (location, category).
inline MetricsReport evaluate(const fusion::GedfNet &net, const nn::ParameterStore &store,
                              const std::filesystem::path &manifest,
                              const LocationMap &grouping = location_from_manifest) {
  std::vector<EvalRecord> records;
  for (const auto &row : synth::read_manifest(manifest)) {
    EvalRecord r;
    r.location = grouping(row);
    const auto [y, A] = fusion::infer(net, store, synth::load_scene_audio(manifest, row));
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      r.predicted[c] = y[c];
      r.truth[c] = row.label.counts[c];
    }
    records.push_back(r);
  }
  return metrics_from_records(records);
}

inline std::string format_report(const MetricsReport &rep) {
  std::ostringstream os;
  os << "location,category,metric,value\n";
  char buf[64];
  for (std::size_t l = 0; l < kNumLocations; ++l)
    for (std::size_t c = 0; c < kNumCategories; ++c)
      for (Metric m : {Metric::kendall, Metric::rmse}) {
        const auto &v = rep.grid.at(l, c, m);
        os << kLocationNames[l] << ',' << kCategoryNames[c] << ',' << metric_name(m) << ',';
        if (v) {
          std::snprintf(buf, sizeof(buf), "%.17g", *v);
          os << buf << '\n';
        } else {
          os << "absent\n";
        }
      }
  if (!rep.ranking.empty()) {
    os << "[ranking]\nsystem,score\n";
    for (const auto &[name, score] : rep.ranking) {
      std::snprintf(buf, sizeof(buf), "%.17g", score);
      os << name << ',' << buf << '\n';
    }
  }
  return os.str();
}

inline MetricsReport parse_report(const std::string &text, const std::string &source = "report") {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "location,category,metric,value")
    throw ProtocolError(source + ": missing report header");
  MetricsReport rep;
  bool ranking = false;
  std::size_t line_no = 1;
  auto to_double = [&](const std::string &s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception &) {
      throw ProtocolError(source + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
    }
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line == "[ranking]") {
      ranking = true;
      if (!std::getline(is, line) || line != "system,score")
        throw ProtocolError(source + ": ranking section lacks its header");
      ++line_no;
      continue;
    }
    const auto f = synth::detail::split_csv(line);
    if (ranking) {
      if (f.size() != 2) throw ProtocolError(source + ":" + std::to_string(line_no) + ": bad row");
      rep.ranking.emplace_back(f[0], to_double(f[1]));
      continue;
    }
    if (f.size() != 4) throw ProtocolError(source + ":" + std::to_string(line_no) + ": bad row");
    const auto li = location_index(f[0]);
    std::optional<std::size_t> ci;
    for (std::size_t c = 0; c < kNumCategories; ++c)
      if (f[1] == kCategoryNames[c]) ci = c;
    if (!li || !ci || (f[2] != "kendall" && f[2] != "rmse"))
      throw ProtocolError(source + ":" + std::to_string(line_no) + ": unknown cell '" + line + "'");
    const Metric m = f[2] == "kendall" ? Metric::kendall : Metric::rmse;
    if (f[3] != "absent") rep.grid.at(*li, *ci, m) = to_double(f[3]);
  }
  return rep;
}

inline void write_report(const std::filesystem::path &path, const MetricsReport &rep) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << format_report(rep);
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

inline MetricsReport read_report(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open report '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_report(ss.str(), path.string());
}

}  // namespace gedf::eval
