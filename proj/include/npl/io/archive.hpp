#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "npl/error.hpp"
#include "npl/io/csv.hpp"
#include "npl/sampler.hpp"

namespace npl::io {

inline std::string sidecar_path(const std::string& archive_path) { return archive_path + ".meta.json"; }

/// Sample rows as CSV (one column per parameter, 17 significant digits).
inline void write_samples_csv(const std::string& path, const PosteriorSamples& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  write_csv_row(out, s.names);
  std::vector<std::string> cells(s.dimension());
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = 0; j < cells.size(); ++j) cells[j] = format_double(s.at(i, j));
    write_csv_row(out, cells);
  }
  if (!out) throw DataError(path + ": write failed");
}

/// Metadata describing a sample archive. `extra` carries caller-specific
/// content (resolved config, standardisation, ...).
inline nlohmann::json archive_metadata(const PosteriorSamples& s, const nlohmann::json& extra) {
  nlohmann::json m = extra;
  m["format"] = "npl-archive-1";
  m["family"] = s.family;
  m["columns"] = s.names;
  m["rows"] = s.rows();
  m["requested"] = s.requested;
  m["master_seed"] = s.master_seed;
  m["workers"] = s.workers;
  m["wall_seconds"] = s.wall_seconds;
  m["dp"] = s.dp_description;
  m["policy"] = s.policy_description;
  m["failed"] = s.failed;
  m["failure_messages"] = s.failure_messages;
  m["per_sample"] = {{"sample_index", s.sample_index},
                     {"seed", s.seeds},
                     {"objective", s.objectives},
                     {"restart_index", s.restart_index}};
  return m;
}

inline void write_archive(const std::string& path, const PosteriorSamples& s, const nlohmann::json& extra) {
  write_samples_csv(path, s);
  std::ofstream meta(sidecar_path(path), std::ios::binary);
  if (!meta) throw DataError(sidecar_path(path) + ": cannot open for writing");
  meta << archive_metadata(s, extra).dump(2) << '\n';
}

struct Archive {
  PosteriorSamples samples;
  nlohmann::json meta;
};

/// Reads the CSV rows and, if present, the sidecar. Row count must match
/// the sidecar's record (requested minus failures).
inline Archive read_archive(const std::string& path) {
  Archive a;
  const CsvTable t = read_csv(path);
  a.samples.names = t.header;
  for (const auto& row : t.rows) a.samples.values.insert(a.samples.values.end(), row.begin(), row.end());

  std::ifstream meta(sidecar_path(path));
  if (!meta) return a;
  try {
    a.meta = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(sidecar_path(path) + ": " + e.what());
  }
  try {
    a.samples.family = a.meta.at("family").get<std::string>();
    const auto rows = a.meta.at("rows").get<std::size_t>();
    const auto requested = a.meta.at("requested").get<std::size_t>();
    a.samples.requested = requested;
    a.samples.failed = a.meta.at("failed").get<std::vector<std::size_t>>();
    a.samples.failure_messages = a.meta.value("failure_messages", std::vector<std::string>{});
    a.samples.master_seed = a.meta.at("master_seed").get<std::uint64_t>();
    a.samples.workers = a.meta.value("workers", std::size_t{0});
    a.samples.wall_seconds = a.meta.value("wall_seconds", 0.0);
    a.samples.dp_description = a.meta.value("dp", std::string{});
    a.samples.policy_description = a.meta.value("policy", std::string{});
    const auto& per = a.meta.at("per_sample");
    a.samples.sample_index = per.at("sample_index").get<std::vector<std::size_t>>();
    a.samples.seeds = per.at("seed").get<std::vector<std::uint64_t>>();
    a.samples.objectives = per.at("objective").get<std::vector<double>>();
    a.samples.restart_index = per.at("restart_index").get<std::vector<std::size_t>>();
    if (a.meta.at("columns").get<std::vector<std::string>>() != t.header) {
      throw DataError(path + ": header does not match sidecar columns");
    }
    if (rows != t.rows.size() || rows + a.samples.failed.size() != requested) {
      throw DataError(path + ": row count " + std::to_string(t.rows.size()) + " disagrees with sidecar");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(sidecar_path(path) + ": " + e.what());
  }
  return a;
}

}  // namespace npl::io
