#ifndef WAVECANCOH_IO_HPP
#define WAVECANCOH_IO_HPP

/** @file
 * CSV and JSON serialization.
 *
 * Every CSV starts with a `# config_hash=<16 hex digits>` line; readers skip
 * lines starting with '#'. Numbers are written with %.17g so a read followed
 * by a write reproduces the file byte-for-byte.
 *
 *   panel        t,ch_1,...,ch_D                       + manifest JSON
 *   field        scale,k,u,rho,rho_raw,degenerate,a_1..a_P,b_1..b_Q
 *   band field   band_lo_hz,band_hi_hz,k,u,rho,rho_raw,degenerate,a_..,b_..
 *   lws dump     scale,k,s_1_1,s_1_2,...,s_D_D         (row-major upper triangle)
 *
 * A field's metadata (configuration echo, grid reference) lives in a sidecar
 * JSON with the same stem.
 */

#include <Eigen/Dense>
#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "wavecancoh/cancoh.hpp"
#include "wavecancoh/error.hpp"
#include "wavecancoh/inference.hpp"
#include "wavecancoh/lws.hpp"
#include "wavecancoh/panel.hpp"
#include "wavecancoh/simulate.hpp"

namespace wavecancoh::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// FNV-1a over the canonical (sorted-key) JSON dump.
inline std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Writes to a temporary sibling and renames over the target.
inline void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(Errc::io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(Errc::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::io, "cannot move output into place at " + path.string());
  }
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

inline fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".json");
  return p;
}

// --------------------------------------------------------------------------
// CSV reading

struct CsvTable {
  std::string config_hash;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row
};

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_number(std::string_view cell, const std::string& where) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw Error(Errc::parse, where + ": non-numeric cell '" + std::string(cell) + "'");
  }
  return v;
}

}  // namespace detail

inline CsvTable read_csv(const fs::path& path) {
  const std::string text = read_file(path);
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string key = "# config_hash=";
      if (line.rfind(key, 0) == 0) table.config_hash = line.substr(key.size());
      continue;
    }
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto cells = detail::split_commas(line);
    if (!have_header) {
      for (auto c : cells) table.header.emplace_back(c);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw Error(Errc::parse, where + ": expected " + std::to_string(table.header.size()) + " columns, found " +
                                   std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) row.push_back(detail::parse_number(c, where));
    table.rows.push_back(std::move(row));
    table.line_numbers.push_back(lineno);
  }
  if (!have_header) throw Error(Errc::parse, path.string() + ": missing header row");
  return table;
}

// --------------------------------------------------------------------------
// Panels

struct PanelManifest {
  int P = 0;
  int Q = 0;
  double fs = 1.0;
  std::uint64_t seed = 0;
  std::string spec_id;
  std::vector<double> change_points;  // rescaled time
  double time_origin = 0.0;           // seconds of sample 0
  int length = 0;
  std::vector<std::string> files;
  std::string config_hash;
};

inline json to_json(const PanelManifest& m) {
  return json{{"P", m.P},
              {"Q", m.Q},
              {"fs", m.fs},
              {"seed", m.seed},
              {"spec_id", m.spec_id},
              {"change_points", m.change_points},
              {"time_origin", m.time_origin},
              {"T", m.length},
              {"files", m.files},
              {"config_hash", m.config_hash}};
}

inline PanelManifest manifest_from_json(const json& j) {
  PanelManifest m;
  try {
    m.P = j.at("P").get<int>();
    m.Q = j.at("Q").get<int>();
    m.fs = j.value("fs", 1.0);
    m.seed = j.value("seed", std::uint64_t{0});
    m.spec_id = j.value("spec_id", std::string{});
    m.change_points = j.value("change_points", std::vector<double>{});
    m.time_origin = j.value("time_origin", 0.0);
    m.length = j.value("T", 0);
    m.files = j.value("files", std::vector<std::string>{});
    m.config_hash = j.value("config_hash", std::string{});
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("manifest: ") + e.what());
  }
  return m;
}

inline std::string panel_csv(const Eigen::MatrixXd& values, const std::string& hash) {
  std::string out = "# config_hash=" + hash + "\nt";
  for (Eigen::Index d = 0; d < values.cols(); ++d) out += ",ch_" + std::to_string(d + 1);
  out += '\n';
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    out += std::to_string(t);
    for (Eigen::Index d = 0; d < values.cols(); ++d) out += "," + format_double(values(t, d));
    out += '\n';
  }
  return out;
}

inline void write_panel(const fs::path& path, const Eigen::MatrixXd& values, const std::string& hash) {
  write_atomic(path, panel_csv(values, hash));
}

/// Reads a panel CSV; the caller supplies the group split.
inline TimeSeriesPanel read_panel(const fs::path& path, int P) {
  const CsvTable table = read_csv(path);
  const auto D = static_cast<int>(table.header.size()) - 1;
  if (D < 1 || table.header.front() != "t") {
    throw Error(Errc::parse, path.string() + ": header must be t,ch_1,...,ch_D");
  }
  for (int d = 0; d < D; ++d) {
    if (table.header[static_cast<std::size_t>(d + 1)] != "ch_" + std::to_string(d + 1)) {
      throw Error(Errc::parse, path.string() + ": unexpected column name '" +
                                   table.header[static_cast<std::size_t>(d + 1)] + "'");
    }
  }
  wavecancoh::detail::require(P >= 1 && P < D, Errc::invalid_argument,
                  "group split P = " + std::to_string(P) + " must lie in 1.." + std::to_string(D - 1));
  TimeSeriesPanel panel;
  panel.P = P;
  panel.values.resize(static_cast<Eigen::Index>(table.rows.size()), D);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (int d = 0; d < D; ++d) panel.values(static_cast<Eigen::Index>(r), d) = table.rows[r][static_cast<std::size_t>(d + 1)];
  }
  wavecancoh::detail::require(panel.values.allFinite(), Errc::invalid_data, path.string() + ": non-finite sample values");
  return panel;
}

// --------------------------------------------------------------------------
// Coherence fields

inline json field_metadata(const CancohField& f, const std::string& hash) {
  json j{{"P", f.P},
         {"Q", f.Q},
         {"scales", f.scales},
         {"length_ref", f.length_ref},
         {"points", f.size()},
         {"family", f.family},
         {"num_scales", f.num_scales},
         {"half_width", f.half_width},
         {"epsilon", f.epsilon},
         {"lag", f.lag},
         {"direction", f.direction},
         {"fs", f.fs},
         {"time_origin", f.time_origin},
         {"config_hash", hash}};
  if (f.band) j["band_hz"] = {f.band->lo, f.band->hi};
  return j;
}

inline std::string field_csv(const CancohField& f, const std::string& hash) {
  std::string out = "# config_hash=" + hash + "\n";
  out += f.band ? "band_lo_hz,band_hi_hz,k,u,rho,rho_raw,degenerate" : "scale,k,u,rho,rho_raw,degenerate";
  for (int p = 0; p < f.P; ++p) out += ",a_" + std::to_string(p + 1);
  for (int q = 0; q < f.Q; ++q) out += ",b_" + std::to_string(q + 1);
  out += '\n';
  for (std::size_t s = 0; s < f.scales.size(); ++s) {
    const std::string lead =
        f.band ? format_double(f.band->lo) + "," + format_double(f.band->hi) : std::to_string(f.scales[s]);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const CancohPoint& pt = f.points[s * f.size() + i];
      out += lead + "," + std::to_string(f.grid[i]) + "," + format_double(f.u(i)) + "," + format_double(pt.rho) + "," +
             format_double(pt.rho_raw) + "," + (pt.flags.degenerate ? "1" : "0");
      for (Eigen::Index p = 0; p < pt.a.size(); ++p) out += "," + format_double(pt.a[p]);
      for (Eigen::Index q = 0; q < pt.b.size(); ++q) out += "," + format_double(pt.b[q]);
      out += '\n';
    }
  }
  return out;
}

inline void write_field(const fs::path& csv, const CancohField& f, const json& config) {
  const std::string hash = config_hash(config);
  json meta = field_metadata(f, hash);
  meta["config"] = config;
  write_atomic(csv, field_csv(f, hash));
  write_json(sidecar_path(csv), meta);
}

struct LoadedField {
  CancohField field;
  json config;
  std::string config_hash;
};

inline LoadedField read_field(const fs::path& csv) {
  const json meta = read_json(sidecar_path(csv));
  const CsvTable table = read_csv(csv);
  LoadedField out;
  CancohField& f = out.field;
  try {
    f.P = meta.at("P").get<int>();
    f.Q = meta.at("Q").get<int>();
    f.scales = meta.at("scales").get<std::vector<int>>();
    f.length_ref = meta.at("length_ref").get<double>();
    f.family = meta.at("family").get<std::string>();
    f.num_scales = meta.at("num_scales").get<int>();
    f.half_width = meta.at("half_width").get<int>();
    f.epsilon = meta.at("epsilon").get<double>();
    f.lag = meta.at("lag").get<int>();
    f.direction = meta.at("direction").get<std::string>();
    f.fs = meta.at("fs").get<double>();
    f.time_origin = meta.at("time_origin").get<double>();
    if (meta.contains("band_hz")) f.band = FrequencyBand{meta["band_hz"][0].get<double>(), meta["band_hz"][1].get<double>()};
    out.config = meta.value("config", json::object());
    out.config_hash = meta.value("config_hash", std::string{});
  } catch (const json::exception& e) {
    throw Error(Errc::parse, sidecar_path(csv).string() + ": " + e.what());
  }
  const std::size_t lead = f.band ? 2 : 1;
  const std::size_t expected = lead + 5 + static_cast<std::size_t>(f.P + f.Q);
  if (table.header.size() != expected) {
    throw Error(Errc::parse, csv.string() + ": header has " + std::to_string(table.header.size()) +
                                 " columns, metadata implies " + std::to_string(expected));
  }
  if (f.scales.empty() || table.rows.size() % f.scales.size() != 0) {
    throw Error(Errc::parse, csv.string() + ": row count does not match the scale list");
  }
  const std::size_t n = table.rows.size() / f.scales.size();
  for (std::size_t i = 0; i < n; ++i) f.grid.push_back(static_cast<int>(table.rows[i][lead]));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t s = r / n;
    if (!f.band && static_cast<int>(row[0]) != f.scales[s]) {
      throw Error(Errc::parse, csv.string() + ":" + std::to_string(table.line_numbers[r]) + ": unexpected scale");
    }
    if (static_cast<int>(row[lead]) != f.grid[r % n]) {
      throw Error(Errc::parse, csv.string() + ":" + std::to_string(table.line_numbers[r]) + ": time grid differs between scales");
    }
    CancohPoint pt;
    pt.rho = row[lead + 2];
    pt.rho_raw = row[lead + 3];
    pt.flags.degenerate = row[lead + 4] != 0.0;
    pt.a.resize(f.P);
    pt.b.resize(f.Q);
    for (int p = 0; p < f.P; ++p) pt.a[p] = row[lead + 5 + static_cast<std::size_t>(p)];
    for (int q = 0; q < f.Q; ++q) pt.b[q] = row[lead + 5 + static_cast<std::size_t>(f.P + q)];
    f.points.push_back(std::move(pt));
  }
  out.config_hash = table.config_hash.empty() ? out.config_hash : table.config_hash;
  return out;
}

// --------------------------------------------------------------------------
// LWS dump

inline std::string lws_csv(const SymmetricField& s, const std::string& hash) {
  const int D = s.dim();
  std::string out = "# config_hash=" + hash + "\nscale,k";
  for (int r = 0; r < D; ++r) {
    for (int c = r; c < D; ++c) out += ",s_" + std::to_string(r + 1) + "_" + std::to_string(c + 1);
  }
  out += '\n';
  for (int j = 1; j <= s.num_scales(); ++j) {
    for (int k = 0; k < s.length(); ++k) {
      out += std::to_string(j) + "," + std::to_string(k);
      const auto p = s.packed(j, k);
      for (Eigen::Index i = 0; i < p.size(); ++i) out += "," + format_double(p[i]);
      out += '\n';
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Spectral specifications
//
// {"id": "...", "P": 2, "Q": 1, "num_scales": 2,
//  "scales": {"2": [{"u_start": 0.0, "matrix": [[...], ...]}, ...]}}

inline LwsSpec spec_from_json(const json& j) {
  LwsSpec spec;
  try {
    spec.id = j.value("id", std::string{"custom"});
    spec.P = j.at("P").get<int>();
    spec.Q = j.at("Q").get<int>();
    spec.num_scales = j.at("num_scales").get<int>();
    for (const auto& [key, pieces] : j.at("scales").items()) {
      int scale = 0;
      const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), scale);
      if (ec != std::errc() || ptr != key.data() + key.size()) {
        throw Error(Errc::parse, "spec: scale key '" + key + "' is not an integer");
      }
      auto& out = spec.scales[scale];
      for (const auto& piece : pieces) {
        const auto rows = piece.at("matrix").get<std::vector<std::vector<double>>>();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (static_cast<Eigen::Index>(rows[r].size()) != m.cols()) {
            throw Error(Errc::parse, "spec: ragged matrix at scale " + key);
          }
          for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
        out.push_back({piece.at("u_start").get<double>(), m});
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

inline json to_json(const LwsSpec& spec) {
  json scales = json::object();
  for (const auto& [j, pieces] : spec.scales) {
    json arr = json::array();
    for (const auto& piece : pieces) {
      std::vector<std::vector<double>> rows(static_cast<std::size_t>(piece.matrix.rows()));
      for (Eigen::Index r = 0; r < piece.matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < piece.matrix.cols(); ++c) rows[static_cast<std::size_t>(r)].push_back(piece.matrix(r, c));
      }
      arr.push_back({{"u_start", piece.u_start}, {"matrix", rows}});
    }
    scales[std::to_string(j)] = arr;
  }
  return json{{"id", spec.id}, {"P", spec.P}, {"Q", spec.Q}, {"num_scales", spec.num_scales}, {"scales", scales}};
}

// --------------------------------------------------------------------------
// Permutation reports

inline json to_json(const PermTestReport& r, bool with_distribution) {
  json j{{"scale", r.scale},
         {"t_star", r.t_star},
         {"window", r.window},
         {"n_perm", r.n_perm},
         {"seed", r.seed},
         {"T_obs", r.t_obs},
         {"exceedances", r.exceedances},
         {"p_value", r.p_value},
         {"corrected", r.corrected},
         {"median_difference", r.median_difference},
         {"window_first", r.window_first},
         {"window_last", r.window_last}};
  if (with_distribution) j["perm_stats"] = r.perm_stats;
  return j;
}

/// Rows = scales, columns = probe times, cells "median_difference (p)".
inline std::string summary_table(const std::vector<int>& scales, const std::vector<double>& probes,
                                 const std::vector<PermTestReport>& reports, const std::string& hash) {
  std::string out = "# config_hash=" + hash + "\nscale";
  char buf[64];
  for (double t : probes) {
    std::snprintf(buf, sizeof buf, ",t=%gs", t);
    out += buf;
  }
  out += '\n';
  for (std::size_t s = 0; s < scales.size(); ++s) {
    out += std::to_string(scales[s]);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const auto& r = reports[s * probes.size() + i];
      std::snprintf(buf, sizeof buf, ",%.3f (%.3f)", r.median_difference, r.p_value);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace wavecancoh::io

#endif  // WAVECANCOH_IO_HPP
