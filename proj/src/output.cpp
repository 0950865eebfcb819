#include "ads/output.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ads {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_timeseries_csv(const EnsembleResult& r) {
  std::string out = kTimeseriesHeader;
  out += '\n';
  for (std::size_t i = 0; i < r.time_grid.size(); ++i) {
    const double row[] = {r.time_grid[i],  r.p1.mean[i],   r.p2.mean[i],     r.p3.mean[i],
                          r.xbar.mean[i],  r.v.mean[i],    r.v_fd[i],        r.photon.mean[i],
                          r.dark_pop.mean[i], r.norm.mean[i], r.p1.se[i],    r.p3.se[i]};
    for (std::size_t c = 0; c < std::size(row); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, std::string_view text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp);
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!os) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void write_timeseries_csv(const std::string& path, const EnsembleResult& r) {
  write_text_file(path, format_timeseries_csv(r));
}

namespace {

double parse_cell(std::string_view s, const std::string& where) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error(where + ": not a number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

TimeseriesTable read_timeseries_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path + ": empty file");
  if (line != kTimeseriesHeader) throw std::runtime_error(path + ": unexpected header '" + line + "'");
  TimeseriesTable t;
  for (auto c : split(line)) t.columns.emplace_back(c);
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.columns.size())
      throw std::runtime_error(path + ":" + std::to_string(n) + ": wrong column count");
    std::vector<double> row;
    for (auto c : cells) row.push_back(parse_cell(c, path + ":" + std::to_string(n)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = kSweepHeader;
  out += '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows) {
    const bool ok = r.error.empty();
    const double cells[] = {r.value, ok ? r.transmission : nan, ok ? r.final_p1 : nan,
                            ok ? r.final_p3 : nan, ok ? r.jumps_mean : nan};
    for (std::size_t c = 0; c < std::size(cells); ++c) {
      if (c) out += ',';
      out += format_double(cells[c]);
    }
    out += '\n';
  }
  return out;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  write_text_file(path, format_sweep_csv(rows));
}

std::vector<std::string> write_snapshots(const std::string& directory, const Grid& grid,
                                         const std::vector<DensitySnapshotMean>& snapshots) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%04zu.bin", i);
    write_density_binary((std::filesystem::path(directory) / name).string(), grid, snapshots[i].t,
                         snapshots[i].densities);
    names.emplace_back(name);
  }
  return names;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return fnv1a64(bytes);
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace ads
