#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ads/field.hpp"
#include "ads/mcwf.hpp"

namespace ads {

// Shortest decimal that round-trips, independent of the C locale.
std::string format_double(double v);

inline constexpr const char* kTimeseriesHeader =
    "t_ms,p1,p2,p3,xbar_um,v_um_per_ms,v_fd_um_per_ms,photon,dark_pop,norm,se_p1,se_p3";

std::string format_timeseries_csv(const EnsembleResult& r);
void write_timeseries_csv(const std::string& path, const EnsembleResult& r);

struct TimeseriesTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
// Strict reader: the header must match kTimeseriesHeader exactly.
TimeseriesTable read_timeseries_csv(const std::string& path);

inline constexpr const char* kSweepHeader = "value,T,final_p1,final_p3,jumps_mean";

struct SweepRow {
  double value = 0;
  double transmission = 0;
  double final_p1 = 0, final_p3 = 0;
  double jumps_mean = 0;
  std::string error;  // non-empty when the point failed; numeric columns are then nan
};

std::string format_sweep_csv(const std::vector<SweepRow>& rows);
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

// One ADS1 file per ensemble-mean snapshot, named snapshot_<index>.bin.
std::vector<std::string> write_snapshots(const std::string& directory, const Grid& grid,
                                         const std::vector<DensitySnapshotMean>& snapshots);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t v);

// Writes text to path through a temporary file and a rename.
void write_text_file(const std::string& path, std::string_view text);

}  // namespace ads
