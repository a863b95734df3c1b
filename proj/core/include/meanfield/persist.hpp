#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mf {

using Cell = std::variant<std::int64_t, double, std::string>;

/// Rows of one study run. Columns are fixed per study; each row is one
/// (parameter tuple, time) point.
struct StudyResult {
  std::string study;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// Derived diagnostics (slopes, spreads, pass flags) kept in the sidecar.
  std::vector<std::pair<std::string, double>> summary;
  std::string metric;
  std::string config_json;
  double wall_seconds = 0.0;

  /// Appends a row; throws PersistenceError on a width mismatch.
  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string& name) const;
  /// Numeric view of a column (integers widened, text rejected).
  std::vector<double> column(const std::string& name) const;
  double summary_value(const std::string& name) const;
};

std::string library_version();

/// CSV text: header line, then one line per row. Reals are printed with 17
/// significant digits; non-finite values as nan / inf / -inf.
std::string to_csv(const StudyResult& result);

/// Writes <dir>/<stem>.csv and <dir>/<stem>.json. The sidecar carries the
/// config, its digest, the CSV digest, the summary, the version, the wall
/// time and a timestamp. Returns the CSV path.
std::string persist_study(const StudyResult& result, const std::string& dir, const std::string& stem);

/// Reads both files back; throws PersistenceError on digest mismatch or
/// malformed content.
StudyResult load_study(const std::string& dir, const std::string& stem);

/// N-body trajectory container.
///
/// Layout (little-endian): "BBGK", u32 version, u32 d, u32 n, u32 N, f64 dt,
/// u64 frame count, f64 box, then one f64 time per frame, then the frames as
/// interleaved float32 (re, im) pairs of M^N entries each.
struct TrajectoryFile {
  static constexpr std::uint32_t kVersion = 1;
  std::uint32_t dim = 1;
  std::uint32_t points = 4;
  std::uint32_t particles = 1;
  double dt = 0.0;
  double box = 1.0;
  std::vector<double> times;
  std::vector<std::vector<std::complex<float>>> frames;

  friend bool operator==(const TrajectoryFile&, const TrajectoryFile&) = default;
};

void save_trajectory(const TrajectoryFile& file, const std::string& path);
/// Throws PersistenceError with "bad magic", a version mismatch, or a
/// truncation message.
TrajectoryFile load_trajectory(const std::string& path);

}  // namespace mf
