#include "meanfield/persist.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "meanfield/config.hpp"
#include "meanfield/errors.hpp"

namespace mf {

static_assert(std::endian::native == std::endian::little, "trajectory I/O assumes a little-endian host");

namespace {

using json = nlohmann::ordered_json;

constexpr char kMagic[4] = {'B', 'B', 'G', 'K'};

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_real(*d);
  return format_text(std::get<std::string>(c));
}

const char* cell_type(const Cell& c) {
  if (std::holds_alternative<std::int64_t>(c)) return "int";
  if (std::holds_alternative<double>(c)) return "real";
  return "text";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

Cell parse_cell(const std::string& text, const std::string& type) {
  try {
    if (type == "int") return static_cast<std::int64_t>(std::stoll(text));
    if (type == "real") {
      if (text == "nan") return std::nan("");
      if (text == "inf") return HUGE_VAL;
      if (text == "-inf") return -HUGE_VAL;
      return std::stod(text);
    }
  } catch (const std::exception&) {
    throw PersistenceError("malformed " + type + " cell '" + text + "'");
  }
  return text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw PersistenceError("write failed for " + path);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <class T>
void put(std::string& out, const T& v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}

  template <class T>
  T get() {
    T v{};
    take(&v, sizeof(T));
    return v;
  }

  void take(void* dst, std::size_t n) {
    if (bytes_.size() - pos_ < n) throw PersistenceError("truncated trajectory file");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void StudyResult::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw PersistenceError("row has " + std::to_string(row.size()) + " cells, expected " +
                           std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::size_t StudyResult::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw PersistenceError("no column named " + name);
}

std::vector<double> StudyResult::column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (const auto* i = std::get_if<std::int64_t>(&row[c])) {
      out.push_back(static_cast<double>(*i));
    } else if (const auto* d = std::get_if<double>(&row[c])) {
      out.push_back(*d);
    } else {
      throw PersistenceError("column " + name + " is not numeric");
    }
  }
  return out;
}

double StudyResult::summary_value(const std::string& name) const {
  for (const auto& [k, v] : summary) {
    if (k == name) return v;
  }
  throw PersistenceError("no summary entry named " + name);
}

std::string library_version() { return "0.1.0"; }

std::string to_csv(const StudyResult& result) {
  std::string out;
  for (std::size_t i = 0; i < result.columns.size(); ++i) {
    if (i > 0) out += ',';
    out += format_text(result.columns[i]);
  }
  out += '\n';
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string persist_study(const StudyResult& result, const std::string& dir, const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw PersistenceError("cannot create output directory " + dir + ": " + ec.message());
  const std::string csv = to_csv(result);
  json side;
  side["study"] = result.study;
  side["version"] = library_version();
  side["metric"] = result.metric;
  side["columns"] = result.columns;
  std::vector<std::string> types;
  if (!result.rows.empty()) {
    for (const auto& c : result.rows.front()) types.emplace_back(cell_type(c));
  }
  side["column_types"] = types;
  side["row_count"] = result.rows.size();
  side["csv_digest"] = fnv1a_hex(csv);
  side["config_digest"] = fnv1a_hex(result.config_json);
  json summary = json::object();
  for (const auto& [k, v] : result.summary) summary[k] = std::isfinite(v) ? json(v) : json(format_real(v));
  side["summary"] = summary;
  side["config"] = result.config_json.empty() ? json(nullptr) : json::parse(result.config_json);
  side["config_text"] = result.config_json;
  side["wall_seconds"] = result.wall_seconds;
  side["timestamp"] = utc_timestamp();

  const std::string base = (std::filesystem::path(dir) / stem).string();
  write_file(base + ".csv", csv);
  write_file(base + ".json", side.dump(2) + "\n");
  return base + ".csv";
}

StudyResult load_study(const std::string& dir, const std::string& stem) {
  const std::string base = (std::filesystem::path(dir) / stem).string();
  const std::string csv = read_file(base + ".csv");
  json side;
  try {
    side = json::parse(read_file(base + ".json"));
  } catch (const json::parse_error& e) {
    throw PersistenceError(std::string("malformed sidecar: ") + e.what());
  }
  StudyResult r;
  try {
    if (fnv1a_hex(csv) != side.at("csv_digest").get<std::string>()) {
      throw PersistenceError("CSV digest mismatch for " + base);
    }
    r.study = side.at("study").get<std::string>();
    r.metric = side.at("metric").get<std::string>();
    r.config_json = side.at("config_text").get<std::string>();
    if (fnv1a_hex(r.config_json) != side.at("config_digest").get<std::string>()) {
      throw PersistenceError("config digest mismatch for " + base);
    }
    r.wall_seconds = side.at("wall_seconds").get<double>();
    for (auto it = side.at("summary").begin(); it != side.at("summary").end(); ++it) {
      const double v = it->is_string() ? std::get<double>(parse_cell(it->get<std::string>(), "real"))
                                       : it->get<double>();
      r.summary.emplace_back(it.key(), v);
    }
    const auto types = side.at("column_types").get<std::vector<std::string>>();
    std::istringstream lines(csv);
    std::string line;
    if (!std::getline(lines, line)) throw PersistenceError("empty CSV file " + base);
    r.columns = split_csv_line(line);
    while (std::getline(lines, line)) {
      const auto cells = split_csv_line(line);
      if (cells.size() != r.columns.size() || types.size() != cells.size()) {
        throw PersistenceError("CSV row width mismatch in " + base);
      }
      std::vector<Cell> row;
      for (std::size_t i = 0; i < cells.size(); ++i) row.push_back(parse_cell(cells[i], types[i]));
      r.rows.push_back(std::move(row));
    }
    if (r.rows.size() != side.at("row_count").get<std::size_t>()) {
      throw PersistenceError("row count mismatch for " + base);
    }
  } catch (const json::exception& e) {
    throw PersistenceError(std::string("malformed sidecar: ") + e.what());
  }
  return r;
}

void save_trajectory(const TrajectoryFile& file, const std::string& path) {
  std::size_t entries = 0;
  if (!file.frames.empty()) entries = file.frames.front().size();
  if (file.times.size() != file.frames.size()) throw PersistenceError("times and frames differ in count");
  for (const auto& f : file.frames) {
    if (f.size() != entries) throw PersistenceError("trajectory frames differ in size");
  }
  std::string out;
  out.append(kMagic, 4);
  put(out, TrajectoryFile::kVersion);
  put(out, file.dim);
  put(out, file.points);
  put(out, file.particles);
  put(out, file.dt);
  put(out, static_cast<std::uint64_t>(file.frames.size()));
  put(out, file.box);
  for (double t : file.times) put(out, t);
  for (const auto& f : file.frames) {
    out.append(reinterpret_cast<const char*>(f.data()), f.size() * sizeof(std::complex<float>));
  }
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  write_file(path, out);
}

TrajectoryFile load_trajectory(const std::string& path) {
  const std::string bytes = read_file(path);
  ByteReader in(bytes);
  char magic[4];
  if (bytes.size() < 4) throw PersistenceError("truncated trajectory file");
  in.take(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw PersistenceError("bad magic");
  const auto version = in.get<std::uint32_t>();
  if (version != TrajectoryFile::kVersion) {
    throw PersistenceError("trajectory version mismatch: file has " + std::to_string(version) + ", expected " +
                           std::to_string(TrajectoryFile::kVersion));
  }
  TrajectoryFile f;
  f.dim = in.get<std::uint32_t>();
  f.points = in.get<std::uint32_t>();
  f.particles = in.get<std::uint32_t>();
  f.dt = in.get<double>();
  const auto count = in.get<std::uint64_t>();
  f.box = in.get<double>();
  if ((f.dim != 1 && f.dim != 3) || f.points < 1 || f.particles < 1 || f.particles > 16) {
    throw PersistenceError("trajectory header is inconsistent");
  }
  std::uint64_t entries = 1;
  const std::uint64_t m = static_cast<std::uint64_t>(std::pow(f.points, f.dim));
  for (std::uint32_t p = 0; p < f.particles; ++p) {
    if (entries > (std::uint64_t{1} << 40) / m) throw PersistenceError("trajectory header is inconsistent");
    entries *= m;
  }
  const std::uint64_t need = count * (8 + entries * sizeof(std::complex<float>));
  if (count > bytes.size() || need > bytes.size()) throw PersistenceError("truncated trajectory file");
  f.times.resize(count);
  for (auto& t : f.times) t = in.get<double>();
  f.frames.resize(count);
  for (auto& frame : f.frames) {
    frame.resize(entries);
    in.take(frame.data(), entries * sizeof(std::complex<float>));
  }
  if (!in.done()) throw PersistenceError("trailing bytes after trajectory frames");
  return f;
}

}  // namespace mf
