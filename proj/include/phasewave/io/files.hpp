#pragma once

// Field snapshots in the little-endian "PSWF" binary format, CSV time series,
// and atomic file writes.
//
// Snapshot layout:
//   "PSWF" | version u32 | kind u8 | nx u32 | np u32 |
//   x_min f64 | x_max f64 | p_min f64 | p_max f64 | time f64 | payload
// kind 0: wave field, nx*np interleaved (re, im) f64, x outer, p inner
// kind 1: real density, nx*np f64
// kind 2: configuration wavefunction, np = 1, p extents 0, nx (re, im) f64

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "phasewave/core/fields.hpp"

namespace phasewave {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 4 + 4 + 1 + 4 + 4 + 5 * 8;

enum class SnapshotKind : std::uint8_t { wave = 0, density = 1, wavefunction = 2 };

using SnapshotField = std::variant<WaveField, DensityField, ConfigWavefunction>;

struct Snapshot {
  SnapshotField field;
  bool has_nan = false;  // payload contained non-finite values
};

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ValidationError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ValidationError("cannot rename onto '" + path.string() + "'");
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

namespace detail {

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(std::string_view in, std::size_t& pos) {
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

inline std::string snapshot_header(SnapshotKind kind, std::uint32_t nx, std::uint32_t np, double x_min,
                                   double x_max, double p_min, double p_max, double time) {
  std::string out("PSWF");
  put(out, kSnapshotVersion);
  put(out, static_cast<std::uint8_t>(kind));
  put(out, nx);
  put(out, np);
  for (double v : {x_min, x_max, p_min, p_max, time}) put(out, v);
  return out;
}

inline void put_complex(std::string& out, std::span<const cd> v) {
  const std::size_t start = out.size();
  out.resize(start + v.size() * 16);
  std::memcpy(out.data() + start, v.data(), v.size() * 16);
}

}  // namespace detail

inline std::string encode_snapshot(const WaveField& f) {
  const PhaseGrid& g = f.grid();
  std::string out = detail::snapshot_header(SnapshotKind::wave, g.nx(), g.np(), g.x_axis().min(),
                                            g.x_axis().max(), g.p_axis().min(), g.p_axis().max(), f.time());
  detail::put_complex(out, f.values());
  return out;
}

inline std::string encode_snapshot(const DensityField& f) {
  const PhaseGrid& g = f.grid();
  std::string out = detail::snapshot_header(SnapshotKind::density, g.nx(), g.np(), g.x_axis().min(),
                                            g.x_axis().max(), g.p_axis().min(), g.p_axis().max(), f.time());
  const std::size_t start = out.size();
  out.resize(start + f.values().size() * 8);
  std::memcpy(out.data() + start, f.values().data(), f.values().size() * 8);
  return out;
}

inline std::string encode_snapshot(const ConfigWavefunction& f) {
  const Axis& a = f.axis();
  std::string out =
      detail::snapshot_header(SnapshotKind::wavefunction, a.size(), 1, a.min(), a.max(), 0.0, 0.0, f.time());
  detail::put_complex(out, f.values());
  return out;
}

inline Snapshot decode_snapshot(std::string_view bytes) {
  if (bytes.size() < kSnapshotHeaderBytes)
    throw FormatError("snapshot header needs " + std::to_string(kSnapshotHeaderBytes) + " bytes, file has " +
                      std::to_string(bytes.size()));
  if (bytes.substr(0, 4) != "PSWF") throw FormatError("bad magic '" + std::string(bytes.substr(0, 4)) + "'");
  std::size_t pos = 4;
  const auto version = detail::get<std::uint32_t>(bytes, pos);
  if (version != kSnapshotVersion)
    throw FormatError("unsupported snapshot version " + std::to_string(version) + " (expected " +
                      std::to_string(kSnapshotVersion) + ")");
  const auto kind = detail::get<std::uint8_t>(bytes, pos);
  const auto nx = detail::get<std::uint32_t>(bytes, pos);
  const auto np = detail::get<std::uint32_t>(bytes, pos);
  double ext[5];
  for (double& e : ext) e = detail::get<double>(bytes, pos);
  if (kind > 2) throw FormatError("unknown snapshot kind " + std::to_string(kind));

  const std::uint64_t count = std::uint64_t(nx) * np;
  const std::uint64_t per = kind == 1 ? 8 : 16;
  const std::uint64_t expected = kSnapshotHeaderBytes + count * per;
  if (bytes.size() != expected)
    throw FormatError("snapshot payload size mismatch: expected " + std::to_string(expected) +
                      " bytes, file has " + std::to_string(bytes.size()));
  const char* payload = bytes.data() + kSnapshotHeaderBytes;

  Snapshot snap;
  if (kind == 1) {
    std::vector<double> v(count);
    std::memcpy(v.data(), payload, count * 8);
    for (double x : v) snap.has_nan |= !std::isfinite(x);
    snap.field = DensityField(PhaseGrid(nx, np, ext[0], ext[1], ext[2], ext[3]), std::move(v), ext[4]);
    return snap;
  }
  std::vector<cd> v(count);
  std::memcpy(v.data(), payload, count * 16);
  for (const cd& z : v) snap.has_nan |= !std::isfinite(z.real()) || !std::isfinite(z.imag());
  if (kind == 0) {
    snap.field = WaveField(PhaseGrid(nx, np, ext[0], ext[1], ext[2], ext[3]), std::move(v), ext[4]);
  } else {
    if (np != 1) throw FormatError("wavefunction snapshot must have np = 1");
    snap.field = ConfigWavefunction(Axis(nx, ext[0], ext[1]), std::move(v), ext[4]);
  }
  return snap;
}

template <class Field>
void write_field(const std::filesystem::path& path, const Field& field) {
  write_file_atomic(path, encode_snapshot(field));
}

/// Reads any snapshot kind; has_nan flags a non-finite payload.
inline Snapshot read_field(const std::filesystem::path& path) { return decode_snapshot(read_file(path)); }

/// Reads a snapshot that must hold `Field`.
template <class Field>
Field read_field_as(const std::filesystem::path& path, Diagnostics* diag = nullptr) {
  Snapshot s = read_field(path);
  if (s.has_nan) warn(diag, "snapshot '" + path.string() + "' contains non-finite values");
  if (auto* f = std::get_if<Field>(&s.field)) return std::move(*f);
  throw FormatError("snapshot '" + path.string() + "' holds a different field kind");
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Header row plus numeric rows, shortest round-trip formatting.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row) {
    if (row.size() != columns.size())
      throw ValidationError("CSV row has " + std::to_string(row.size()) + " values, table has " +
                            std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(row));
  }

  std::string str() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
    out += '\n';
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (c) out += ',';
        out += std::isfinite(r[c]) ? format_number(r[c]) : std::string("nan");
      }
      out += '\n';
    }
    return out;
  }
};

}  // namespace phasewave
