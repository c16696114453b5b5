#include "blochflow/writers.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "blochflow/errors.hpp"
#include "blochflow/textutil.hpp"

namespace blochflow {

void lint_column_name(const std::string& name) {
  static const char* literals[] = {"run_id", "kt_over_g", "quantity", "unit", "n"};
  for (const char* l : literals)
    if (name == l) return;
  static const char* suffixes[] = {"_angstrom", "_aainv",        "_ev", "_ev_per_angstrom",
                                   "_kev",      "_norm", "_index"};
  for (const char* s : suffixes) {
    std::string suf(s);
    if (name.size() > suf.size() &&
        name.compare(name.size() - suf.size(), suf.size(), suf) == 0)
      return;
  }
  throw NumericError("column name without a unit suffix: " + name);
}

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw NumericError("cannot open output file: " + path);
  return out;
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
  auto out = open_out(path, true);
  out << content;
  if (!out) throw NumericError("write failed: " + path);
}

void write_trajectories_csv(const std::string& path, const std::string& run_id,
                            const std::vector<Trajectory>& trajectories,
                            const RecordFlags& record) {
  std::vector<std::string> cols = {"run_id", "seed_index", "z_angstrom",
                                   "x_angstrom", "y_angstrom"};
  if (record.psi2) cols.push_back("psi2_norm");
  if (record.speed) cols.push_back("speed_aainv");
  if (record.q) cols.push_back("q_ev");
  for (const auto& c : cols) lint_column_name(c);

  auto out = open_out(path);
  for (std::size_t i = 0; i < cols.size(); ++i)
    out << (i ? "," : "") << cols[i];
  out << "\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("nan");
  };
  for (std::size_t s = 0; s < trajectories.size(); ++s) {
    for (const auto& p : trajectories[s].points) {
      out << run_id << "," << s << "," << format_double(p.r.z()) << ","
          << format_double(p.r.x()) << "," << format_double(p.r.y());
      if (record.psi2) out << "," << opt(p.psi2);
      if (record.speed) out << "," << opt(p.speed);
      if (record.q) out << "," << opt(p.q_ev);
      out << "\n";
    }
  }
  if (!out) throw NumericError("write failed: " + path);
}

void write_field_text(const std::string& path, const std::string& run_id,
                      const FieldGrid& grid) {
  for (const char* k : {"quantity", "unit", "n", "extent_angstrom", "z_angstrom",
                        "run_id"})
    lint_column_name(k);
  auto out = open_out(path);
  out << "# quantity = " << grid.quantity << "\n";
  out << "# unit = " << grid.unit_suffix << "\n";
  out << "# n = " << grid.n << "\n";
  out << "# extent_angstrom = " << format_double(grid.extent) << "\n";
  out << "# z_angstrom = " << format_double(grid.z) << "\n";
  out << "# run_id = " << run_id << "\n";
  for (int iy = 0; iy < grid.n; ++iy) {
    for (int ix = 0; ix < grid.n; ++ix)
      out << (ix ? " " : "")
          << format_double(grid.values[std::size_t(iy) * grid.n + ix]);
    out << "\n";
  }
  if (!out) throw NumericError("write failed: " + path);
}

std::string beam_column_name(const std::array<int, 3>& hkl) {
  auto part = [](int v) {
    return v < 0 ? "m" + std::to_string(-v) : std::to_string(v);
  };
  return "i_" + part(hkl[0]) + "_" + part(hkl[1]) + "_" + part(hkl[2]) + "_norm";
}

void write_curve_csv(const std::string& path, const std::string& x_name,
                     const std::vector<double>& xs,
                     const std::vector<std::array<int, 3>>& beams,
                     const std::vector<std::vector<double>>& rows) {
  if (xs.size() != rows.size())
    throw NumericError("curve rows do not match the abscissa");
  lint_column_name(x_name);
  auto out = open_out(path);
  out << x_name;
  for (const auto& b : beams) {
    auto col = beam_column_name(b);
    lint_column_name(col);
    out << "," << col;
  }
  out << "\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (rows[i].size() != beams.size())
      throw NumericError("curve row width does not match the beam list");
    out << format_double(xs[i]);
    for (double v : rows[i]) out << "," << format_double(v);
    out << "\n";
  }
  if (!out) throw NumericError("write failed: " + path);
}

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(char((v >> 24) & 0xff));
  s.push_back(char((v >> 16) & 0xff));
  s.push_back(char((v >> 8) & 0xff));
  s.push_back(char(v & 0xff));
}

void put_chunk(std::string& png, const char type[4], const std::string& data) {
  put_u32(png, std::uint32_t(data.size()));
  std::string body(type, 4);
  body += data;
  png += body;
  auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                   uInt(body.size()));
  put_u32(png, std::uint32_t(crc));
}

}  // namespace

void write_field_png(const std::string& path, const FieldGrid& grid) {
  const int n = grid.n;
  double lo = 0, hi = 0;
  bool any = false;
  for (double v : grid.values) {
    if (!std::isfinite(v)) continue;
    if (!any || v < lo) lo = v;
    if (!any || v > hi) hi = v;
    any = true;
  }
  const double span = (any && hi > lo) ? hi - lo : 1.0;

  // raw scanlines, filter 0, top row is the largest y
  std::string raw;
  raw.reserve(std::size_t(n) * (n + 1));
  for (int iy = n - 1; iy >= 0; --iy) {
    raw.push_back('\0');
    for (int ix = 0; ix < n; ++ix) {
      double v = grid.values[std::size_t(iy) * n + ix];
      int px = std::isfinite(v)
                   ? int(std::lround((v - lo) / span * 255.0))
                   : 0;
      raw.push_back(char(std::clamp(px, 0, 255)));
    }
  }

  uLongf bound = compressBound(uLong(raw.size()));
  std::string compressed(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()), uLong(raw.size()),
                9) != Z_OK)
    throw NumericError("deflate failed for " + path);
  compressed.resize(bound);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put_u32(ihdr, std::uint32_t(n));
  put_u32(ihdr, std::uint32_t(n));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // adaptive filtering
  ihdr.push_back(0);   // no interlace
  put_chunk(png, "IHDR", ihdr);
  put_chunk(png, "IDAT", compressed);
  put_chunk(png, "IEND", "");

  write_text_file(path, png);
}

}  // namespace blochflow
