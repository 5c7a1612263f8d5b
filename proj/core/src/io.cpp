/*
 * rstar: desk-scale 4D cone-beam CT artifact laboratory
 *
 * Copyright 2026 the rstar developers
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rstar/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "binio.hpp"

namespace rstar {

namespace {

constexpr std::uint32_t kMaxDim = 1u << 16;
constexpr std::uint32_t kMaxViews = 1u << 20;

using detail::Reader;
using detail::Writer;

}  // namespace

void write_volume(const std::filesystem::path& path, const Volume3D& vol) {
  const GridSpec& g = vol.grid();
  if (g.nx <= 0 || g.ny <= 0 || g.nz <= 0)
    throw DomainError("write_volume: empty grid");
  Writer w(path);
  w.raw("RSV1", 4);
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(g.nz));
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(g.ny));
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(g.nx));
  w.scalar<float>(static_cast<float>(g.spacing.z));
  w.scalar<float>(static_cast<float>(g.spacing.y));
  w.scalar<float>(static_cast<float>(g.spacing.x));
  w.scalar<float>(static_cast<float>(g.origin.z));
  w.scalar<float>(static_cast<float>(g.origin.y));
  w.scalar<float>(static_cast<float>(g.origin.x));
  w.raw(vol.data().data(), vol.data().size() * sizeof(float));
  w.close();
}

Volume3D read_volume(const std::filesystem::path& path) {
  Reader r(path);
  r.expect_magic("RSV1");
  const std::uint32_t nz = r.scalar<std::uint32_t>();
  const std::uint32_t ny = r.scalar<std::uint32_t>();
  const std::uint32_t nx = r.scalar<std::uint32_t>();
  if (nz == 0 || ny == 0 || nx == 0 || nz > kMaxDim || ny > kMaxDim || nx > kMaxDim)
    throw IntegrityError("implausible volume dimensions in " + r.path());
  GridSpec g;
  g.nz = static_cast<int>(nz);
  g.ny = static_cast<int>(ny);
  g.nx = static_cast<int>(nx);
  g.spacing.z = r.scalar<float>();
  g.spacing.y = r.scalar<float>();
  g.spacing.x = r.scalar<float>();
  g.origin.z = r.scalar<float>();
  g.origin.y = r.scalar<float>();
  g.origin.x = r.scalar<float>();
  if (!(g.spacing.x > 0.0 && g.spacing.y > 0.0 && g.spacing.z > 0.0))
    throw IntegrityError("non-positive voxel spacing in " + r.path());
  Volume3D vol(g);
  r.raw(vol.data().data(), vol.data().size() * sizeof(float));
  r.expect_eof();
  return vol;
}

void write_projections(const std::filesystem::path& path, const ProjectionSet& proj) {
  const ScanGeometry& g = proj.geometry();
  g.validate();
  Writer w(path);
  w.raw("RSP1", 4);
  w.scalar<double>(g.sad);
  w.scalar<double>(g.sdd);
  w.scalar<double>(g.det_width);
  w.scalar<double>(g.det_height);
  w.scalar<std::uint32_t>(g.nu);
  w.scalar<std::uint32_t>(g.nv);
  w.scalar<double>(g.offset_u);
  w.scalar<std::uint32_t>(g.views_per_turn);
  w.scalar<double>(g.rotation_time);
  w.scalar<double>(g.start_angle);
  w.scalar<std::int32_t>(g.direction);
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(proj.view_count()));
  for (std::size_t i = 0; i < proj.view_count(); ++i) {
    const ViewInfo& v = proj.view(i);
    w.scalar<double>(v.angle);
    w.scalar<double>(v.time);
    w.scalar<std::int32_t>(v.phase);
  }
  w.raw(proj.data().data(), proj.data().size() * sizeof(float));
  w.close();
}

ProjectionSet read_projections(const std::filesystem::path& path) {
  Reader r(path);
  r.expect_magic("RSP1");
  ScanGeometry g;
  g.sad = r.scalar<double>();
  g.sdd = r.scalar<double>();
  g.det_width = r.scalar<double>();
  g.det_height = r.scalar<double>();
  g.nu = r.scalar<std::uint32_t>();
  g.nv = r.scalar<std::uint32_t>();
  g.offset_u = r.scalar<double>();
  g.views_per_turn = r.scalar<std::uint32_t>();
  g.rotation_time = r.scalar<double>();
  g.start_angle = r.scalar<double>();
  g.direction = r.scalar<std::int32_t>();
  if (g.nu > kMaxDim || g.nv > kMaxDim)
    throw IntegrityError("implausible detector size in " + r.path());
  try {
    g.validate();
  } catch (const DomainError& e) {
    throw IntegrityError(std::string("invalid geometry in ") + r.path() + ": " + e.what());
  }
  const std::uint32_t n_views = r.scalar<std::uint32_t>();
  if (n_views == 0 || n_views > kMaxViews)
    throw IntegrityError("implausible view count in " + r.path());
  ProjectionSet proj(g, n_views);
  for (std::uint32_t i = 0; i < n_views; ++i) {
    ViewInfo& v = proj.view(i);
    v.angle = r.scalar<double>();
    v.time = r.scalar<double>();
    v.phase = r.scalar<std::int32_t>();
  }
  r.raw(proj.data().data(), proj.data().size() * sizeof(float));
  r.expect_eof();
  return proj;
}

namespace {

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_signal_csv(const std::filesystem::path& path,
                      const std::vector<SignalSample>& samples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "time_s,amplitude\n";
  for (const SignalSample& s : samples)
    out << format_g9(s.time) << ',' << format_g9(s.amplitude) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<SignalSample> read_signal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string line;
  if (!std::getline(in, line)) throw IntegrityError("empty signal file: " + path.string());
  std::vector<SignalSample> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    SignalSample s;
    char comma = 0;
    if (!(ls >> s.time >> comma >> s.amplitude) || comma != ',')
      throw IntegrityError("malformed signal row in " + path.string() + ": " + line);
    samples.push_back(s);
  }
  if (samples.empty()) throw IntegrityError("no samples in " + path.string());
  return samples;
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << header << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_g9(row[i]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_pgm16(const std::filesystem::path& path, int width, int height,
                 const std::vector<std::uint16_t>& pixels) {
  if (width <= 0 || height <= 0 ||
      pixels.size() != static_cast<std::size_t>(width) * height)
    throw DomainError("write_pgm16: size mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << width << ' ' << height << "\n65535\n";
  // PGM stores 16-bit samples most-significant byte first.
  std::vector<unsigned char> bytes(pixels.size() * 2);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    bytes[2 * i] = static_cast<unsigned char>(pixels[i] >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(pixels[i] & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::uint16_t> window_to_u16(const std::vector<float>& img,
                                         double lo, double hi) {
  if (!(hi > lo)) throw DomainError("window_to_u16: need hi > lo");
  std::vector<std::uint16_t> out(img.size());
  const double scale = 65535.0 / (hi - lo);
  for (std::size_t i = 0; i < img.size(); ++i) {
    double v = (img[i] - lo) * scale;
    if (v < 0.0) v = 0.0;
    if (v > 65535.0) v = 65535.0;
    out[i] = static_cast<std::uint16_t>(v + 0.5);
  }
  return out;
}

}  // namespace rstar
