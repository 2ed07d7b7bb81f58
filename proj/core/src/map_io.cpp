/*
 * Copyright 2026 The avmap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "avmap/map_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace avmap {
namespace {

constexpr char kMagic[4] = {'A', 'V', 'M', '1'};

static_assert(std::endian::native == std::endian::little,
              "map files are little-endian; byte-swapping writer not implemented");

template <typename T>
void put(std::ostream& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

void write_header(std::ostream& out, const VoxelGrid& grid, MapPayloadKind kind) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.nx()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.ny()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.nz()));
  put<double>(out, grid.resolution());
  put<double>(out, grid.origin().x);
  put<double>(out, grid.origin().y);
  put<double>(out, grid.origin().z);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(kind));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("map_io: cannot open for writing: " + path.string());
  return out;
}

struct Header {
  VoxelGrid grid;
  MapPayloadKind kind;
};

Header read_header(std::istream& in, const std::filesystem::path& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("map_io: bad magic in " + path.string());
  }
  const auto nx = get<std::uint32_t>(in);
  const auto ny = get<std::uint32_t>(in);
  const auto nz = get<std::uint32_t>(in);
  const auto res = get<double>(in);
  Vec3 origin;
  origin.x = get<double>(in);
  origin.y = get<double>(in);
  origin.z = get<double>(in);
  const auto kind = get<std::uint8_t>(in);
  if (!in || kind > 2) throw std::runtime_error("map_io: truncated or bad header in " + path.string());
  constexpr std::uint32_t kMaxDim = 1u << 24;
  if (nx == 0 || ny == 0 || nz == 0 || nx > kMaxDim || ny > kMaxDim || nz > kMaxDim ||
      !(res > 0.0)) {
    throw std::runtime_error("map_io: implausible header values in " + path.string());
  }
  return {VoxelGrid(static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nz), res, origin),
          static_cast<MapPayloadKind>(kind)};
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("map_io: cannot open for reading: " + path.string());
  return in;
}

void check_payload_read(std::istream& in, const std::filesystem::path& path) {
  if (!in) throw std::runtime_error("map_io: truncated payload in " + path.string());
}

}  // namespace

void save_map(const std::filesystem::path& path, const GroundTruthMap& map) {
  auto out = open_out(path);
  write_header(out, map.grid, MapPayloadKind::kLabels);
  for (const Occupancy l : map.labels) put<std::int8_t>(out, static_cast<std::int8_t>(l));
  if (!out) throw std::runtime_error("map_io: write failed: " + path.string());
}

void save_map(const std::filesystem::path& path, const ConfidenceMap& map) {
  auto out = open_out(path);
  write_header(out, map.grid, MapPayloadKind::kConfidence);
  for (const double c : map.confidence) put<float>(out, static_cast<float>(c));
  if (!out) throw std::runtime_error("map_io: write failed: " + path.string());
}

void save_map(const std::filesystem::path& path, const EvidenceMap& map) {
  auto out = open_out(path);
  write_header(out, map.grid, MapPayloadKind::kEvidence);
  for (const Evidence e : map.evidence) put<std::uint8_t>(out, static_cast<std::uint8_t>(e));
  if (!out) throw std::runtime_error("map_io: write failed: " + path.string());
}

MapPayloadKind probe_map_kind(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_header(in, path).kind;
}

GroundTruthMap load_ground_truth(const std::filesystem::path& path) {
  auto in = open_in(path);
  const Header h = read_header(in, path);
  if (h.kind != MapPayloadKind::kLabels) {
    throw std::runtime_error("map_io: not a label map: " + path.string());
  }
  GroundTruthMap map(h.grid);
  for (auto& l : map.labels) {
    const auto v = get<std::int8_t>(in);
    if (v != -1 && v != 0 && v != 1) {
      throw std::runtime_error("map_io: bad label value in " + path.string());
    }
    l = static_cast<Occupancy>(v);
  }
  check_payload_read(in, path);
  return map;
}

ConfidenceMap load_confidence(const std::filesystem::path& path) {
  auto in = open_in(path);
  const Header h = read_header(in, path);
  if (h.kind != MapPayloadKind::kConfidence) {
    throw std::runtime_error("map_io: not a confidence map: " + path.string());
  }
  ConfidenceMap map(h.grid);
  for (auto& c : map.confidence) c = static_cast<double>(get<float>(in));
  check_payload_read(in, path);
  return map;
}

EvidenceMap load_evidence(const std::filesystem::path& path) {
  auto in = open_in(path);
  const Header h = read_header(in, path);
  if (h.kind != MapPayloadKind::kEvidence) {
    throw std::runtime_error("map_io: not an evidence map: " + path.string());
  }
  EvidenceMap map(h.grid);
  for (auto& e : map.evidence) {
    const auto v = get<std::uint8_t>(in);
    if (v > 2) throw std::runtime_error("map_io: bad evidence value in " + path.string());
    e = static_cast<Evidence>(v);
  }
  check_payload_read(in, path);
  return map;
}

}  // namespace avmap
