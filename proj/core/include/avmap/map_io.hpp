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

#ifndef AVMAP_MAP_IO_HPP_
#define AVMAP_MAP_IO_HPP_

#include <cstdint>
#include <filesystem>

#include "avmap/grid.hpp"

// Binary map container, one map per file:
//   magic "AVM1"
//   dims          3 x u32, little-endian
//   resolution    f64
//   origin        3 x f64
//   kind          u8   (0 = labels i8, 1 = confidence f32, 2 = evidence u8)
//   payload       voxel_count records in linear index order
// Reading and re-writing a file reproduces it byte for byte.

namespace avmap {

enum class MapPayloadKind : std::uint8_t {
  kLabels = 0,
  kConfidence = 1,
  kEvidence = 2,
};

void save_map(const std::filesystem::path& path, const GroundTruthMap& map);
void save_map(const std::filesystem::path& path, const ConfidenceMap& map);
void save_map(const std::filesystem::path& path, const EvidenceMap& map);

MapPayloadKind probe_map_kind(const std::filesystem::path& path);

GroundTruthMap load_ground_truth(const std::filesystem::path& path);
ConfidenceMap load_confidence(const std::filesystem::path& path);
EvidenceMap load_evidence(const std::filesystem::path& path);

}  // namespace avmap

#endif  // AVMAP_MAP_IO_HPP_
