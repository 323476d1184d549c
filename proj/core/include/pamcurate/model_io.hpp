#pragma once

#include <filesystem>

#include "pamcurate/hkmeans.hpp"

namespace pamcurate {

/// Hierarchy model file layout (little-endian):
///
///   "PAMHKM01"  magic
///   u32 levels, u32 dim, u8 normalized
///   per level: u32 k, k x dim f32 centroids, k x u64 counts
///   per level except the coarsest: k x u32 parent indices
void write_model(const ClusterHierarchy& hierarchy, const std::filesystem::path& path);
ClusterHierarchy read_model(const std::filesystem::path& path);

}  // namespace pamcurate
