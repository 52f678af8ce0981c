#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wsseg/grid.hpp"

namespace wsseg {

// One training unit on disk. Paths are stored as written (resolved against
// the manifest's directory when loaded); weightmap_path is "-" until the
// weights command fills it in.
struct ManifestRecord {
  int index = 0;
  std::string image_path;
  std::string mask_path;
  bool oval = false;  // accuracy flag: true when the mask is a simulated oval
  std::string weightmap_path = "-";
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;
  int k_corrupted = 0;
  std::uint64_t seed = 0;
  int subset_id = 0;
};

// Line format: index<TAB>image<TAB>mask<TAB>accurate|oval<TAB>weightmap
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);

// Indices corrupted for one subset: a slice of a single seed-keyed
// permutation, so subsets 0..s-1 are pairwise disjoint. Throws ConfigError
// when (subset_id+1)*k exceeds the dataset.
std::vector<int> corruption_indices(size_t n_records, int k, std::uint64_t seed, int subset_id);

// Replaces the masks of k drawn records with fitted ovals. Oval PGMs are
// written next to the originals as oval_s<subset>_<index>.pgm; the returned
// manifest flags them. The input records must point at readable masks.
DatasetManifest corrupt_dataset(const DatasetManifest& manifest,
                                const std::filesystem::path& manifest_dir, int k,
                                std::uint64_t seed, int subset_id, double oval_scale = 2.2);

// Resolve a manifest-relative path.
std::filesystem::path resolve(const std::filesystem::path& manifest_dir, const std::string& p);

}  // namespace wsseg
