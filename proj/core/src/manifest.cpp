#include "wsseg/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "wsseg/imageio.hpp"
#include "wsseg/phantom.hpp"
#include "wsseg/rng.hpp"

namespace wsseg {

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open manifest " + path.string());
  DatasetManifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string idx, img, mask, flag, wm;
    if (!std::getline(ss, idx, '\t') || !std::getline(ss, img, '\t') ||
        !std::getline(ss, mask, '\t') || !std::getline(ss, flag, '\t') ||
        !std::getline(ss, wm, '\t')) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 5 tab-separated fields");
    }
    ManifestRecord r;
    try {
      r.index = std::stoi(idx);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad index '" + idx + "'");
    }
    r.image_path = img;
    r.mask_path = mask;
    if (flag == "oval") {
      r.oval = true;
    } else if (flag == "accurate") {
      r.oval = false;
    } else {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad flag '" + flag +
                        "' (expected accurate|oval)");
    }
    r.weightmap_path = wm;
    m.records.push_back(std::move(r));
  }
  m.k_corrupted = static_cast<int>(
      std::count_if(m.records.begin(), m.records.end(), [](const auto& r) { return r.oval; }));
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("cannot open manifest " + path.string() + " for writing");
  for (const auto& r : m.records) {
    f << r.index << '\t' << r.image_path << '\t' << r.mask_path << '\t'
      << (r.oval ? "oval" : "accurate") << '\t' << r.weightmap_path << '\n';
  }
  if (!f) throw FormatError("short write to " + path.string());
}

std::vector<int> corruption_indices(size_t n_records, int k, std::uint64_t seed, int subset_id) {
  if (k < 0 || subset_id < 0) throw ConfigError("corruption_indices: k and subset_id must be >= 0");
  const size_t need = static_cast<size_t>(subset_id + 1) * static_cast<size_t>(k);
  if (need > n_records) {
    throw ConfigError("corruption_indices: disjoint subsets need " + std::to_string(need) +
                      " records, dataset has " + std::to_string(n_records));
  }
  std::vector<int> perm(n_records);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed_for(seed, 0x636f7272ULL));
  rng.shuffle(perm);
  std::vector<int> out(perm.begin() + static_cast<std::ptrdiff_t>(subset_id) * k,
                       perm.begin() + static_cast<std::ptrdiff_t>(subset_id + 1) * k);
  std::sort(out.begin(), out.end());
  return out;
}

DatasetManifest corrupt_dataset(const DatasetManifest& manifest,
                                const std::filesystem::path& manifest_dir, int k,
                                std::uint64_t seed, int subset_id, double oval_scale) {
  const std::vector<int> chosen =
      corruption_indices(manifest.records.size(), k, seed, subset_id);
  DatasetManifest out = manifest;
  out.k_corrupted = k;
  out.seed = seed;
  out.subset_id = subset_id;
  for (int pos : chosen) {
    ManifestRecord& r = out.records[static_cast<size_t>(pos)];
    const Mask truth = read_pgm(resolve(manifest_dir, r.mask_path));
    const OvalFit fit = fit_oval(truth, oval_scale);
    const std::string oval_name =
        "oval_s" + std::to_string(subset_id) + "_" + std::to_string(r.index) + ".pgm";
    write_pgm(manifest_dir / oval_name, fit.mask);
    r.mask_path = oval_name;
    r.oval = true;
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& manifest_dir, const std::string& p) {
  std::filesystem::path fp(p);
  return fp.is_absolute() ? fp : manifest_dir / fp;
}

}  // namespace wsseg
