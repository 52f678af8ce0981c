#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wsseg/manifest.hpp"
#include "wsseg/train.hpp"

namespace wsseg {

// Dice similarity 2|P n G| / (|P| + |G|); two empty masks score 1.
double dsc(const Mask& pred, const Mask& truth);

// Probabilities >= 0.5 become foreground.
Mask threshold_mask(const TensorF& prob);

// Evaluation-time prediction: min-max normalize, forward with the EMA
// weights in eval mode, threshold.
Mask predict_mask(const UNet<float>& net, const ParamSet<float>& params, const Image& image);

struct FoldSplit {
  std::vector<int> train_indices;
  std::vector<int> test_indices;
};

// Deterministic shuffled partition into k near-equal folds; every index lands
// in exactly one test fold.
std::vector<FoldSplit> kfold_split(size_t n_records, int k_folds, std::uint64_t seed);

struct FoldReport {
  int fold_id = 0;
  std::vector<int> sample_indices;   // scored (accurately labeled) samples
  std::vector<double> per_sample_dsc;
  double mean_dsc = 0.0;
  std::string config_fingerprint;
};

// Score a trained model on the accurately-labeled samples among `indices`
// (oval-corrupted ones are skipped: they would reward reproducing the
// annotation error).
FoldReport score_fold(const UNet<float>& net, const ParamSet<float>& params,
                      const std::vector<SampleRecord>& samples, const std::vector<int>& indices,
                      int fold_id);

void write_fold_report(const std::filesystem::path& path, const FoldReport& report);

// ---- sweep ------------------------------------------------------------------

struct SweepConfig {
  int subsets = 5;
  int k = 8;
  int folds = 5;
  int seeds = 1;                                // training-seed replicas per run
  std::vector<double> power_grid = {1.0, 1.5, 2.0};
  std::vector<MoiModel> models = {MoiModel::moi1, MoiModel::moi2};
  double oval_scale = 2.2;
  int jobs = 1;

  void validate() const;
};

struct SweepCell {
  MoiModel model = MoiModel::none;
  double power_n = 1.0;
};

struct SweepRow {
  std::string model;
  double power_n = 1.0;
  double mean_dsc = 0.0;
  double std_dsc = 0.0;         // sample std over all subset x fold x seed runs
  double improvement_pct = 0.0; // relative to the unweighted baseline row
  int runs = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // baseline first
  std::string config_fingerprint;
};

// The full protocol: derive `subsets` disjointly corrupted manifests from the
// base manifest, then for the baseline and every (model, n) cell run k-fold
// cross-validation (times `seeds` replicas) and pool the per-run mean DSC.
// Per-run results are persisted under out_dir/cells/ and reused when already
// present, so an interrupted sweep resumes.
SweepReport run_sweep(const DatasetManifest& base_manifest,
                      const std::filesystem::path& manifest_dir, const SweepConfig& sweep_cfg,
                      const NetConfig& net_cfg, const TrainConfig& train_cfg,
                      const std::filesystem::path& out_dir, std::uint64_t base_seed,
                      const std::string& fingerprint);

// model,n,mean_dsc,std_dsc,improvement_pct
void write_sweep_csv(const std::filesystem::path& path, const SweepReport& report);
// Human-readable table: one row per power, one column per model.
void write_sweep_table(const std::filesystem::path& path, const SweepReport& report);

// Round-trip-exact decimal formatting used by all report writers.
std::string fmt_double(double v);

}  // namespace wsseg
