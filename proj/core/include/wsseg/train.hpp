#pragma once

#include <filesystem>
#include <vector>

#include "wsseg/loss.hpp"
#include "wsseg/manifest.hpp"
#include "wsseg/network.hpp"
#include "wsseg/optimizer.hpp"
#include "wsseg/sample.hpp"

namespace wsseg {

enum class MoiModel { none, moi1, moi2 };
MoiModel moi_from_string(const std::string& s);
std::string moi_to_string(MoiModel m);

struct TrainConfig {
  int batch_size = 4;
  int epochs = 280;
  double max_lr = 0.001;
  double weight_decay = 0.0005;
  double ema_beta = 0.995;
  MoiModel moi = MoiModel::none;
  double power_n = 1.0;      // consumed where weight maps are computed
  double moi_epsilon = 1.0;
  std::uint64_t seed = 0;
  bool augment = true;
  LossConfig loss;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  std::int64_t step = 0;  // global steps completed
  double lr = 0.0;        // last learning rate of the epoch
  double mean_loss = 0.0;
};

struct TrainResult {
  ParamSet<float> params;  // includes the EMA shadow and final running stats
  std::vector<EpochLog> log;
};

// Mini-batch loop: augment -> forward -> combined loss -> backward -> adam ->
// EMA, deterministic for a fixed seed. Trailing samples that do not fill a
// batch are dropped. Input images are min-max normalized on the fly; weight
// maps must already be attached to the samples (all ones when moi is none).
TrainResult train(const std::vector<SampleRecord>& samples, const NetConfig& net_cfg,
                  const TrainConfig& cfg);

// Lines of "epoch,step,lr,loss" behind a matching header.
void write_train_log(const std::filesystem::path& path, const std::vector<EpochLog>& log);

// Materialize manifest records. When with_weightmaps is set every record must
// carry a weight-map path; otherwise weight maps are forced to all ones.
std::vector<SampleRecord> load_samples(const DatasetManifest& manifest,
                                       const std::filesystem::path& manifest_dir,
                                       bool with_weightmaps);

// Attach freshly computed confidence maps: oval records get the model's map
// (power-transformed), accurate records all ones.
void apply_moi_weights(std::vector<SampleRecord>& samples, MoiModel model, double power_n,
                       double epsilon);

}  // namespace wsseg
