#include "wsseg/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "wsseg/augment.hpp"
#include "wsseg/imageio.hpp"
#include "wsseg/imaging.hpp"
#include "wsseg/weakmodels.hpp"

namespace wsseg {

MoiModel moi_from_string(const std::string& s) {
  if (s == "none") return MoiModel::none;
  if (s == "moi1") return MoiModel::moi1;
  if (s == "moi2") return MoiModel::moi2;
  throw ConfigError("unknown inaccuracy model '" + s + "' (expected none|moi1|moi2)");
}

std::string moi_to_string(MoiModel m) {
  switch (m) {
    case MoiModel::none: return "none";
    case MoiModel::moi1: return "moi1";
    case MoiModel::moi2: return "moi2";
  }
  return "none";
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (!(max_lr > 0.0)) throw ConfigError("train: max_lr must be > 0");
  if (weight_decay < 0.0) throw ConfigError("train: weight_decay must be >= 0");
  if (!(ema_beta > 0.0 && ema_beta < 1.0)) throw ConfigError("train: ema_beta must be in (0,1)");
  if (!(power_n > 0.0)) throw ConfigError("train: power_n must be > 0");
  if (!(moi_epsilon > 0.0)) throw ConfigError("train: moi_epsilon must be > 0");
  loss.validate();
}

namespace {

// Batch tensors from normalized, augmented samples.
struct BatchTensors {
  TensorF x, y, phi;
};

BatchTensors assemble_batch(const std::vector<SampleRecord>& samples,
                            const std::vector<int>& order, size_t first, int batch_size) {
  const Image& proto = samples[static_cast<size_t>(order[first])].image;
  const std::int64_t h = proto.height(), w = proto.width();
  BatchTensors b{TensorF({batch_size, 1, h, w}), TensorF({batch_size, 1, h, w}),
                 TensorF({batch_size, 1, h, w})};
  for (int s = 0; s < batch_size; ++s) {
    const SampleRecord& rec = samples[static_cast<size_t>(order[first + static_cast<size_t>(s)])];
    require_same_shape(rec.image.height(), rec.image.width(), static_cast<int>(h),
                       static_cast<int>(w), "train batch");
    const std::int64_t off = static_cast<std::int64_t>(s) * h * w;
    for (std::int64_t k = 0; k < h * w; ++k) {
      b.x.data()[off + k] = rec.image.data()[k];
      b.y.data()[off + k] = static_cast<float>(rec.mask.data()[k]);
      b.phi.data()[off + k] = rec.wmap.data()[k];
    }
  }
  return b;
}

}  // namespace

TrainResult train(const std::vector<SampleRecord>& samples, const NetConfig& net_cfg,
                  const TrainConfig& cfg) {
  cfg.validate();
  net_cfg.validate();
  if (samples.empty()) throw ConfigError("train: empty dataset");
  const auto steps_per_epoch =
      static_cast<std::int64_t>(samples.size()) / static_cast<std::int64_t>(cfg.batch_size);
  if (steps_per_epoch < 1) {
    throw ConfigError("train: dataset of " + std::to_string(samples.size()) +
                      " cannot fill a batch of " + std::to_string(cfg.batch_size));
  }
  const std::int64_t total_steps = steps_per_epoch * cfg.epochs;

  // Normalization happens once up front; augmentation re-runs per epoch.
  std::vector<SampleRecord> base = samples;
  for (auto& rec : base) {
    rec.image = minmax_normalize(rec.image);
    require_binary(rec.mask, "train");
  }

  UNet<float> net(net_cfg);
  ParamSet<float> params = net.init_params(seed_for(cfg.seed, 0x1eaf));
  AdamState<float> adam = AdamState<float>::zeros_like(params);

  TrainResult result;
  std::int64_t global_step = 0;
  std::vector<int> order(base.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(seed_for(cfg.seed, 0x5f17, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    double last_lr = 0.0;
    for (std::int64_t bi = 0; bi < steps_per_epoch; ++bi) {
      std::vector<SampleRecord> batch;
      batch.reserve(static_cast<size_t>(cfg.batch_size));
      for (int s = 0; s < cfg.batch_size; ++s) {
        const int idx = order[static_cast<size_t>(bi) * cfg.batch_size + static_cast<size_t>(s)];
        const SampleRecord& rec = base[static_cast<size_t>(idx)];
        if (cfg.augment) {
          batch.push_back(augment(rec, seed_for(cfg.seed, 0xa9, static_cast<std::uint64_t>(epoch),
                                                static_cast<std::uint64_t>(idx))));
        } else {
          batch.push_back(rec);
        }
      }
      std::vector<int> batch_order(batch.size());
      std::iota(batch_order.begin(), batch_order.end(), 0);
      BatchTensors t = assemble_batch(batch, batch_order, 0, cfg.batch_size);

      const double lr = one_cycle_lr(global_step, total_steps, cfg.max_lr);
      last_lr = lr;
      auto fwd = net.forward(params, t.x, RunMode::train,
                             seed_for(cfg.seed, 0xd7, static_cast<std::uint64_t>(epoch),
                                      static_cast<std::uint64_t>(bi)));
      const ClassWeights cw = class_weights(t.y);
      auto loss = combined_loss(fwd.prob, t.y, t.phi, cw, cfg.loss);
      if (!std::isfinite(loss.total)) {
        throw NumericError("train: loss diverged at epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(bi));
      }
      loss_sum += loss.total;

      auto back = net.backward(params, fwd, loss.dp);
      adam_step(params, back.grads, adam, lr, cfg.weight_decay);
      ema_update(params, cfg.ema_beta);
      params.buffers = std::move(fwd.new_buffers);
      ++global_step;
    }
    result.log.push_back(
        {epoch, global_step, last_lr, loss_sum / static_cast<double>(steps_per_epoch)});
  }

  result.params = std::move(params);
  return result;
}

void write_train_log(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f << "epoch,step,lr,loss\n";
  char buf[128];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof(buf), "%d,%lld,%.17g,%.17g\n", row.epoch,
                  static_cast<long long>(row.step), row.lr, row.mean_loss);
    f << buf;
  }
}

std::vector<SampleRecord> load_samples(const DatasetManifest& manifest,
                                       const std::filesystem::path& manifest_dir,
                                       bool with_weightmaps) {
  std::vector<SampleRecord> out;
  for (const auto& rec : manifest.records) {
    SampleRecord s;
    s.image = read_pfm(resolve(manifest_dir, rec.image_path));
    s.mask = read_pgm(resolve(manifest_dir, rec.mask_path));
    s.oval = rec.oval;
    if (with_weightmaps) {
      if (rec.weightmap_path == "-" || rec.weightmap_path.empty()) {
        throw ConfigError("record " + std::to_string(rec.index) +
                          " has no weight map; run the weights command first");
      }
      s.wmap = read_pfm(resolve(manifest_dir, rec.weightmap_path));
      require_same_shape(s.wmap.height(), s.wmap.width(), s.image.height(), s.image.width(),
                         "weight map");
    } else {
      s.wmap = WeightMap(s.image.height(), s.image.width(), 1.0f);
    }
    require_same_shape(s.mask.height(), s.mask.width(), s.image.height(), s.image.width(), "mask");
    out.push_back(std::move(s));
  }
  return out;
}

void apply_moi_weights(std::vector<SampleRecord>& samples, MoiModel model, double power_n,
                       double epsilon) {
  for (auto& s : samples) {
    if (model == MoiModel::none || !s.oval) {
      s.wmap = WeightMap(s.image.height(), s.image.width(), 1.0f);
      continue;
    }
    WeightResult r = model == MoiModel::moi1 ? moi1_weights(s.mask, epsilon)
                                             : moi2_weights(s.mask, epsilon);
    s.wmap = power_transform(r.map, power_n);
  }
}

}  // namespace wsseg
