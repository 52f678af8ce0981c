#include "wsseg/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "wsseg/imaging.hpp"
#include "wsseg/rng.hpp"

namespace wsseg {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double dsc(const Mask& pred, const Mask& truth) {
  if (pred.height() != truth.height() || pred.width() != truth.width()) {
    throw ShapeError("dsc: mask dimensions differ");
  }
  std::int64_t inter = 0, np = 0, ng = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred.data()[i] != 0, g = truth.data()[i] != 0;
    inter += (p && g);
    np += p;
    ng += g;
  }
  if (np + ng == 0) return 1.0;  // both empty
  return 2.0 * static_cast<double>(inter) / static_cast<double>(np + ng);
}

Mask threshold_mask(const TensorF& prob) {
  if (prob.rank() != 4 || prob.dim(0) != 1 || prob.dim(1) != 1) {
    throw ShapeError("threshold_mask: expected (1,1,H,W) probabilities");
  }
  Mask m(static_cast<int>(prob.dim(2)), static_cast<int>(prob.dim(3)));
  for (size_t i = 0; i < m.size(); ++i) m.data()[i] = prob.data()[i] >= 0.5f ? 1 : 0;
  return m;
}

Mask predict_mask(const UNet<float>& net, const ParamSet<float>& params, const Image& image) {
  const Image norm = minmax_normalize(image);
  TensorF x({1, 1, norm.height(), norm.width()});
  std::copy(norm.vec().begin(), norm.vec().end(), x.data());
  auto fwd = net.forward(params.ema_view(), x, RunMode::eval, 0);
  return threshold_mask(fwd.prob);
}

std::vector<FoldSplit> kfold_split(size_t n_records, int k_folds, std::uint64_t seed) {
  if (k_folds < 2) throw ConfigError("kfold_split: need at least 2 folds");
  if (n_records < static_cast<size_t>(k_folds)) {
    throw ConfigError("kfold_split: " + std::to_string(n_records) + " records for " +
                      std::to_string(k_folds) + " folds");
  }
  std::vector<int> perm(n_records);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed_for(seed, 0xf01dULL));
  rng.shuffle(perm);

  std::vector<FoldSplit> folds(static_cast<size_t>(k_folds));
  const size_t base = n_records / static_cast<size_t>(k_folds);
  const size_t rem = n_records % static_cast<size_t>(k_folds);
  size_t pos = 0;
  for (int f = 0; f < k_folds; ++f) {
    const size_t len = base + (static_cast<size_t>(f) < rem ? 1 : 0);
    auto& fold = folds[static_cast<size_t>(f)];
    fold.test_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                             perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  for (int f = 0; f < k_folds; ++f) {
    auto& fold = folds[static_cast<size_t>(f)];
    for (int g = 0; g < k_folds; ++g) {
      if (g == f) continue;
      const auto& other = folds[static_cast<size_t>(g)].test_indices;
      fold.train_indices.insert(fold.train_indices.end(), other.begin(), other.end());
    }
    std::sort(fold.train_indices.begin(), fold.train_indices.end());
    std::sort(fold.test_indices.begin(), fold.test_indices.end());
  }
  return folds;
}

FoldReport score_fold(const UNet<float>& net, const ParamSet<float>& params,
                      const std::vector<SampleRecord>& samples, const std::vector<int>& indices,
                      int fold_id) {
  FoldReport report;
  report.fold_id = fold_id;
  double sum = 0.0;
  for (int idx : indices) {
    const SampleRecord& s = samples[static_cast<size_t>(idx)];
    if (s.oval) continue;  // never score against a simulated oval
    const Mask pred = predict_mask(net, params, s.image);
    const double d = dsc(pred, s.mask);
    report.sample_indices.push_back(idx);
    report.per_sample_dsc.push_back(d);
    sum += d;
  }
  report.mean_dsc =
      report.per_sample_dsc.empty() ? 0.0 : sum / static_cast<double>(report.per_sample_dsc.size());
  return report;
}

void write_fold_report(const std::filesystem::path& path, const FoldReport& report) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f << "fold,sample,dsc\n";
  for (size_t i = 0; i < report.per_sample_dsc.size(); ++i) {
    f << report.fold_id << ',' << report.sample_indices[i] << ','
      << fmt_double(report.per_sample_dsc[i]) << '\n';
  }
  f << report.fold_id << ",mean," << fmt_double(report.mean_dsc) << '\n';
}

void SweepConfig::validate() const {
  if (subsets < 1 || k < 0 || folds < 2 || seeds < 1 || jobs < 1) {
    throw ConfigError("sweep: subsets/folds/seeds/jobs out of range");
  }
  if (power_grid.empty()) throw ConfigError("sweep: empty power grid");
  for (double n : power_grid) {
    if (!(n > 0.0)) throw ConfigError("sweep: powers must be > 0");
  }
}

namespace {

struct RunSpec {
  int subset = 0;
  int cell = 0;  // 0 = baseline, then cells in declaration order
  int fold = 0;
  int seed_rep = 0;
};

std::string cell_tag(const SweepCell& cell) {
  if (cell.model == MoiModel::none) return "none_n1";
  std::string n = fmt_double(cell.power_n);
  for (char& c : n) {
    if (c == '.') c = 'p';
  }
  return moi_to_string(cell.model) + "_n" + n;
}

// Per-run persistence: one CSV with per-sample lines plus a mean line, parsed
// back on resume.
std::optional<double> read_run_mean(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) return std::nullopt;
  std::string line;
  std::optional<double> mean;
  while (std::getline(f, line)) {
    const auto pos = line.find(",mean,");
    if (pos != std::string::npos) {
      try {
        mean = std::stod(line.substr(pos + 6));
      } catch (const std::exception&) {
        return std::nullopt;
      }
    }
  }
  return mean;
}

}  // namespace

SweepReport run_sweep(const DatasetManifest& base_manifest,
                      const std::filesystem::path& manifest_dir, const SweepConfig& sweep_cfg,
                      const NetConfig& net_cfg, const TrainConfig& train_cfg,
                      const std::filesystem::path& out_dir, std::uint64_t base_seed,
                      const std::string& fingerprint) {
  sweep_cfg.validate();
  net_cfg.validate();
  train_cfg.validate();
  std::filesystem::create_directories(out_dir / "cells");

  // Cells: unweighted baseline first, then every (model, n) pair.
  std::vector<SweepCell> cells;
  cells.push_back({MoiModel::none, 1.0});
  for (MoiModel model : sweep_cfg.models) {
    for (double n : sweep_cfg.power_grid) cells.push_back({model, n});
  }

  // Disjointly corrupted subset manifests (deterministic; rewrites are
  // byte-identical on a re-run).
  std::vector<DatasetManifest> subsets;
  for (int s = 0; s < sweep_cfg.subsets; ++s) {
    DatasetManifest m =
        corrupt_dataset(base_manifest, manifest_dir, sweep_cfg.k, base_seed, s,
                        sweep_cfg.oval_scale);
    write_manifest(manifest_dir / ("manifest_s" + std::to_string(s) + ".tsv"), m);
    subsets.push_back(std::move(m));
  }

  // Samples per subset are shared across cells; weight maps are attached per
  // run below.
  std::vector<std::vector<SampleRecord>> subset_samples;
  for (const auto& m : subsets) {
    subset_samples.push_back(load_samples(m, manifest_dir, /*with_weightmaps=*/false));
  }
  std::vector<std::vector<FoldSplit>> subset_folds;
  for (int s = 0; s < sweep_cfg.subsets; ++s) {
    subset_folds.push_back(kfold_split(subset_samples[static_cast<size_t>(s)].size(),
                                       sweep_cfg.folds,
                                       seed_for(base_seed, 0xca11, static_cast<std::uint64_t>(s))));
  }

  std::vector<RunSpec> runs;
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
    for (int s = 0; s < sweep_cfg.subsets; ++s) {
      for (int f = 0; f < sweep_cfg.folds; ++f) {
        for (int r = 0; r < sweep_cfg.seeds; ++r) runs.push_back({s, c, f, r});
      }
    }
  }

  std::vector<double> run_means(runs.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<char> run_valid(runs.size(), 0);

  auto run_one = [&](size_t run_idx) {
    const RunSpec& spec = runs[run_idx];
    const SweepCell& cell = cells[static_cast<size_t>(spec.cell)];
    const std::filesystem::path run_path =
        out_dir / "cells" /
        (cell_tag(cell) + "_s" + std::to_string(spec.subset) + "_f" + std::to_string(spec.fold) +
         "_r" + std::to_string(spec.seed_rep) + ".csv");
    if (auto mean = read_run_mean(run_path)) {
      run_means[run_idx] = *mean;
      run_valid[run_idx] = 1;
      return;
    }

    std::vector<SampleRecord> samples = subset_samples[static_cast<size_t>(spec.subset)];
    apply_moi_weights(samples, cell.model, cell.power_n, train_cfg.moi_epsilon);

    const FoldSplit& split =
        subset_folds[static_cast<size_t>(spec.subset)][static_cast<size_t>(spec.fold)];
    std::vector<SampleRecord> train_set;
    for (int idx : split.train_indices) train_set.push_back(samples[static_cast<size_t>(idx)]);

    TrainConfig cfg = train_cfg;
    cfg.moi = cell.model;
    cfg.power_n = cell.power_n;
    cfg.seed = seed_for(base_seed, static_cast<std::uint64_t>(spec.subset),
                        static_cast<std::uint64_t>(spec.cell), static_cast<std::uint64_t>(spec.fold),
                        static_cast<std::uint64_t>(spec.seed_rep));
    TrainResult trained = train(train_set, net_cfg, cfg);

    UNet<float> net(net_cfg);
    FoldReport report =
        score_fold(net, trained.params, samples, split.test_indices, spec.fold);
    report.config_fingerprint = fingerprint;
    write_fold_report(run_path, report);
    if (!report.per_sample_dsc.empty()) {
      run_means[run_idx] = report.mean_dsc;
      run_valid[run_idx] = 1;
    }
  };

  if (sweep_cfg.jobs <= 1) {
    for (size_t i = 0; i < runs.size(); ++i) run_one(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    const int jobs = std::min<int>(sweep_cfg.jobs, static_cast<int>(runs.size()));
    pool.reserve(static_cast<size_t>(jobs));
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < runs.size(); i = next.fetch_add(1)) run_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  SweepReport report;
  report.config_fingerprint = fingerprint;
  std::vector<double> cell_mean(cells.size(), 0.0);
  for (size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> means;
    for (size_t i = 0; i < runs.size(); ++i) {
      if (runs[i].cell == static_cast<int>(c) && run_valid[i]) means.push_back(run_means[i]);
    }
    SweepRow row;
    row.model = moi_to_string(cells[c].model);
    row.power_n = cells[c].power_n;
    row.runs = static_cast<int>(means.size());
    if (!means.empty()) {
      const double mean = std::accumulate(means.begin(), means.end(), 0.0) /
                          static_cast<double>(means.size());
      double ssq = 0.0;
      for (double m : means) ssq += (m - mean) * (m - mean);
      row.mean_dsc = mean;
      row.std_dsc = means.size() > 1 ? std::sqrt(ssq / static_cast<double>(means.size() - 1)) : 0.0;
    }
    cell_mean[c] = row.mean_dsc;
    report.rows.push_back(std::move(row));
  }
  const double baseline = cell_mean[0];
  for (size_t c = 0; c < cells.size(); ++c) {
    report.rows[c].improvement_pct =
        baseline > 0.0 ? 100.0 * (cell_mean[c] - baseline) / baseline : 0.0;
  }
  return report;
}

void write_sweep_csv(const std::filesystem::path& path, const SweepReport& report) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f << "model,n,mean_dsc,std_dsc,improvement_pct\n";
  for (const auto& row : report.rows) {
    f << row.model << ',' << fmt_double(row.power_n) << ',' << fmt_double(row.mean_dsc) << ','
      << fmt_double(row.std_dsc) << ',' << fmt_double(row.improvement_pct) << '\n';
  }
}

void write_sweep_table(const std::filesystem::path& path, const SweepReport& report) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");

  auto find_row = [&](const std::string& model, double n) -> const SweepRow* {
    for (const auto& row : report.rows) {
      if (row.model == model && row.power_n == n) return &row;
    }
    return nullptr;
  };
  std::vector<double> powers;
  for (const auto& row : report.rows) {
    if (row.model != "none" && std::find(powers.begin(), powers.end(), row.power_n) == powers.end()) {
      powers.push_back(row.power_n);
    }
  }
  std::sort(powers.begin(), powers.end());

  char buf[160];
  f << "Mean DSC +/- std over all subset x fold runs\n";
  f << "  n     1st MoI              2nd MoI\n";
  for (double n : powers) {
    const SweepRow* r1 = find_row("moi1", n);
    const SweepRow* r2 = find_row("moi2", n);
    auto fmt_cell = [&](const SweepRow* r) -> std::string {
      if (!r) return "      -     ";
      std::snprintf(buf, sizeof(buf), "%.4f +/- %.4f", r->mean_dsc, r->std_dsc);
      return buf;
    };
    std::snprintf(buf, sizeof(buf), "  %-4g  %-19s  %-19s\n", n, fmt_cell(r1).c_str(),
                  fmt_cell(r2).c_str());
    f << buf;
  }
  const SweepRow* base = find_row("none", 1.0);
  if (base) {
    std::snprintf(buf, sizeof(buf), "  baseline (no weights): %.4f +/- %.4f\n", base->mean_dsc,
                  base->std_dsc);
    f << buf;
  }
  for (const auto& row : report.rows) {
    if (row.model == "none") continue;
    std::snprintf(buf, sizeof(buf), "  %s n=%-4g improvement over baseline: %+.2f%%\n",
                  row.model.c_str(), row.power_n, row.improvement_pct);
    f << buf;
  }
  f << "  config " << report.config_fingerprint << ", " << (report.rows.empty() ? 0 : report.rows[0].runs)
    << " runs per cell\n";
}

}  // namespace wsseg
