#include "wsseg/network.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace wsseg {

void NetConfig::validate() const {
  if (in_channels < 1 || out_channels < 1) {
    throw ConfigError("net: in/out channels must be >= 1");
  }
  if (init_channels < 4 || init_channels % 4 != 0) {
    throw ConfigError("net: init_channels must be >= 4 and divisible by 4, got " +
                      std::to_string(init_channels));
  }
  if (depth < 1 || depth > 8) throw ConfigError("net: depth must be in [1,8]");
  if (pyramid_scales.empty()) throw ConfigError("net: pyramid_scales must be non-empty");
  int prev = 0;
  for (int s : pyramid_scales) {
    if (s <= prev) throw ConfigError("net: pyramid_scales must be positive and ascending");
    prev = s;
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("net: dropout_p must be in [0,1)");
}

namespace {

template <typename T>
void accumulate(Tensor<T>& into, const Tensor<T>& g) {
  for (std::int64_t i = 0; i < g.numel(); ++i) into[i] += g[i];
}

// Copy channels [c0, c0+cn) of src into dst starting at channel d0.
template <typename T>
void copy_channels(Tensor<T>& dst, std::int64_t d0, const Tensor<T>& src, std::int64_t c0,
                   std::int64_t cn) {
  const std::int64_t n = src.dim(0), plane = src.dim(2) * src.dim(3);
  for (std::int64_t s = 0; s < n; ++s) {
    std::memcpy(dst.data() + (s * dst.dim(1) + d0) * plane,
                src.data() + (s * src.dim(1) + c0) * plane,
                static_cast<size_t>(cn * plane) * sizeof(T));
  }
}

template <typename T>
Tensor<T> take_channels(const Tensor<T>& src, std::int64_t c0, std::int64_t cn) {
  Tensor<T> out({src.dim(0), cn, src.dim(2), src.dim(3)});
  copy_channels(out, 0, src, c0, cn);
  return out;
}

}  // namespace

template <typename T>
int UNet<T>::channels_at(int level) const {
  return cfg_.init_channels << level;
}

template <typename T>
UNet<T>::UNet(NetConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  int ordinal = 0;
  auto reg_param = [&](std::string name, std::vector<std::int64_t> shape) {
    param_names_.push_back(std::move(name));
    param_shapes_.push_back(std::move(shape));
    return static_cast<int>(param_names_.size()) - 1;
  };
  auto reg_buffer = [&](std::string name, std::vector<std::int64_t> shape) {
    buffer_names_.push_back(std::move(name));
    buffer_shapes_.push_back(std::move(shape));
    return static_cast<int>(buffer_names_.size()) - 1;
  };
  auto reg_unit = [&](const std::string& prefix, int cin, int cout) {
    ConvBnIdx u;
    u.w = reg_param(prefix + ".w", {cout, cin, 3, 3});
    u.b = reg_param(prefix + ".b", {cout});
    u.gamma = reg_param(prefix + ".bn.g", {cout});
    u.beta = reg_param(prefix + ".bn.b", {cout});
    u.rmean = reg_buffer(prefix + ".bn.rm", {cout});
    u.rvar = reg_buffer(prefix + ".bn.rv", {cout});
    u.ordinal = ordinal++;
    return u;
  };
  auto reg_block = [&](const std::string& prefix, int cin, int cout) {
    BlockIdx b;
    b.u1 = reg_unit(prefix + ".c1", cin, cout);
    b.u2 = reg_unit(prefix + ".c2", cout, cout);
    return b;
  };

  int cin = cfg_.in_channels;
  for (int d = 0; d < cfg_.depth; ++d) {
    enc_.push_back(reg_block("enc" + std::to_string(d), cin, channels_at(d)));
    cin = channels_at(d);
  }
  const int cb = channels_at(cfg_.depth);
  bottleneck_ = reg_block("bott", cin, cb);
  for (size_t k = 0; k < cfg_.pyramid_scales.size(); ++k) {
    ProjIdx p;
    p.w = reg_param("pyr" + std::to_string(k) + ".w", {cb / 4, cb, 1, 1});
    p.b = reg_param("pyr" + std::to_string(k) + ".b", {cb / 4});
    pyramid_.push_back(p);
  }
  const int cat_ch = cb + static_cast<int>(cfg_.pyramid_scales.size()) * (cb / 4);
  post_ = reg_block("post", cat_ch, cb);
  dec_.resize(static_cast<size_t>(cfg_.depth));
  for (int d = cfg_.depth - 1; d >= 0; --d) {
    const int cprev = (d == cfg_.depth - 1) ? cb : channels_at(d + 1);
    dec_[static_cast<size_t>(d)] =
        reg_block("dec" + std::to_string(d), cprev + channels_at(d), channels_at(d));
  }
  head_.w = reg_param("head.w", {cfg_.out_channels, channels_at(0), 1, 1});
  head_.b = reg_param("head.b", {cfg_.out_channels});
}

template <typename T>
ParamSet<T> UNet<T>::init_params(std::uint64_t seed) const {
  Rng rng(seed_for(seed, 0x696e6974ULL));
  ParamSet<T> p;
  p.names = param_names_;
  for (size_t i = 0; i < param_names_.size(); ++i) {
    Tensor<T> t(param_shapes_[i]);
    const std::string& name = param_names_[i];
    if (name.ends_with(".bn.g")) {
      std::fill(t.vec().begin(), t.vec().end(), T{1});
    } else if (name.ends_with(".w") && param_shapes_[i].size() == 4) {
      // Kaiming fan-in scaling for relu nonlinearities.
      const auto& s = param_shapes_[i];
      const double fan_in = static_cast<double>(s[1] * s[2] * s[3]);
      const double stddev = std::sqrt(2.0 / fan_in);
      for (std::int64_t k = 0; k < t.numel(); ++k) t[k] = static_cast<T>(rng.normal(0.0, stddev));
    }
    // biases and bn shift stay zero
    p.values.push_back(std::move(t));
  }
  p.shadow = p.values;  // shadow starts at theta_0
  p.buffer_names = buffer_names_;
  for (size_t i = 0; i < buffer_names_.size(); ++i) {
    Tensor<T> t(buffer_shapes_[i]);
    if (buffer_names_[i].ends_with(".rv")) std::fill(t.vec().begin(), t.vec().end(), T{1});
    p.buffers.push_back(std::move(t));
  }
  return p;
}

template <typename T>
Tensor<T> UNet<T>::unit_forward(const ConvBnIdx& u, const ParamSet<T>& params, const Tensor<T>& x,
                                RunMode mode, std::uint64_t dropout_seed,
                                ForwardResult& out) const {
  const bool train = mode == RunMode::train;
  UnitTape& tape = out.units[static_cast<size_t>(u.ordinal)];
  tape.x = x;
  Tensor<T> c = conv2d_forward(x, params.values[static_cast<size_t>(u.w)],
                               params.values[static_cast<size_t>(u.b)], 1);
  auto bn = batchnorm2d_forward(c, params.values[static_cast<size_t>(u.gamma)],
                                params.values[static_cast<size_t>(u.beta)],
                                params.buffers[static_cast<size_t>(u.rmean)],
                                params.buffers[static_cast<size_t>(u.rvar)], train);
  if (train) {
    out.new_buffers[static_cast<size_t>(u.rmean)] = bn.new_running_mean;
    out.new_buffers[static_cast<size_t>(u.rvar)] = bn.new_running_var;
  }
  Tensor<T> r = relu_forward(bn.y);
  auto drop = dropout_forward(r, cfg_.dropout_p, seed_for(dropout_seed, u.ordinal), train);
  tape.conv_out = std::move(c);
  tape.bn_mean = std::move(bn.saved_mean);
  tape.bn_invstd = std::move(bn.saved_invstd);
  tape.bn_y = std::move(bn.y);
  tape.drop_mask = std::move(drop.mask);
  tape.y = drop.y;
  return drop.y;
}

template <typename T>
Tensor<T> UNet<T>::unit_backward(const ConvBnIdx& u, const ParamSet<T>& params,
                                 const UnitTape& tape, RunMode mode, const Tensor<T>& dy,
                                 GradSet<T>& grads) const {
  (void)mode;
  Tensor<T> dr = dropout_backward(tape.drop_mask, dy);
  Tensor<T> dbn_y = relu_backward(tape.bn_y, dr);
  auto bng = batchnorm2d_backward(tape.conv_out, params.values[static_cast<size_t>(u.gamma)],
                                  tape.bn_mean, tape.bn_invstd, dbn_y);
  accumulate(grads.grads[static_cast<size_t>(u.gamma)], bng.dgamma);
  accumulate(grads.grads[static_cast<size_t>(u.beta)], bng.dbeta);
  auto cg = conv2d_backward(tape.x, params.values[static_cast<size_t>(u.w)], 1, bng.dx);
  accumulate(grads.grads[static_cast<size_t>(u.w)], cg.dw);
  accumulate(grads.grads[static_cast<size_t>(u.b)], cg.db);
  return std::move(cg.dx);
}

template <typename T>
typename UNet<T>::ForwardResult UNet<T>::forward(const ParamSet<T>& params, const Tensor<T>& x,
                                                 RunMode mode, std::uint64_t dropout_seed) const {
  if (x.rank() != 4 || x.dim(1) != cfg_.in_channels) {
    throw ShapeError("forward: expected (N," + std::to_string(cfg_.in_channels) + ",H,W) input");
  }
  const std::int64_t h = x.dim(2), w = x.dim(3);
  const std::int64_t div = std::int64_t{1} << cfg_.depth;
  if (h % div != 0) {
    throw ConfigError("forward: input height " + std::to_string(h) + " not divisible by " +
                      std::to_string(div));
  }
  if (w % div != 0) {
    throw ConfigError("forward: input width " + std::to_string(w) + " not divisible by " +
                      std::to_string(div));
  }
  const std::int64_t hb = h / div, wb = w / div;
  const int max_scale = cfg_.pyramid_scales.back();
  if (hb < max_scale || wb < max_scale) {
    throw ConfigError("forward: bottleneck " + std::to_string(hb) + "x" + std::to_string(wb) +
                      " smaller than pyramid scale " + std::to_string(max_scale));
  }

  ForwardResult out;
  out.mode = mode;
  out.units.resize(static_cast<size_t>(4 * cfg_.depth + 4));
  out.new_buffers = params.buffers;

  Tensor<T> t = x;
  std::vector<Tensor<T>> skips;
  for (int d = 0; d < cfg_.depth; ++d) {
    t = unit_forward(enc_[static_cast<size_t>(d)].u1, params, t, mode, dropout_seed, out);
    t = unit_forward(enc_[static_cast<size_t>(d)].u2, params, t, mode, dropout_seed, out);
    skips.push_back(t);
    auto mp = maxpool2_forward(t);
    out.argmax.push_back(std::move(mp.argmax));
    t = std::move(mp.y);
  }

  t = unit_forward(bottleneck_.u1, params, t, mode, dropout_seed, out);
  t = unit_forward(bottleneck_.u2, params, t, mode, dropout_seed, out);
  out.bottleneck_out = t;

  const std::int64_t cb = t.dim(1);
  const std::int64_t branch_ch = cb / 4;
  Tensor<T> cat({t.dim(0), cb + static_cast<std::int64_t>(pyramid_.size()) * branch_ch, hb, wb});
  copy_channels(cat, 0, t, 0, cb);
  for (size_t k = 0; k < pyramid_.size(); ++k) {
    const std::int64_t s = cfg_.pyramid_scales[k];
    Tensor<T> pooled = adaptive_avgpool_forward(t, s, s);
    out.pyramid_pooled.push_back(pooled);
    out.pyramid_sizes.push_back(s);
    Tensor<T> proj = conv2d_forward(pooled, params.values[static_cast<size_t>(pyramid_[k].w)],
                                    params.values[static_cast<size_t>(pyramid_[k].b)], 0);
    Tensor<T> up = upsample_bilinear_forward(proj, hb, wb);
    copy_channels(cat, cb + static_cast<std::int64_t>(k) * branch_ch, up, 0, branch_ch);
  }

  t = unit_forward(post_.u1, params, cat, mode, dropout_seed, out);
  t = unit_forward(post_.u2, params, t, mode, dropout_seed, out);

  for (int d = cfg_.depth - 1; d >= 0; --d) {
    const Tensor<T>& skip = skips[static_cast<size_t>(d)];
    Tensor<T> up = upsample_bilinear_forward(t, skip.dim(2), skip.dim(3));
    Tensor<T> cat2 = concat_channels(up, skip);
    t = unit_forward(dec_[static_cast<size_t>(d)].u1, params, cat2, mode, dropout_seed, out);
    t = unit_forward(dec_[static_cast<size_t>(d)].u2, params, t, mode, dropout_seed, out);
  }

  out.final_in = t;
  Tensor<T> logits = conv2d_forward(t, params.values[static_cast<size_t>(head_.w)],
                                    params.values[static_cast<size_t>(head_.b)], 0);
  out.prob = sigmoid_forward(logits);
  return out;
}

template <typename T>
Tensor<T> UNet<T>::pyramid_forward(const ParamSet<T>& params, const Tensor<T>& bneck) const {
  const std::int64_t cb = bneck.dim(1), hb = bneck.dim(2), wb = bneck.dim(3);
  const std::int64_t branch_ch = cb / 4;
  Tensor<T> cat(
      {bneck.dim(0), cb + static_cast<std::int64_t>(pyramid_.size()) * branch_ch, hb, wb});
  copy_channels(cat, 0, bneck, 0, cb);
  for (size_t k = 0; k < pyramid_.size(); ++k) {
    const std::int64_t s = cfg_.pyramid_scales[k];
    Tensor<T> pooled = adaptive_avgpool_forward(bneck, s, s);
    Tensor<T> proj = conv2d_forward(pooled, params.values[static_cast<size_t>(pyramid_[k].w)],
                                    params.values[static_cast<size_t>(pyramid_[k].b)], 0);
    Tensor<T> up = upsample_bilinear_forward(proj, hb, wb);
    copy_channels(cat, cb + static_cast<std::int64_t>(k) * branch_ch, up, 0, branch_ch);
  }
  return cat;
}

template <typename T>
typename UNet<T>::BackwardResult UNet<T>::backward(const ParamSet<T>& params,
                                                   const ForwardResult& fwd,
                                                   const Tensor<T>& dprob) const {
  if (fwd.mode != RunMode::train) {
    throw StateError("backward: requires a train-mode forward tape");
  }
  GradSet<T> grads;
  grads.grads.resize(params.values.size());
  for (size_t i = 0; i < params.values.size(); ++i) {
    grads.grads[i] = Tensor<T>(params.values[i].shape());
  }

  // output head
  Tensor<T> dlogits = sigmoid_backward(fwd.prob, dprob);
  auto hg = conv2d_backward(fwd.final_in, params.values[static_cast<size_t>(head_.w)], 0, dlogits);
  accumulate(grads.grads[static_cast<size_t>(head_.w)], hg.dw);
  accumulate(grads.grads[static_cast<size_t>(head_.b)], hg.db);
  Tensor<T> dt = std::move(hg.dx);

  // decoder, shallow to deep
  std::vector<Tensor<T>> dskips(static_cast<size_t>(cfg_.depth));
  for (int d = 0; d < cfg_.depth; ++d) {
    const BlockIdx& blk = dec_[static_cast<size_t>(d)];
    Tensor<T> dcat = unit_backward(blk.u2, params, fwd.units[static_cast<size_t>(blk.u2.ordinal)],
                                   fwd.mode, dt, grads);
    dcat = unit_backward(blk.u1, params, fwd.units[static_cast<size_t>(blk.u1.ordinal)], fwd.mode,
                         dcat, grads);
    const std::int64_t cb = fwd.bottleneck_out.dim(1);
    const std::int64_t cprev = (d == cfg_.depth - 1) ? cb : channels_at(d + 1);
    auto [dup, dskip] = split_channels(dcat, cprev);
    dskips[static_cast<size_t>(d)] = std::move(dskip);
    // spatial size of the deeper feature map this level upsampled from
    const Tensor<T>& deeper = (d == cfg_.depth - 1)
                                  ? fwd.units[static_cast<size_t>(post_.u2.ordinal)].y
                                  : fwd.units[static_cast<size_t>(
                                        dec_[static_cast<size_t>(d + 1)].u2.ordinal)].y;
    dt = upsample_bilinear_backward(dup, deeper.dim(2), deeper.dim(3));
  }

  // post-pyramid block down to the concatenated features
  Tensor<T> dcat = unit_backward(post_.u2, params, fwd.units[static_cast<size_t>(post_.u2.ordinal)],
                                 fwd.mode, dt, grads);
  dcat = unit_backward(post_.u1, params, fwd.units[static_cast<size_t>(post_.u1.ordinal)], fwd.mode,
                       dcat, grads);

  const std::int64_t cb = fwd.bottleneck_out.dim(1);
  const std::int64_t branch_ch = cb / 4;
  const std::int64_t hb = fwd.bottleneck_out.dim(2), wb = fwd.bottleneck_out.dim(3);
  Tensor<T> dbneck = take_channels(dcat, 0, cb);
  for (size_t k = 0; k < pyramid_.size(); ++k) {
    Tensor<T> dup = take_channels(dcat, cb + static_cast<std::int64_t>(k) * branch_ch, branch_ch);
    const std::int64_t s = fwd.pyramid_sizes[k];
    Tensor<T> dproj = upsample_bilinear_backward(dup, s, s);
    auto pg = conv2d_backward(fwd.pyramid_pooled[k],
                              params.values[static_cast<size_t>(pyramid_[k].w)], 0, dproj);
    accumulate(grads.grads[static_cast<size_t>(pyramid_[k].w)], pg.dw);
    accumulate(grads.grads[static_cast<size_t>(pyramid_[k].b)], pg.db);
    Tensor<T> dpool = adaptive_avgpool_backward(pg.dx, hb, wb);
    for (std::int64_t i = 0; i < dbneck.numel(); ++i) dbneck[i] += dpool[i];
  }

  // bottleneck block, then encoder deep to shallow
  dt = unit_backward(bottleneck_.u2, params, fwd.units[static_cast<size_t>(bottleneck_.u2.ordinal)],
                     fwd.mode, dbneck, grads);
  dt = unit_backward(bottleneck_.u1, params, fwd.units[static_cast<size_t>(bottleneck_.u1.ordinal)],
                     fwd.mode, dt, grads);

  for (int d = cfg_.depth - 1; d >= 0; --d) {
    const BlockIdx& blk = enc_[static_cast<size_t>(d)];
    const Tensor<T>& enc_out = fwd.units[static_cast<size_t>(blk.u2.ordinal)].y;
    Tensor<T> de = maxpool2_backward(fwd.argmax[static_cast<size_t>(d)], dt, enc_out.shape());
    const Tensor<T>& dskip = dskips[static_cast<size_t>(d)];
    for (std::int64_t i = 0; i < de.numel(); ++i) de[i] += dskip[i];
    dt = unit_backward(blk.u2, params, fwd.units[static_cast<size_t>(blk.u2.ordinal)], fwd.mode, de,
                       grads);
    dt = unit_backward(blk.u1, params, fwd.units[static_cast<size_t>(blk.u1.ordinal)], fwd.mode, dt,
                       grads);
  }

  return {std::move(grads), std::move(dt)};
}

template class UNet<float>;
template class UNet<double>;

// ---- checkpoint io ----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'W', 'S', 'E', 'G', 'N', 'E', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}
void put_i64(std::string& out, std::int64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

void append_tensor(std::string& out, const std::string& name, const Tensor<float>& t) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.append(name);
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) put_i64(out, d);
  out.append(reinterpret_cast<const char*>(t.data()), static_cast<size_t>(t.numel()) * 4);
}

struct ByteCursor {
  const std::string& bytes;
  size_t pos = 0;
  std::string file;

  void need(size_t n, const char* what) {
    if (bytes.size() - pos < n) {
      throw FormatError(file + ": truncated checkpoint reading " + what + " at byte " +
                        std::to_string(pos));
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v;
    std::memcpy(&v, bytes.data() + pos, 4);
    pos += 4;
    return v;
  }
  std::int64_t i64(const char* what) {
    need(8, what);
    std::int64_t v;
    std::memcpy(&v, bytes.data() + pos, 8);
    pos += 8;
    return v;
  }
};

Tensor<float> netconfig_tensor(const NetConfig& cfg) {
  std::vector<float> v = {static_cast<float>(cfg.in_channels),  static_cast<float>(cfg.out_channels),
                          static_cast<float>(cfg.init_channels), static_cast<float>(cfg.depth),
                          static_cast<float>(cfg.dropout_p),
                          static_cast<float>(cfg.pyramid_scales.size())};
  for (int s : cfg.pyramid_scales) v.push_back(static_cast<float>(s));
  Tensor<float> t({static_cast<std::int64_t>(v.size())});
  std::copy(v.begin(), v.end(), t.data());
  return t;
}

NetConfig netconfig_from_tensor(const Tensor<float>& t) {
  if (t.numel() < 6) throw FormatError("checkpoint: malformed netconfig metadata");
  NetConfig cfg;
  cfg.in_channels = static_cast<int>(t[0]);
  cfg.out_channels = static_cast<int>(t[1]);
  cfg.init_channels = static_cast<int>(t[2]);
  cfg.depth = static_cast<int>(t[3]);
  cfg.dropout_p = static_cast<double>(t[4]);
  const int ns = static_cast<int>(t[5]);
  if (t.numel() != 6 + ns) throw FormatError("checkpoint: malformed netconfig metadata");
  cfg.pyramid_scales.clear();
  for (int i = 0; i < ns; ++i) cfg.pyramid_scales.push_back(static_cast<int>(t[6 + i]));
  return cfg;
}

}  // namespace

void save_params(const std::filesystem::path& path, const ParamSet<float>& params,
                 const NetConfig& cfg) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  const std::uint32_t count = static_cast<std::uint32_t>(
      2 * params.values.size() + params.buffers.size() + 1);
  put_u32(out, count);
  append_tensor(out, "m/netconfig", netconfig_tensor(cfg));
  for (size_t i = 0; i < params.values.size(); ++i) {
    append_tensor(out, "p/" + params.names[i], params.values[i]);
  }
  for (size_t i = 0; i < params.shadow.size(); ++i) {
    append_tensor(out, "e/" + params.names[i], params.shadow[i]);
  }
  for (size_t i = 0; i < params.buffers.size(); ++i) {
    append_tensor(out, "b/" + params.buffer_names[i], params.buffers[i]);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("short write to " + path.string());
}

LoadedParams load_params(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  ByteCursor c{bytes, 0, path.string()};

  c.need(sizeof(kMagic), "magic");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(path.string() + ": bad checkpoint magic");
  }
  c.pos = sizeof(kMagic);
  const std::uint32_t version = c.u32("version");
  if (version != kVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version " +
                      std::to_string(version));
  }
  const std::uint32_t count = c.u32("tensor count");

  std::vector<std::pair<std::string, Tensor<float>>> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = c.u32("name length");
    c.need(name_len, "name");
    std::string name(bytes.data() + c.pos, name_len);
    c.pos += name_len;
    const std::uint32_t rank = c.u32("rank");
    if (rank > 8) throw FormatError(path.string() + ": implausible tensor rank");
    std::vector<std::int64_t> dims;
    for (std::uint32_t r = 0; r < rank; ++r) dims.push_back(c.i64("dimension"));
    Tensor<float> t(dims);
    const size_t payload = static_cast<size_t>(t.numel()) * 4;
    c.need(payload, "payload");
    std::memcpy(t.data(), bytes.data() + c.pos, payload);
    c.pos += payload;
    entries.emplace_back(std::move(name), std::move(t));
  }
  if (c.pos != bytes.size()) {
    throw FormatError(path.string() + ": trailing bytes after tensor " + std::to_string(count) +
                      " at byte " + std::to_string(c.pos));
  }

  LoadedParams out;
  bool have_cfg = false;
  std::vector<std::pair<std::string, Tensor<float>>> shadows;
  for (auto& [name, t] : entries) {
    if (name.starts_with("p/")) {
      out.params.names.push_back(name.substr(2));
      out.params.values.push_back(std::move(t));
    } else if (name.starts_with("e/")) {
      shadows.emplace_back(name.substr(2), std::move(t));
    } else if (name.starts_with("b/")) {
      out.params.buffer_names.push_back(name.substr(2));
      out.params.buffers.push_back(std::move(t));
    } else if (name == "m/netconfig") {
      out.cfg = netconfig_from_tensor(t);
      have_cfg = true;
    } else {
      throw FormatError(path.string() + ": unknown tensor entry '" + name + "'");
    }
  }
  if (!have_cfg) throw FormatError(path.string() + ": missing section: netconfig metadata");
  if (shadows.size() != out.params.values.size()) {
    throw FormatError(path.string() + ": missing section: ema shadow (" +
                      std::to_string(shadows.size()) + " shadow tensors for " +
                      std::to_string(out.params.values.size()) + " parameters)");
  }
  out.params.shadow.resize(shadows.size());
  for (auto& [name, t] : shadows) {
    const auto it = std::find(out.params.names.begin(), out.params.names.end(), name);
    if (it == out.params.names.end()) {
      throw FormatError(path.string() + ": shadow tensor '" + name + "' has no parameter");
    }
    const size_t idx = static_cast<size_t>(it - out.params.names.begin());
    if (!t.same_shape(out.params.values[idx])) {
      throw FormatError(path.string() + ": shadow shape mismatch for '" + name + "'");
    }
    out.params.shadow[idx] = std::move(t);
  }
  return out;
}

}  // namespace wsseg
