// Point-wise flow-field regressor: a small MLP conditioned on geometry
// through signed-distance/normal features and the design descriptor,
// predicting (p, q, u, kappa) per point. Trained with a split
// surface/volume L1 loss on z-score-normalized channels using
// adaptive-moment SGD. Whole-design evaluation featurizes face centroids
// plus a volume grid and recovers forces by hull-surface integration.
//
// Training is single-threaded and fully deterministic for a given seed.
// A trained model is immutable and safe to share across threads.
#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "hullopt/doe.hpp"
#include "hullopt/fields.hpp"
#include "hullopt/mesh.hpp"
#include "hullopt/morph.hpp"
#include "hullopt/oracle.hpp"
#include "hullopt/rng.hpp"

namespace hullopt {

constexpr int kFeatureCount = 13;
constexpr int kChannelCount = 8;

// output channel manifest
inline const std::array<std::string, kChannelCount> kChannelNames = {
    "p", "q", "u_x", "u_y", "u_z", "kappa_x", "kappa_y", "kappa_z"};

enum Channel : int { ChP = 0, ChQ = 1, ChUx = 2, ChUy = 3, ChUz = 4, ChKx = 5, ChKy = 6, ChKz = 7 };

// ---------------------------------------------------------------------------
// Featurization

// Fixed per-run featurization metadata; persisted in the checkpoint so that
// inference reproduces training-time features exactly.
struct Featurizer {
  DesignBounds bounds;  // min-max normalization of the shape parameters
  double v_ref{2.6};    // freestream normalization

  // 13 features: x/L, y/L, z/L, sdf/L, n (3), V/V_ref, 4 shape params
  // (min-max normalized), surface flag
  Eigen::Matrix<double, kFeatureCount, 1> features(const Vec3& pos, double sdf, const Vec3& normal,
                                                   double L, const DesignParams& params,
                                                   bool surface) const {
    Eigen::Matrix<double, kFeatureCount, 1> f;
    f[0] = pos.x / L;
    f[1] = pos.y / L;
    f[2] = pos.z / L;
    f[3] = sdf / L;
    f[4] = normal.x;
    f[5] = normal.y;
    f[6] = normal.z;
    f[7] = params.v_inf / v_ref;
    const auto v = params.as_array();
    for (int k = 0; k < 4; ++k)
      f[8 + k] = (v[k] - bounds.lower[k]) / (bounds.upper[k] - bounds.lower[k]);
    f[12] = surface ? 1.0 : 0.0;
    if (!f.allFinite()) throw NumericError("non-finite feature vector");
    return f;
  }
};

// Flattened supervised points of one or more flow cases.
struct PointSet {
  Eigen::MatrixXd x;       // N x 13
  Eigen::MatrixXd y;       // N x 8, physical units
  Eigen::MatrixXd mask;    // N x 8, 1 where the channel is supervised
  Eigen::VectorXd weight;  // N, surface/volume loss weight

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
};

inline void append_case_points(const FlowCase& fc, const Featurizer& featurizer,
                               double surface_weight, double volume_weight,
                               std::vector<Eigen::Matrix<double, kFeatureCount, 1>>& xs,
                               std::vector<Eigen::Matrix<double, kChannelCount, 1>>& ys,
                               std::vector<Eigen::Matrix<double, kChannelCount, 1>>& masks,
                               std::vector<double>& weights) {
  const double L = fc.L_pp;
  MeshBvh bvh(fc.mesh);
  std::size_t surface_idx = 0;
  for (const auto& s : fc.samples) {
    Eigen::Matrix<double, kChannelCount, 1> y = Eigen::Matrix<double, kChannelCount, 1>::Zero();
    Eigen::Matrix<double, kChannelCount, 1> m = Eigen::Matrix<double, kChannelCount, 1>::Zero();
    y[ChP] = s.p;
    y[ChQ] = s.q;
    m[ChP] = m[ChQ] = 1.0;
    if (s.location == SampleClass::Surface) {
      if (!s.kappa) throw DataError("surface sample without kappa");
      y[ChKx] = s.kappa->x;
      y[ChKy] = s.kappa->y;
      y[ChKz] = s.kappa->z;
      m[ChKx] = m[ChKy] = m[ChKz] = 1.0;
      // surface samples sit at face centroids, in face order
      const Vec3 n = surface_idx < fc.mesh.face_count()
                         ? fc.mesh.face_geometry(surface_idx).normal
                         : bvh.query(s.position).normal;
      xs.push_back(featurizer.features(s.position, 0.0, n, L, fc.params, true));
      weights.push_back(surface_weight);
      ++surface_idx;
    } else {
      if (!s.u) throw DataError("volume sample without velocity");
      y[ChUx] = s.u->x;
      y[ChUy] = s.u->y;
      y[ChUz] = s.u->z;
      m[ChUx] = m[ChUy] = m[ChUz] = 1.0;
      const SignedDistance sd = bvh.query(s.position);
      xs.push_back(featurizer.features(s.position, sd.distance, sd.normal, L, fc.params, false));
      weights.push_back(volume_weight);
    }
    ys.push_back(y);
    masks.push_back(m);
  }
}

inline PointSet make_point_set(const std::vector<const FlowCase*>& cases, const Featurizer& featurizer,
                               double surface_weight = 1.0, double volume_weight = 1.0) {
  std::vector<Eigen::Matrix<double, kFeatureCount, 1>> xs;
  std::vector<Eigen::Matrix<double, kChannelCount, 1>> ys, masks;
  std::vector<double> weights;
  for (const FlowCase* fc : cases)
    append_case_points(*fc, featurizer, surface_weight, volume_weight, xs, ys, masks, weights);
  PointSet ps;
  const auto n = static_cast<Eigen::Index>(xs.size());
  ps.x.resize(n, kFeatureCount);
  ps.y.resize(n, kChannelCount);
  ps.mask.resize(n, kChannelCount);
  ps.weight.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ps.x.row(i) = xs[i].transpose();
    ps.y.row(i) = ys[i].transpose();
    ps.mask.row(i) = masks[i].transpose();
    ps.weight[i] = weights[i];
  }
  return ps;
}

// ---------------------------------------------------------------------------
// Model

struct SurrogateModel {
  std::vector<Eigen::MatrixXd> w;  // layer l: (out x in)
  std::vector<Eigen::VectorXd> b;
  Eigen::Matrix<double, kChannelCount, 1> channel_mean = Eigen::Matrix<double, kChannelCount, 1>::Zero();
  Eigen::Matrix<double, kChannelCount, 1> channel_scale = Eigen::Matrix<double, kChannelCount, 1>::Ones();
  Featurizer featurizer;

  std::vector<int> layer_sizes() const {
    std::vector<int> sizes;
    if (w.empty()) return sizes;
    sizes.push_back(static_cast<int>(w.front().cols()));
    for (const auto& m : w) sizes.push_back(static_cast<int>(m.rows()));
    return sizes;
  }

  // batch forward to normalized outputs; `acts` holds post-tanh activations
  Eigen::MatrixXd forward_normalized(const Eigen::MatrixXd& x,
                                     std::vector<Eigen::MatrixXd>* acts = nullptr) const {
    Eigen::MatrixXd h = x;
    for (std::size_t l = 0; l < w.size(); ++l) {
      Eigen::MatrixXd z = (h * w[l].transpose()).rowwise() + b[l].transpose();
      if (l + 1 < w.size()) {
        h = z.array().tanh();
        if (acts) acts->push_back(h);
      } else {
        h = std::move(z);
      }
    }
    return h;
  }

  // physical-unit predictions; q clamped to [0, 1] at inference only
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const {
    if (!x.allFinite()) throw NumericError("non-finite features");
    Eigen::MatrixXd out = forward_normalized(x);
    for (int c = 0; c < kChannelCount; ++c)
      out.col(c) = out.col(c).array() * channel_scale[c] + channel_mean[c];
    out.col(ChQ) = out.col(ChQ).array().min(1.0).max(0.0);
    return out;
  }
};

inline SurrogateModel make_model(const std::vector<int>& hidden, const Featurizer& featurizer,
                                 std::uint64_t seed) {
  SurrogateModel model;
  model.featurizer = featurizer;
  std::vector<int> sizes;
  sizes.push_back(kFeatureCount);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(kChannelCount);
  Rng rng(substream_seed(seed, "init"));
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-bound, bound);
    model.w.push_back(std::move(w));
    model.b.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Loss and gradient

// Split L1 structure: volume points contribute |p| + |u| + |q| terms,
// surface points |p| + |q| + |kappa| terms, via the per-class channel mask.
// Loss is the weighted mean over points of the summed absolute channel
// errors, computed on normalized channels.
inline Eigen::MatrixXd normalize_targets(const SurrogateModel& model, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd out = y;
  for (int c = 0; c < kChannelCount; ++c)
    out.col(c) = (out.col(c).array() - model.channel_mean[c]) / model.channel_scale[c];
  return out;
}

inline double batch_loss(const SurrogateModel& model, const Eigen::MatrixXd& x,
                         const Eigen::MatrixXd& y_norm, const Eigen::MatrixXd& mask,
                         const Eigen::VectorXd& weight) {
  if (x.rows() == 0) throw DataError("loss: empty batch");
  const Eigen::MatrixXd out = model.forward_normalized(x);
  const Eigen::ArrayXXd err = ((out - y_norm).array() * mask.array()).abs();
  return (err.rowwise().sum() * weight.array()).sum() / static_cast<double>(x.rows());
}

struct LossGrad {
  double loss{0.0};
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
};

inline LossGrad loss_and_gradient(const SurrogateModel& model, const Eigen::MatrixXd& x,
                                  const Eigen::MatrixXd& y_norm, const Eigen::MatrixXd& mask,
                                  const Eigen::VectorXd& weight) {
  const auto n = x.rows();
  if (n == 0) throw DataError("loss: empty batch");
  std::vector<Eigen::MatrixXd> acts;
  const Eigen::MatrixXd out = model.forward_normalized(x, &acts);

  LossGrad lg;
  const Eigen::ArrayXXd resid = (out - y_norm).array() * mask.array();
  lg.loss = (resid.abs().rowwise().sum() * weight.array()).sum() / static_cast<double>(n);

  // d|r|/dr = sign(r); the weighted mean distributes 1/n
  Eigen::MatrixXd g = (resid.sign().colwise() * (weight.array() / static_cast<double>(n))).matrix();

  lg.dw.resize(model.w.size());
  lg.db.resize(model.w.size());
  for (int l = static_cast<int>(model.w.size()) - 1; l >= 0; --l) {
    const Eigen::MatrixXd& input = l == 0 ? x : acts[l - 1];
    lg.dw[l] = g.transpose() * input;
    lg.db[l] = g.colwise().sum().transpose();
    if (l > 0) {
      g = (g * model.w[l]).array() * (1.0 - acts[l - 1].array().square());
    }
  }
  return lg;
}

// ---------------------------------------------------------------------------
// Dataset split

struct DatasetSplit {
  std::vector<std::string> train, validation, test;
};

inline DatasetSplit split_dataset(const std::vector<std::string>& ids,
                                  const std::array<double, 3>& ratios, std::uint64_t seed) {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9) throw DataError("split ratios must sum to 1");
  const std::size_t n = ids.size();
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = ratios[k] * static_cast<double>(n);
    counts[k] = static_cast<std::size_t>(exact);
    frac[k] = exact - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  while (assigned < n) {  // largest fractional part first, ties by index
    int best = 0;
    for (int k = 1; k < 3; ++k)
      if (frac[k] > frac[best]) best = k;
    ++counts[best];
    frac[best] = -1.0;
    ++assigned;
  }
  for (int k = 0; k < 3; ++k)
    if (ratios[k] > 0.0 && counts[k] == 0)
      throw DataError("dataset too small for a non-empty part " + std::to_string(k));

  std::vector<std::string> shuffled = ids;
  Rng rng(substream_seed(seed, "split"));
  rng.shuffle(shuffled);
  DatasetSplit split;
  std::size_t pos = 0;
  split.train.assign(shuffled.begin(), shuffled.begin() + counts[0]);
  pos += counts[0];
  split.validation.assign(shuffled.begin() + pos, shuffled.begin() + pos + counts[1]);
  pos += counts[1];
  split.test.assign(shuffled.begin() + pos, shuffled.end());
  return split;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  double learning_rate{1e-3};
  int batch_size{1024};
  int epochs{120};
  std::uint64_t seed{0};
  double beta1{0.9};
  double beta2{0.999};
  int validation_cadence{1};
  std::vector<int> hidden{64, 64, 64};
  double surface_weight{1.0};
  double volume_weight{1.0};
  // step decay keeps late epochs refining rather than bouncing
  double lr_decay{0.5};
  int lr_decay_every{40};

  void validate() const {
    if (!(learning_rate > 0.0)) throw DataError("learning rate must be positive");
    if (batch_size < 1) throw DataError("batch size must be >= 1");
    if (epochs < 0) throw DataError("epochs must be >= 0");
  }
};

struct EpochStats {
  int epoch{0};
  double train_loss{0.0};
  double val_loss{0.0};
};

struct TrainResult {
  SurrogateModel model;
  std::vector<EpochStats> history;
};

namespace detail {

class AdamState {
 public:
  AdamState(const SurrogateModel& model, double beta1, double beta2)
      : beta1_(beta1), beta2_(beta2) {
    for (const auto& w : model.w) {
      mw_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
      vw_.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : model.b) {
      mb_.push_back(Eigen::VectorXd::Zero(b.size()));
      vb_.push_back(Eigen::VectorXd::Zero(b.size()));
    }
  }

  void step(SurrogateModel& model, const LossGrad& lg, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    constexpr double eps = 1e-8;
    for (std::size_t l = 0; l < model.w.size(); ++l) {
      mw_[l] = beta1_ * mw_[l] + (1.0 - beta1_) * lg.dw[l];
      vw_[l] = (beta2_ * vw_[l].array() + (1.0 - beta2_) * lg.dw[l].array().square()).matrix();
      model.w[l].array() -=
          lr * (mw_[l].array() / bc1) / ((vw_[l].array() / bc2).sqrt() + eps);
      mb_[l] = beta1_ * mb_[l] + (1.0 - beta1_) * lg.db[l];
      vb_[l] = (beta2_ * vb_[l].array() + (1.0 - beta2_) * lg.db[l].array().square()).matrix();
      model.b[l].array() -=
          lr * (mb_[l].array() / bc1) / ((vb_[l].array() / bc2).sqrt() + eps);
    }
  }

 private:
  double beta1_, beta2_;
  long t_{0};
  std::vector<Eigen::MatrixXd> mw_, vw_;
  std::vector<Eigen::VectorXd> mb_, vb_;
};

inline void fit_normalization(SurrogateModel& model, const PointSet& train) {
  for (int c = 0; c < kChannelCount; ++c) {
    double sum = 0.0, count = 0.0;
    for (Eigen::Index i = 0; i < train.y.rows(); ++i) {
      if (train.mask(i, c) > 0.0) {
        sum += train.y(i, c);
        count += 1.0;
      }
    }
    const double mean = count > 0 ? sum / count : 0.0;
    double var = 0.0;
    for (Eigen::Index i = 0; i < train.y.rows(); ++i)
      if (train.mask(i, c) > 0.0) var += (train.y(i, c) - mean) * (train.y(i, c) - mean);
    const double sd = count > 0 ? std::sqrt(var / count) : 0.0;
    model.channel_mean[c] = mean;
    model.channel_scale[c] = sd > 1e-12 ? sd : 1.0;
  }
}

}  // namespace detail

// Returns the weights achieving the best validation loss seen at any
// recorded epoch. Deterministic for a given seed.
inline TrainResult train(const std::vector<const FlowCase*>& train_cases,
                         const std::vector<const FlowCase*>& val_cases, const TrainConfig& cfg,
                         const Featurizer& featurizer) {
  cfg.validate();
  if (train_cases.empty()) throw DataError("train: empty training set");

  TrainResult result;
  result.model = make_model(cfg.hidden, featurizer, cfg.seed);
  PointSet train_pts = make_point_set(train_cases, featurizer, cfg.surface_weight, cfg.volume_weight);
  detail::fit_normalization(result.model, train_pts);
  const Eigen::MatrixXd train_y = normalize_targets(result.model, train_pts.y);

  PointSet val_pts;
  Eigen::MatrixXd val_y;
  if (!val_cases.empty()) {
    val_pts = make_point_set(val_cases, featurizer, cfg.surface_weight, cfg.volume_weight);
    val_y = normalize_targets(result.model, val_pts.y);
  }

  if (cfg.epochs == 0) return result;

  detail::AdamState adam(result.model, cfg.beta1, cfg.beta2);
  Rng shuffle_rng(substream_seed(cfg.seed, "train-shuffle"));
  const auto n = static_cast<std::size_t>(train_pts.x.rows());
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);

  SurrogateModel best = result.model;
  double best_val = std::numeric_limits<double>::max();
  double lr = cfg.learning_rate;

  Eigen::MatrixXd bx, by, bm;
  Eigen::VectorXd bw;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.lr_decay_every > 0 && epoch > 1 && (epoch - 1) % cfg.lr_decay_every == 0)
      lr *= cfg.lr_decay;
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min<std::size_t>(cfg.batch_size, n - start);
      bx.resize(count, kFeatureCount);
      by.resize(count, kChannelCount);
      bm.resize(count, kChannelCount);
      bw.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const auto r = order[start + i];
        bx.row(i) = train_pts.x.row(r);
        by.row(i) = train_y.row(r);
        bm.row(i) = train_pts.mask.row(r);
        bw[i] = train_pts.weight[r];
      }
      const LossGrad lg = loss_and_gradient(result.model, bx, by, bm, bw);
      if (!std::isfinite(lg.loss))
        throw NumericError("training diverged at epoch " + std::to_string(epoch));
      adam.step(result.model, lg, lr);
      epoch_loss += lg.loss * static_cast<double>(count);
      seen += count;
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(seen);
    if (!val_cases.empty() &&
        (epoch % cfg.validation_cadence == 0 || epoch == cfg.epochs)) {
      stats.val_loss = batch_loss(result.model, val_pts.x, val_y, val_pts.mask, val_pts.weight);
      if (!std::isfinite(stats.val_loss))
        throw NumericError("validation diverged at epoch " + std::to_string(epoch));
      if (stats.val_loss < best_val) {
        best_val = stats.val_loss;
        best = result.model;
      }
    } else {
      stats.val_loss = std::numeric_limits<double>::quiet_NaN();
    }
    result.history.push_back(stats);
  }
  if (!val_cases.empty()) result.model = best;
  return result;
}

// ---------------------------------------------------------------------------
// Whole-design evaluation

struct SamplingPlan {
  std::array<int, 3> volume_grid{16, 8, 8};  // 0s skip the volume pass
};

struct DesignEvaluation {
  ForceVector forces;
  double wall_seconds{0.0};
  std::size_t surface_points{0};
  std::size_t volume_points{0};
};

// Featurizes face centroids (surface) and a padded volume grid, predicts
// fields, and integrates forces on the hull. The speed may override the
// design's own v_inf (multi-objective evaluations at fixed speeds).
inline DesignEvaluation evaluate_design(const SurrogateModel& model, const HullMesh& mesh,
                                        const DesignParams& params, const WaterConstants& water,
                                        const SamplingPlan& plan = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const double L = mesh.max_corner().x - mesh.min_corner().x;
  const auto nf = static_cast<Eigen::Index>(mesh.face_count());

  Eigen::MatrixXd x(nf, kFeatureCount);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const auto& g = mesh.face_geometry(f);
    x.row(f) =
        model.featurizer.features(g.centroid, 0.0, g.normal, L, params, true).transpose();
  }
  const Eigen::MatrixXd pred = model.predict(x);

  std::vector<FieldSample> samples(static_cast<std::size_t>(nf));
  for (Eigen::Index f = 0; f < nf; ++f) {
    auto& s = samples[f];
    s.position = mesh.face_geometry(f).centroid;
    s.location = SampleClass::Surface;
    s.p = pred(f, ChP);
    s.q = pred(f, ChQ);
    s.kappa = Vec3{pred(f, ChKx), pred(f, ChKy), pred(f, ChKz)};
  }

  DesignEvaluation ev;
  ev.forces = integrate_forces(mesh, samples, water);
  ev.surface_points = static_cast<std::size_t>(nf);

  const auto [gx, gy, gz] = plan.volume_grid;
  if (gx > 1 && gy > 1 && gz > 1) {
    const Vec3 lo = mesh.min_corner(), hi = mesh.max_corner();
    const double B = hi.y - lo.y, T = -lo.z;
    const Vec3 origin{lo.x - 0.15 * L, lo.y - 0.5 * B, lo.z - 0.4 * T};
    const Vec3 span{1.3 * L, 2.0 * B, 0.4 * T + T + 0.8 * hi.z};
    const Vec3 spacing{span.x / (gx - 1), span.y / (gy - 1), span.z / (gz - 1)};
    MeshBvh bvh(mesh);
    Eigen::MatrixXd xv(static_cast<Eigen::Index>(gx) * gy * gz, kFeatureCount);
    Eigen::Index row = 0;
    for (int ix = 0; ix < gx; ++ix)
      for (int iy = 0; iy < gy; ++iy)
        for (int iz = 0; iz < gz; ++iz) {
          const Vec3 p{origin.x + ix * spacing.x, origin.y + iy * spacing.y,
                       origin.z + iz * spacing.z};
          const SignedDistance sd = bvh.query(p);
          xv.row(row++) =
              model.featurizer.features(p, sd.distance, sd.normal, L, params, false).transpose();
        }
    (void)model.predict(xv);  // volume fields evaluated for inspection/timing parity
    ev.volume_points = static_cast<std::size_t>(xv.rows());
  }

  ev.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return ev;
}

// ---------------------------------------------------------------------------
// Checkpoint persistence: versioned binary with layer manifest, weights and
// normalization statistics, plus the featurizer metadata.

namespace detail {
constexpr std::uint32_t kCheckpointMagic = 0x314d5348;  // "HSM1"
}

inline void save_checkpoint(const SurrogateModel& model, const std::string& path) {
  using namespace detail;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_pod(out, kCheckpointMagic);
  write_pod<std::uint32_t>(out, 1);
  const auto sizes = model.layer_sizes();
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(sizes.size()));
  for (int s : sizes) write_pod<std::int32_t>(out, s);
  for (std::size_t l = 0; l < model.w.size(); ++l) {
    const auto& w = model.w[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) write_pod(out, w(i, j));
    for (Eigen::Index i = 0; i < model.b[l].size(); ++i) write_pod(out, model.b[l][i]);
  }
  for (int c = 0; c < kChannelCount; ++c) {
    write_string(out, kChannelNames[c]);
    write_pod(out, model.channel_mean[c]);
    write_pod(out, model.channel_scale[c]);
  }
  for (int k = 0; k < kParamCount; ++k) {
    write_pod(out, model.featurizer.bounds.lower[k]);
    write_pod(out, model.featurizer.bounds.upper[k]);
  }
  write_pod(out, model.featurizer.v_ref);
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline SurrogateModel load_checkpoint(const std::string& path) {
  using namespace detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  if (read_pod<std::uint32_t>(in) != kCheckpointMagic)
    throw DataError(path + ": not a model checkpoint");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != 1) throw DataError(path + ": unsupported checkpoint version");
  const auto nlayers = read_pod<std::uint32_t>(in);
  std::vector<int> sizes(nlayers);
  for (auto& s : sizes) s = read_pod<std::int32_t>(in);
  if (sizes.size() < 2 || sizes.front() != kFeatureCount || sizes.back() != kChannelCount)
    throw DataError(path + ": layer manifest does not match this build");
  SurrogateModel model;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = read_pod<double>(in);
    Eigen::VectorXd b(sizes[l + 1]);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = read_pod<double>(in);
    model.w.push_back(std::move(w));
    model.b.push_back(std::move(b));
  }
  for (int c = 0; c < kChannelCount; ++c) {
    const std::string name = read_string(in);
    if (name != kChannelNames[c])
      throw DataError(path + ": channel manifest mismatch at '" + name + "'");
    model.channel_mean[c] = read_pod<double>(in);
    model.channel_scale[c] = read_pod<double>(in);
    if (!(model.channel_scale[c] > 0.0)) throw DataError(path + ": non-positive channel scale");
  }
  for (int k = 0; k < kParamCount; ++k) {
    model.featurizer.bounds.lower[k] = read_pod<double>(in);
    model.featurizer.bounds.upper[k] = read_pod<double>(in);
  }
  model.featurizer.v_ref = read_pod<double>(in);
  return model;
}

inline void save_loss_history(const std::vector<EpochStats>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "epoch,train_loss,val_loss\n";
  char buf[96];
  for (const auto& e : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", e.epoch, e.train_loss, e.val_loss);
    out << buf;
  }
}

}  // namespace hullopt
