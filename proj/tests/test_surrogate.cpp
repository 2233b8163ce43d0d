#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include "hullopt/surrogate.hpp"

using namespace hullopt;

namespace {

std::vector<std::string> case_ids(int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("case_" + std::to_string(i));
  return ids;
}

// a PointSet with explicit values, bypassing flow cases
PointSet manual_points(const std::vector<std::array<double, kFeatureCount>>& xs,
                       const std::vector<std::array<double, kChannelCount>>& ys,
                       const std::vector<bool>& surface) {
  PointSet ps;
  const auto n = static_cast<Eigen::Index>(xs.size());
  ps.x.resize(n, kFeatureCount);
  ps.y.resize(n, kChannelCount);
  ps.mask.setZero(n, kChannelCount);
  ps.weight.setOnes(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < kFeatureCount; ++j) ps.x(i, j) = xs[i][j];
    for (int j = 0; j < kChannelCount; ++j) ps.y(i, j) = ys[i][j];
    ps.mask(i, ChP) = ps.mask(i, ChQ) = 1.0;
    if (surface[i]) {
      ps.mask(i, ChKx) = ps.mask(i, ChKy) = ps.mask(i, ChKz) = 1.0;
    } else {
      ps.mask(i, ChUx) = ps.mask(i, ChUy) = ps.mask(i, ChUz) = 1.0;
    }
  }
  return ps;
}

SurrogateModel zeroed_model(const std::vector<int>& hidden) {
  SurrogateModel m = make_model(hidden, Featurizer{}, 0);
  for (auto& w : m.w) w.setZero();
  for (auto& b : m.b) b.setZero();
  return m;
}

// tiny constant-field flow case on a closed box
FlowCase constant_case(const std::string& id, double p, double q) {
  std::vector<Vec3> v = {{0, 0, -0.5}, {1, 0, -0.5}, {1, 1, -0.5}, {0, 1, -0.5},
                         {0, 0, 0.5},  {1, 0, 0.5},  {1, 1, 0.5},  {0, 1, 0.5}};
  std::vector<HullMesh::Face> f = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
                                   {2, 3, 7}, {2, 7, 6}, {1, 2, 6}, {1, 6, 5}, {3, 0, 4}, {3, 4, 7}};
  FlowCase fc;
  fc.case_id = id;
  fc.mesh = HullMesh(std::move(v), std::move(f));
  fc.params = {1.0, 6.96, 3.52, 0.5, 1.0};
  fc.v_inf = 1.0;
  fc.L_pp = 1.0;
  for (std::size_t i = 0; i < fc.mesh.face_count(); ++i) {
    FieldSample s;
    s.position = fc.mesh.face_geometry(i).centroid;
    s.location = SampleClass::Surface;
    s.p = p;
    s.q = q;
    s.kappa = Vec3{0.25, 0.0, 0.0};
    fc.samples.push_back(s);
  }
  for (int i = 0; i < 8; ++i) {
    FieldSample s;
    s.position = {0.1 + 0.2 * (i % 2), 0.3 * ((i / 2) % 2), -0.4 + 0.2 * (i / 4)};
    s.location = SampleClass::Volume;
    s.p = p;
    s.q = q;
    s.u = Vec3{0.7, 0.0, 0.1};
    fc.samples.push_back(s);
  }
  return fc;
}

}  // namespace

TEST_CASE("split_dataset: sizes, determinism, degenerate ratios") {
  const auto ids = case_ids(140);
  const auto split = split_dataset(ids, {120.0 / 140, 10.0 / 140, 10.0 / 140}, 7);
  REQUIRE(split.train.size() == 120);
  REQUIRE(split.validation.size() == 10);
  REQUIRE(split.test.size() == 10);

  // disjoint union covers all ids
  std::set<std::string> all(split.train.begin(), split.train.end());
  all.insert(split.validation.begin(), split.validation.end());
  all.insert(split.test.begin(), split.test.end());
  REQUIRE(all.size() == 140);

  const auto again = split_dataset(ids, {120.0 / 140, 10.0 / 140, 10.0 / 140}, 7);
  REQUIRE(again.train == split.train);
  REQUIRE(again.test == split.test);
  const auto other = split_dataset(ids, {120.0 / 140, 10.0 / 140, 10.0 / 140}, 8);
  REQUIRE(other.train != split.train);

  const auto all_train = split_dataset(ids, {1.0, 0.0, 0.0}, 7);
  REQUIRE(all_train.train.size() == 140);
  REQUIRE(all_train.validation.empty());

  REQUIRE_THROWS_AS(split_dataset(case_ids(2), {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0), DataError);
  REQUIRE_THROWS_AS(split_dataset(ids, {0.5, 0.2, 0.2}, 0), DataError);
}

TEST_CASE("forward: zero-weight model predicts the de-normalization offsets") {
  SurrogateModel m = zeroed_model({6, 6});
  for (int c = 0; c < kChannelCount; ++c) {
    m.channel_mean[c] = 0.1 * (c + 1);
    m.channel_scale[c] = 2.0;
  }
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, kFeatureCount);
  const Eigen::MatrixXd out = m.predict(x);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < kChannelCount; ++c) REQUIRE(out(i, c) == Catch::Approx(0.1 * (c + 1)));
}

TEST_CASE("forward: single linear layer is hand-computable") {
  SurrogateModel m;
  m.w.push_back(Eigen::MatrixXd::Zero(kChannelCount, kFeatureCount));
  m.b.push_back(Eigen::VectorXd::Zero(kChannelCount));
  m.w[0](ChP, 0) = 2.0;  // p = 2*x0 + 1
  m.b[0][ChP] = 1.0;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, kFeatureCount);
  x(0, 0) = 3.0;
  REQUIRE(m.predict(x)(0, ChP) == Catch::Approx(7.0));

  x(0, 0) = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(m.predict(x), NumericError);
}

TEST_CASE("forward: q channel clamped to [0,1] at inference") {
  SurrogateModel m = zeroed_model({4});
  m.channel_mean[ChQ] = 1.7;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, kFeatureCount);
  REQUIRE(m.predict(x)(0, ChQ) == 1.0);
  m.channel_mean[ChQ] = -0.3;
  REQUIRE(m.predict(x)(0, ChQ) == 0.0);
}

TEST_CASE("loss: zero when predictions equal targets") {
  SurrogateModel m = zeroed_model({4});
  PointSet ps = manual_points({{std::array<double, kFeatureCount>{}}},
                              {{std::array<double, kChannelCount>{}}}, {true});
  const Eigen::MatrixXd y_norm = normalize_targets(m, ps.y);
  REQUIRE(batch_loss(m, ps.x, y_norm, ps.mask, ps.weight) == 0.0);
}

TEST_CASE("loss: hand-computed single volume point") {
  // all-zero model prediction; normalized targets 0.5 (p), 0.5 (q), u = (0.1, 0.2, 0.3)
  SurrogateModel m = zeroed_model({4});
  std::array<double, kChannelCount> y{};
  y[ChP] = 0.5;
  y[ChQ] = 0.5;
  y[ChUx] = 0.1;
  y[ChUy] = 0.2;
  y[ChUz] = 0.3;
  PointSet ps = manual_points({{std::array<double, kFeatureCount>{}}}, {y}, {false});
  REQUIRE(batch_loss(m, ps.x, ps.y, ps.mask, ps.weight) == Catch::Approx(1.6));
}

TEST_CASE("loss: class masking keeps kappa out of volume points and u out of surface points") {
  SurrogateModel m = zeroed_model({4});
  std::array<double, kChannelCount> y{};
  y[ChP] = 0.5;
  std::array<double, kChannelCount> y_poisoned = y;
  y_poisoned[ChUx] = 99.0;  // must not count for a surface point
  PointSet a = manual_points({{std::array<double, kFeatureCount>{}}}, {y}, {true});
  PointSet b = manual_points({{std::array<double, kFeatureCount>{}}}, {y_poisoned}, {true});
  REQUIRE(batch_loss(m, a.x, a.y, a.mask, a.weight) == batch_loss(m, b.x, b.y, b.mask, b.weight));

  std::array<double, kChannelCount> y_kappa = y;
  y_kappa[ChKx] = 42.0;  // must not count for a volume point
  PointSet c = manual_points({{std::array<double, kFeatureCount>{}}}, {y}, {false});
  PointSet d = manual_points({{std::array<double, kFeatureCount>{}}}, {y_kappa}, {false});
  REQUIRE(batch_loss(m, c.x, c.y, c.mask, c.weight) == batch_loss(m, d.x, d.y, d.mask, d.weight));
}

TEST_CASE("gradients match central finite differences on a 3-layer toy model") {
  SurrogateModel m = make_model({8, 6}, Featurizer{}, 31);
  Rng rng(55);
  const int n = 24;
  PointSet ps;
  ps.x.resize(n, kFeatureCount);
  ps.y.resize(n, kChannelCount);
  ps.mask.resize(n, kChannelCount);
  ps.weight.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kFeatureCount; ++j) ps.x(i, j) = rng.uniform(-1, 1);
    for (int j = 0; j < kChannelCount; ++j) ps.y(i, j) = rng.uniform(-1, 1);
    const bool surface = i % 2 == 0;
    for (int j = 0; j < kChannelCount; ++j) ps.mask(i, j) = 0.0;
    ps.mask(i, ChP) = ps.mask(i, ChQ) = 1.0;
    if (surface) {
      ps.mask(i, ChKx) = ps.mask(i, ChKy) = ps.mask(i, ChKz) = 1.0;
    } else {
      ps.mask(i, ChUx) = ps.mask(i, ChUy) = ps.mask(i, ChUz) = 1.0;
    }
    ps.weight[i] = surface ? 1.0 : 0.7;
  }
  const LossGrad lg = loss_and_gradient(m, ps.x, ps.y, ps.mask, ps.weight);
  const double h = 1e-5;
  auto loss_at = [&] { return batch_loss(m, ps.x, ps.y, ps.mask, ps.weight); };
  Rng probe(77);
  int checked = 0;
  while (checked < 60) {
    const std::size_t layer = probe.below(m.w.size());
    const bool is_bias = probe.uniform() < 0.2;
    double* param;
    double analytic;
    if (is_bias) {
      const auto i = static_cast<Eigen::Index>(probe.below(m.b[layer].size()));
      param = &m.b[layer][i];
      analytic = lg.db[layer][i];
    } else {
      const auto i = static_cast<Eigen::Index>(probe.below(m.w[layer].rows()));
      const auto j = static_cast<Eigen::Index>(probe.below(m.w[layer].cols()));
      param = &m.w[layer](i, j);
      analytic = lg.dw[layer](i, j);
    }
    const double saved = *param;
    *param = saved + h;
    const double up = loss_at();
    *param = saved - h;
    const double down = loss_at();
    *param = saved;
    const double fd = (up - down) / (2 * h);
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-8});
    REQUIRE(std::abs(analytic - fd) / denom < 1e-4);
    ++checked;
  }
}

TEST_CASE("train: constant-field dataset is learned quickly") {
  std::vector<FlowCase> cases;
  cases.push_back(constant_case("a", 101400.0, 0.8));
  cases.push_back(constant_case("b", 101400.0, 0.8));
  const FlowCase val = constant_case("c", 101400.0, 0.8);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 8;
  cfg.learning_rate = 2e-3;
  cfg.lr_decay_every = 0;
  cfg.hidden = {16, 16};
  cfg.seed = 5;
  const TrainResult result = train({&cases[0], &cases[1]}, {&val}, cfg, Featurizer{});
  REQUIRE(result.history.size() == 200);
  REQUIRE(result.history.back().train_loss < 1e-3);
}

TEST_CASE("train: zero epochs returns the initialized model and empty history") {
  std::vector<FlowCase> cases;
  cases.push_back(constant_case("a", 101325.0, 0.5));
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainResult result = train({&cases[0]}, {}, cfg, Featurizer{});
  REQUIRE(result.history.empty());
  const SurrogateModel fresh = make_model(cfg.hidden, Featurizer{}, cfg.seed);
  REQUIRE(result.model.w[0] == fresh.w[0]);
}

TEST_CASE("train: returned model achieves the best recorded validation loss") {
  std::vector<FlowCase> cases;
  cases.push_back(constant_case("a", 101380.0, 0.6));
  cases.push_back(constant_case("b", 101380.0, 0.6));
  const FlowCase val = constant_case("c", 101380.0, 0.6);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.batch_size = 32;
  cfg.hidden = {8};
  const TrainResult result = train({&cases[0], &cases[1]}, {&val}, cfg, Featurizer{});
  PointSet vp = make_point_set({&val}, Featurizer{});
  const double returned =
      batch_loss(result.model, vp.x, normalize_targets(result.model, vp.y), vp.mask, vp.weight);
  for (const auto& e : result.history) {
    if (std::isfinite(e.val_loss)) REQUIRE(returned <= e.val_loss + 1e-12);
  }
}

TEST_CASE("train: deterministic for a fixed seed") {
  std::vector<FlowCase> cases;
  cases.push_back(constant_case("a", 101380.0, 0.6));
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.hidden = {8};
  cfg.batch_size = 16;
  const TrainResult r1 = train({&cases[0]}, {}, cfg, Featurizer{});
  const TrainResult r2 = train({&cases[0]}, {}, cfg, Featurizer{});
  for (std::size_t l = 0; l < r1.model.w.size(); ++l) REQUIRE(r1.model.w[l] == r2.model.w[l]);
  for (std::size_t e = 0; e < r1.history.size(); ++e)
    REQUIRE(r1.history[e].train_loss == r2.history[e].train_loss);
}

TEST_CASE("train: full-batch descent with a small step is non-increasing on an easy target") {
  std::vector<FlowCase> cases;
  cases.push_back(constant_case("a", 101325.0, 0.5));
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 1 << 20;  // full batch
  cfg.learning_rate = 1e-5;
  cfg.lr_decay_every = 0;
  cfg.hidden = {8};
  const TrainResult result = train({&cases[0]}, {}, cfg, Featurizer{});
  for (std::size_t e = 1; e < result.history.size(); ++e)
    REQUIRE(result.history[e].train_loss <= result.history[e - 1].train_loss + 1e-9);
}

TEST_CASE("featurization is pure and stays within bounds") {
  Featurizer f;
  const DesignParams p{1.0, 6.96, 3.52, 0.5, 1.3};
  const auto a = f.features({0.3, -0.1, 0.05}, 0.02, {0, 1, 0}, 3.0, p, false);
  const auto b = f.features({0.3, -0.1, 0.05}, 0.02, {0, 1, 0}, 3.0, p, false);
  REQUIRE(a == b);
  for (int i = 0; i < kFeatureCount; ++i) {
    REQUIRE(a[i] >= -2.0);
    REQUIRE(a[i] <= 2.0);
  }
}

TEST_CASE("checkpoint round trip is bit-exact") {
  SurrogateModel m = make_model({12, 9}, Featurizer{}, 123);
  m.channel_mean.setRandom();
  m.channel_scale = m.channel_scale.array() + 0.5;
  auto dir = std::filesystem::temp_directory_path() / "hullopt_tests";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "model.hsm").string();
  save_checkpoint(m, path);
  const SurrogateModel back = load_checkpoint(path);
  REQUIRE(back.layer_sizes() == m.layer_sizes());
  for (std::size_t l = 0; l < m.w.size(); ++l) {
    REQUIRE(back.w[l] == m.w[l]);
    REQUIRE(back.b[l] == m.b[l]);
  }
  REQUIRE(back.channel_mean == m.channel_mean);
  REQUIRE(back.channel_scale == m.channel_scale);
  REQUIRE(back.featurizer.v_ref == m.featurizer.v_ref);

  // not a checkpoint
  const auto junk = (dir / "junk.hsm").string();
  std::ofstream(junk) << "not a checkpoint";
  REQUIRE_THROWS_AS(load_checkpoint(junk), DataError);
}

TEST_CASE("evaluate_design: deterministic record and sane timing") {
  const OracleConfig ocfg;
  const WaterConstants w;
  const OracleEvaluator oracle(ocfg, w);
  const DesignParams p{1.0, 6.96, 3.52, 0.5, 1.4};
  const HullMesh mesh = oracle.morphed(p);
  SurrogateModel m = make_model({16, 16}, Featurizer{}, 3);
  m.channel_scale.setOnes();
  const DesignEvaluation a = evaluate_design(m, mesh, p, w);
  const DesignEvaluation b = evaluate_design(m, mesh, p, w);
  REQUIRE(a.forces.fx == b.forces.fx);
  REQUIRE(a.forces.fy == b.forces.fy);
  REQUIRE(a.forces.fz == b.forces.fz);
  REQUIRE(a.surface_points == mesh.face_count());
  REQUIRE(a.volume_points == 16 * 8 * 8);
  REQUIRE(a.wall_seconds < 1.0);
}
