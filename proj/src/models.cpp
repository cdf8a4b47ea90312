#include <betacfg/models.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include <betacfg/adam.hpp>

namespace betacfg {

Vector time_features(int t, int T, int n_freqs) {
  const double u = double(t) / double(T);
  Vector f(2 * n_freqs);
  for (int k = 0; k < n_freqs; ++k) {
    const double w = 2.0 * std::numbers::pi * (k + 1) * u;
    f[2 * k] = std::sin(w);
    f[2 * k + 1] = std::cos(w);
  }
  return f;
}

namespace {

Matrix denoiser_inputs(const Denoiser& d, const Matrix& x_t,
                       const std::vector<int>& ts,
                       const std::vector<int>& conds) {
  if (x_t.rows() != d.data_dim)
    throw std::invalid_argument("sample dimensionality mismatch");
  if (ts.size() != size_t(x_t.cols()) || conds.size() != size_t(x_t.cols()))
    throw std::invalid_argument("per-sample metadata length mismatch");
  Matrix X(d.input_dim(), x_t.cols());
  X.topRows(d.data_dim) = x_t;
  for (Index j = 0; j < x_t.cols(); ++j) {
    const int c = conds[size_t(j)];
    if (c < 0 || c > d.n_classes)
      throw std::invalid_argument("unknown class id " + std::to_string(c));
    X.col(j).segment(d.data_dim, 2 * d.n_time_freqs) =
        time_features(ts[size_t(j)], d.schedule.steps(), d.n_time_freqs);
    X.col(j).tail(d.embed_dim) = d.cond_embedding.row(c).transpose();
  }
  return X;
}

Matrix classifier_inputs(const NoisyClassifier& c, const Matrix& x_t, int t) {
  if (x_t.rows() != c.data_dim)
    throw std::invalid_argument("sample dimensionality mismatch");
  c.schedule.check_step(t);
  Matrix X(c.input_dim(), x_t.cols());
  X.topRows(c.data_dim) = x_t;
  const Vector tf = time_features(t, c.schedule.steps(), c.n_time_freqs);
  X.bottomRows(2 * c.n_time_freqs).colwise() = tf;
  return X;
}

// stable column-wise softmax
Matrix softmax_columns(const Matrix& logits) {
  Matrix p = logits;
  for (Index j = 0; j < p.cols(); ++j) {
    Vector col = p.col(j);
    const double m = col.maxCoeff();
    col = (col.array() - m).exp();
    p.col(j) = col / col.sum();
  }
  return p;
}

struct SplitIndices {
  std::vector<Index> train;
  std::vector<Index> val;
};

SplitIndices split_train_val(Index n, double val_fraction, Rng& rng) {
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Index(0));
  for (Index i = n - 1; i > 0; --i)
    std::swap(idx[size_t(i)], idx[size_t(rng.uniform_int(i + 1))]);
  Index n_val = Index(std::llround(double(n) * val_fraction));
  n_val = std::clamp<Index>(n_val, 0, n - 1);
  SplitIndices s;
  s.train.assign(idx.begin(), idx.end() - n_val);
  s.val.assign(idx.end() - n_val, idx.end());
  if (s.val.empty()) s.val = s.train;  // tiny sets validate on train data
  return s;
}

}  // namespace

Denoiser train_denoiser(const LabeledSet& data, const NoiseSchedule& sched,
                        const DenoiserConfig& cfg, std::uint64_t seed,
                        TrainStats* stats) {
  const Index n = data.points.cols();
  if (n == 0) throw DataError("empty training set");
  if (std::set<int>(data.labels.begin(), data.labels.end()).size() < 2)
    throw DataError("training set must contain at least two classes");
  if (cfg.steps < 1 || cfg.batch < 1 || !(cfg.lr > 0.0))
    throw ConfigError("invalid training configuration");
  if (!(cfg.p_uncond >= 0.0 && cfg.p_uncond <= 1.0))
    throw ConfigError("p_uncond must lie in [0, 1]");

  const int n_classes =
      1 + *std::max_element(data.labels.begin(), data.labels.end());
  const int T = sched.steps();
  const int D = int(data.points.rows());

  Denoiser d;
  d.schedule = sched;
  d.n_classes = n_classes;
  d.embed_dim = cfg.embed_dim;
  d.n_time_freqs = cfg.n_time_freqs;
  d.data_dim = D;

  Rng init_rng(derive_seed(seed, 0));
  std::vector<int> dims{int(d.input_dim())};
  for (int i = 0; i < cfg.hidden_layers; ++i) dims.push_back(cfg.hidden);
  dims.push_back(D);
  d.net = make_mlp(dims, Activation::Silu, init_rng);
  d.cond_embedding = 0.1 * init_rng.normal_matrix(n_classes + 1, d.embed_dim);

  Rng split_rng(derive_seed(seed, 1));
  const SplitIndices split = split_train_val(n, cfg.val_fraction, split_rng);

  // fixed validation probe: (t, eps) drawn once, so the reported val loss is
  // comparable across training steps and runs
  Rng probe_rng(derive_seed(seed, 2));
  const int repeats = 2;
  const Index n_val = Index(split.val.size()) * repeats;
  Matrix val_x0(D, n_val);
  std::vector<int> val_ts(static_cast<size_t>(n_val));
  std::vector<int> val_conds(static_cast<size_t>(n_val));
  Matrix val_eps(D, n_val);
  for (Index j = 0; j < n_val; ++j) {
    const Index src = split.val[size_t(j) % split.val.size()];
    val_x0.col(j) = data.points.col(src);
    val_ts[size_t(j)] = int(probe_rng.uniform_int(T)) + 1;
    val_conds[size_t(j)] = data.labels[size_t(src)];
    val_eps.col(j) = probe_rng.normal_vector(D);
  }
  Matrix val_xt(D, n_val);
  for (Index j = 0; j < n_val; ++j)
    val_xt.col(j) = noisify(sched, val_ts[size_t(j)], val_x0.col(j),
                            val_eps.col(j));

  auto val_loss = [&]() {
    const Matrix pred = predict_eps(d, val_xt, val_ts, val_conds);
    return (pred - val_eps).squaredNorm() / double(val_eps.size());
  };

  std::vector<TensorRef> params = parameter_refs(d.net, "denoiser");
  params.push_back({"denoiser.embedding", d.cond_embedding.data(),
                    d.cond_embedding.size()});
  Adam opt(AdamConfig{cfg.lr}, params);

  TrainStats local;
  TrainStats& st = stats ? *stats : local;
  st.initial_val_loss = val_loss();
  st.curve.clear();

  Rng batch_rng(derive_seed(seed, 3));
  const Index n_train = Index(split.train.size());
  const int B = cfg.batch;

  Matrix x0(D, B), eps(D, B), xt(D, B);
  std::vector<int> ts(static_cast<size_t>(B)), conds(static_cast<size_t>(B));
  double window_sum = 0.0;
  long window_count = 0;
  double last_window_mean = 0.0;

  for (long step = 1; step <= cfg.steps; ++step) {
    for (int j = 0; j < B; ++j) {
      const Index src = split.train[size_t(batch_rng.uniform_int(n_train))];
      x0.col(j) = data.points.col(src);
      ts[size_t(j)] = int(batch_rng.uniform_int(T)) + 1;
      for (int i = 0; i < D; ++i) eps(i, j) = batch_rng.normal();
      const bool drop = batch_rng.uniform() < cfg.p_uncond;
      conds[size_t(j)] = drop ? d.null_token() : data.labels[size_t(src)];
      const double ab = sched.alpha_bar_at(ts[size_t(j)]);
      xt.col(j) = std::sqrt(ab) * x0.col(j) +
                  std::sqrt(1.0 - ab) * eps.col(j);
    }

    const Matrix X = denoiser_inputs(d, xt, ts, conds);
    const ForwardTrace trace = forward_trace(d.net, X);
    const Matrix diff = trace.out - eps;
    const double loss = diff.squaredNorm() / double(diff.size());
    if (!std::isfinite(loss))
      throw DataError("non-finite training loss at step " +
                      std::to_string(step));

    MlpGrads g = backward(d.net, trace, (2.0 / double(diff.size())) * diff);
    Matrix emb_grad = Matrix::Zero(n_classes + 1, d.embed_dim);
    for (int j = 0; j < B; ++j)
      emb_grad.row(conds[size_t(j)]) +=
          g.input.col(j).tail(d.embed_dim).transpose();

    std::vector<TensorRef> grads = parameter_refs(g, "denoiser");
    grads.push_back({"denoiser.embedding", emb_grad.data(), emb_grad.size()});
    opt.step(params, grads);

    window_sum += loss;
    ++window_count;
    if (step % cfg.log_every == 0 || step == cfg.steps) {
      last_window_mean = window_sum / double(window_count);
      st.curve.push_back(TrainPoint{step, last_window_mean, val_loss()});
      window_sum = 0.0;
      window_count = 0;
    }
  }

  st.final_train_loss = last_window_mean;
  st.final_val_loss = st.curve.empty() ? st.initial_val_loss
                                       : st.curve.back().val_loss;
  return d;
}

Matrix predict_eps(const Denoiser& d, const Matrix& x_t, int t, int cond) {
  d.schedule.check_step(t);
  const std::vector<int> ts(size_t(x_t.cols()), t);
  const std::vector<int> conds(size_t(x_t.cols()), cond);
  return forward(d.net, denoiser_inputs(d, x_t, ts, conds));
}

Matrix predict_eps(const Denoiser& d, const Matrix& x_t,
                   const std::vector<int>& ts,
                   const std::vector<int>& conds) {
  for (int t : ts) d.schedule.check_step(t);
  return forward(d.net, denoiser_inputs(d, x_t, ts, conds));
}

NoisyClassifier train_classifier(const LabeledSet& data,
                                 const NoiseSchedule& sched,
                                 const ClassifierConfig& cfg,
                                 std::uint64_t seed, TrainStats* stats) {
  const Index n = data.points.cols();
  if (n == 0) throw DataError("empty training set");
  if (cfg.steps < 1 || cfg.batch < 1 || !(cfg.lr > 0.0))
    throw ConfigError("invalid training configuration");

  const int n_classes =
      1 + *std::max_element(data.labels.begin(), data.labels.end());
  if (n_classes < 2) throw DataError("classifier needs at least two classes");
  const int T = sched.steps();
  const int D = int(data.points.rows());

  NoisyClassifier c;
  c.schedule = sched;
  c.n_classes = n_classes;
  c.n_time_freqs = cfg.n_time_freqs;
  c.data_dim = D;

  Rng init_rng(derive_seed(seed, 10));
  std::vector<int> dims{int(c.input_dim())};
  for (int i = 0; i < cfg.hidden_layers; ++i) dims.push_back(cfg.hidden);
  dims.push_back(n_classes);
  c.net = make_mlp(dims, Activation::Silu, init_rng);

  Rng split_rng(derive_seed(seed, 11));
  const SplitIndices split = split_train_val(n, cfg.val_fraction, split_rng);

  Rng probe_rng(derive_seed(seed, 12));
  const Index n_val = Index(split.val.size());
  Matrix val_xt(D, n_val);
  std::vector<int> val_ts(static_cast<size_t>(n_val));
  std::vector<int> val_y(static_cast<size_t>(n_val));
  for (Index j = 0; j < n_val; ++j) {
    const Index src = split.val[size_t(j)];
    val_ts[size_t(j)] = int(probe_rng.uniform_int(T)) + 1;
    val_y[size_t(j)] = data.labels[size_t(src)];
    val_xt.col(j) = noisify(sched, val_ts[size_t(j)], data.points.col(src),
                            probe_rng.normal_vector(D).eval());
  }

  auto cross_entropy = [&](const Matrix& logits, const std::vector<int>& ys) {
    double total = 0.0;
    for (Index j = 0; j < logits.cols(); ++j) {
      const Vector col = logits.col(j);
      const double m = col.maxCoeff();
      const double lse = m + std::log((col.array() - m).exp().sum());
      total += lse - col[ys[size_t(j)]];
    }
    return total / double(logits.cols());
  };

  auto val_loss = [&]() {
    Matrix X(c.input_dim(), n_val);
    X.topRows(D) = val_xt;
    for (Index j = 0; j < n_val; ++j)
      X.col(j).bottomRows(2 * c.n_time_freqs) =
          time_features(val_ts[size_t(j)], T, c.n_time_freqs);
    return cross_entropy(forward(c.net, X), val_y);
  };

  std::vector<TensorRef> params = parameter_refs(c.net, "classifier");
  Adam opt(AdamConfig{cfg.lr}, params);

  TrainStats local;
  TrainStats& st = stats ? *stats : local;
  st.initial_val_loss = val_loss();
  st.curve.clear();

  Rng batch_rng(derive_seed(seed, 13));
  const Index n_train = Index(split.train.size());
  const int B = cfg.batch;

  Matrix X(c.input_dim(), B);
  std::vector<int> ys(static_cast<size_t>(B));
  double window_sum = 0.0;
  long window_count = 0;
  double last_window_mean = 0.0;

  for (long step = 1; step <= cfg.steps; ++step) {
    for (int j = 0; j < B; ++j) {
      const Index src = split.train[size_t(batch_rng.uniform_int(n_train))];
      const int t = int(batch_rng.uniform_int(T)) + 1;
      ys[size_t(j)] = data.labels[size_t(src)];
      const Vector eps = batch_rng.normal_vector(D);
      X.col(j).head(D) = noisify(sched, t, data.points.col(src), eps);
      X.col(j).tail(2 * c.n_time_freqs) =
          time_features(t, T, c.n_time_freqs);
    }

    const ForwardTrace trace = forward_trace(c.net, X);
    const double loss = cross_entropy(trace.out, ys);
    if (!std::isfinite(loss))
      throw DataError("non-finite training loss at step " +
                      std::to_string(step));

    Matrix upstream = softmax_columns(trace.out);
    for (int j = 0; j < B; ++j) upstream(ys[size_t(j)], j) -= 1.0;
    upstream /= double(B);
    MlpGrads g = backward(c.net, trace, upstream);

    std::vector<TensorRef> grads = parameter_refs(g, "classifier");
    opt.step(params, grads);

    window_sum += loss;
    ++window_count;
    if (step % cfg.log_every == 0 || step == cfg.steps) {
      last_window_mean = window_sum / double(window_count);
      st.curve.push_back(TrainPoint{step, last_window_mean, val_loss()});
      window_sum = 0.0;
      window_count = 0;
    }
  }

  st.final_train_loss = last_window_mean;
  st.final_val_loss = st.curve.empty() ? st.initial_val_loss
                                       : st.curve.back().val_loss;
  return c;
}

Matrix class_logits(const NoisyClassifier& c, const Matrix& x_t, int t) {
  return forward(c.net, classifier_inputs(c, x_t, t));
}

Matrix class_probs(const NoisyClassifier& c, const Matrix& x_t, int t) {
  return softmax_columns(class_logits(c, x_t, t));
}

Matrix grad_log_prob(const NoisyClassifier& c, const Matrix& x_t, int t,
                     int y) {
  if (y < 0 || y >= c.n_classes)
    throw std::invalid_argument("invalid class id " + std::to_string(y));
  const Matrix X = classifier_inputs(c, x_t, t);
  const ForwardTrace trace = forward_trace(c.net, X);
  Matrix upstream = -softmax_columns(trace.out);
  upstream.row(y).array() += 1.0;  // d log p_y / d logits = e_y - softmax
  const MlpGrads g = backward(c.net, trace, upstream);
  return g.input.topRows(c.data_dim);
}

Matrix grad_prob(const NoisyClassifier& c, const Matrix& x_t, int t, int y) {
  if (y < 0 || y >= c.n_classes)
    throw std::invalid_argument("invalid class id " + std::to_string(y));
  const Matrix glog = grad_log_prob(c, x_t, t, y);
  const Matrix p = class_probs(c, x_t, t);
  return glog.array().rowwise() * p.row(y).array();
}

}  // namespace betacfg
