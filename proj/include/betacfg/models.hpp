#pragma once

#include <cstdint>
#include <vector>

#include <betacfg/mlp.hpp>
#include <betacfg/schedule.hpp>
#include <betacfg/toydata.hpp>
#include <betacfg/types.hpp>

namespace betacfg {

// x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) eps; the one-step forward
// corruption. The noise draw is injected so callers control randomness.
template <typename DX, typename DE>
Matrix noisify_with(double alpha_bar, const Eigen::MatrixBase<DX>& x0,
                    const Eigen::MatrixBase<DE>& eps) {
  if (x0.rows() != eps.rows() || x0.cols() != eps.cols())
    throw std::invalid_argument("x0 and eps dimensions differ");
  return std::sqrt(alpha_bar) * x0 + std::sqrt(1.0 - alpha_bar) * eps;
}

template <typename DX, typename DE>
Matrix noisify(const NoiseSchedule& s, int t, const Eigen::MatrixBase<DX>& x0,
               const Eigen::MatrixBase<DE>& eps) {
  s.check_step(t);
  return noisify_with(s.alpha_bar_at(t), x0, eps);
}

// sin/cos features of the rescaled time u = t/T, k = 1..n_freqs.
Vector time_features(int t, int T, int n_freqs);

// Conditional noise-prediction network. Class conditioning enters through a
// learned embedding table with one extra row reserved for the null
// (unconditional) token; inputs are [x_t, time features, embedding].
struct Denoiser {
  Mlp net;
  Matrix cond_embedding;  // (n_classes + 1) x embed_dim
  NoiseSchedule schedule;
  int n_classes = 2;
  int embed_dim = 4;
  int n_time_freqs = 8;
  int data_dim = 2;

  int null_token() const { return n_classes; }
  Index input_dim() const {
    return data_dim + 2 * n_time_freqs + embed_dim;
  }
};

struct DenoiserConfig {
  int hidden = 128;
  int hidden_layers = 3;
  int embed_dim = 4;
  int n_time_freqs = 8;
  long steps = 10000;
  int batch = 128;
  double lr = 1e-3;
  double p_uncond = 0.1;       // probability of training on the null token
  double val_fraction = 0.1;
  long log_every = 200;
};

struct TrainPoint {
  long step = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainStats {
  double initial_val_loss = 0.0;
  double final_train_loss = 0.0;
  double final_val_loss = 0.0;
  std::vector<TrainPoint> curve;
};

Denoiser train_denoiser(const LabeledSet& data, const NoiseSchedule& sched,
                        const DenoiserConfig& cfg, std::uint64_t seed,
                        TrainStats* stats = nullptr);

// eps prediction for a whole batch at one step index and one condition;
// cond is a class id or Denoiser::null_token().
Matrix predict_eps(const Denoiser& d, const Matrix& x_t, int t, int cond);

// per-sample steps/conditions (training path)
Matrix predict_eps(const Denoiser& d, const Matrix& x_t,
                   const std::vector<int>& ts, const std::vector<int>& conds);

// Classifier over noisy inputs; predicts the class of x_t from
// [x_t, time features].
struct NoisyClassifier {
  Mlp net;
  NoiseSchedule schedule;
  int n_classes = 2;
  int n_time_freqs = 8;
  int data_dim = 2;

  Index input_dim() const { return data_dim + 2 * n_time_freqs; }
};

struct ClassifierConfig {
  int hidden = 64;
  int hidden_layers = 2;
  int n_time_freqs = 8;
  long steps = 4000;
  int batch = 128;
  double lr = 1e-3;
  double val_fraction = 0.1;
  long log_every = 200;
};

NoisyClassifier train_classifier(const LabeledSet& data,
                                 const NoiseSchedule& sched,
                                 const ClassifierConfig& cfg,
                                 std::uint64_t seed,
                                 TrainStats* stats = nullptr);

Matrix class_logits(const NoisyClassifier& c, const Matrix& x_t, int t);
// softmax over classes, one column per sample
Matrix class_probs(const NoisyClassifier& c, const Matrix& x_t, int t);

// d/dx_t of log p(y | x_t); columns align with the input batch.
Matrix grad_log_prob(const NoisyClassifier& c, const Matrix& x_t, int t,
                     int y);
// d/dx_t of p(y | x_t) = p * d/dx_t log p
Matrix grad_prob(const NoisyClassifier& c, const Matrix& x_t, int t, int y);

}  // namespace betacfg
