#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <betacfg/models.hpp>
#include <betacfg/types.hpp>

namespace betacfg {

// Versioned plain-text snapshot of a training run: schedule parameters,
// denoiser (and optional classifier) weights at 17 significant digits, and
// training metadata. save -> load -> save is byte-identical.
struct Checkpoint {
  int schedule_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  Denoiser denoiser;
  std::optional<NoisyClassifier> classifier;

  double p_uncond = 0.1;
  std::uint64_t seed = 0;
  long train_steps = 0;
  double final_loss = 0.0;
  double val_loss = 0.0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace betacfg
