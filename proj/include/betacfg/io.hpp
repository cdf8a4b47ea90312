#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <betacfg/metrics.hpp>
#include <betacfg/sampler.hpp>
#include <betacfg/toydata.hpp>
#include <betacfg/types.hpp>

namespace betacfg {

// 17-significant-digit decimal form; round-trips doubles bit-faithfully.
std::string format_g17(double v);
double parse_double(const std::string& s);

using HeaderParams = std::vector<std::pair<std::string, std::string>>;

// Dataset CSV: '#'-prefixed header block carrying the geometry and the
// standardization, then x1,x2,class rows. Self-contained: reading restores
// the full LabeledSet including the branch curves.
void write_dataset_csv(const std::string& path, const LabeledSet& set);
LabeledSet read_dataset_csv(const std::string& path);

// Samples CSV: run parameters echoed as '# key = value' lines, then x1,x2.
void write_samples_csv(const std::string& path, const Matrix& samples,
                       const HeaderParams& params);
Matrix read_samples_csv(const std::string& path);

// '# key = value' lines from the top of any CSV written here.
HeaderParams read_header_params(const std::string& path);

// Trajectory CSV: sample_id,t,mod_norm,eps_diff_norm.
void write_trajectory_csv(const std::string& path, const TrajectoryLog& traj,
                          const HeaderParams& params);

struct TrajectoryRows {
  std::vector<long> sample_id;
  std::vector<int> t;
  std::vector<double> mod_norm;
  std::vector<double> eps_diff_norm;
};
TrajectoryRows read_trajectory_csv(const std::string& path);

// One key/value document per run, appended to a shared results log.
void append_eval_report(const std::string& path, const EvalReport& report);

void write_loss_curve_csv(const std::string& path,
                          const std::vector<TrainPoint>& curve);

std::uint64_t fnv1a_file(const std::string& path);

// Provenance record written beside command outputs: inputs with content
// hashes, outputs, seed, format version.
void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    std::uint64_t seed);

}  // namespace betacfg
