#include <betacfg/io.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace betacfg {

namespace {

constexpr const char* kDatasetMagic = "# betacfg dataset v1";

std::ofstream open_out(const std::string& path, bool append = false) {
  std::ofstream f(path, append ? std::ios::app : std::ios::trunc);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open '" + path + "' for reading");
  return f;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw DataError("malformed number '" + s + "'");
  return v;
}

void write_dataset_csv(const std::string& path, const LabeledSet& set) {
  std::ofstream f = open_out(path);
  f << kDatasetMagic << "\n";
  f << "# n_per_class = " << set.raw_spec.n_per_class << "\n";
  f << "# seed = " << set.raw_spec.seed << "\n";
  f << "# sigma_across = " << format_g17(set.raw_spec.sigma_across) << "\n";
  f << "# standardize_mean = " << format_g17(set.mean.x()) << " "
    << format_g17(set.mean.y()) << "\n";
  f << "# standardize_scale = " << format_g17(set.scale.x()) << " "
    << format_g17(set.scale.y()) << "\n";
  for (size_t cls = 0; cls < set.raw_spec.classes.size(); ++cls)
    for (const BranchCurve& b : set.raw_spec.classes[cls].branches) {
      f << "# raw_branch = " << cls;
      for (const Eigen::Vector2d& p : {b.p0, b.p1, b.p2})
        f << " " << format_g17(p.x()) << " " << format_g17(p.y());
      f << "\n";
    }
  f << "x1,x2,class\n";
  for (Index j = 0; j < set.points.cols(); ++j)
    f << format_g17(set.points(0, j)) << "," << format_g17(set.points(1, j))
      << "," << set.labels[size_t(j)] << "\n";
  if (!f) throw DataError("write failed for '" + path + "'");
}

LabeledSet read_dataset_csv(const std::string& path) {
  std::ifstream f = open_in(path);
  std::string line;
  if (!std::getline(f, line) || line != kDatasetMagic)
    throw DataError("'" + path + "' is not a dataset file");

  LabeledSet set;
  std::vector<std::pair<int, BranchCurve>> branches;
  std::vector<double> xs, ys;
  std::vector<int> labels;
  bool header_seen = false;

  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream is(line.substr(1));
      std::string key, eq;
      is >> key >> eq;
      if (eq != "=") throw DataError("malformed header line: " + line);
      if (key == "n_per_class") {
        is >> set.raw_spec.n_per_class;
      } else if (key == "seed") {
        is >> set.raw_spec.seed;
      } else if (key == "sigma_across") {
        std::string v;
        is >> v;
        set.raw_spec.sigma_across = parse_double(v);
      } else if (key == "standardize_mean") {
        std::string a, b;
        is >> a >> b;
        set.mean = {parse_double(a), parse_double(b)};
      } else if (key == "standardize_scale") {
        std::string a, b;
        is >> a >> b;
        set.scale = {parse_double(a), parse_double(b)};
      } else if (key == "raw_branch") {
        int cls;
        is >> cls;
        std::string v[6];
        for (std::string& s : v) is >> s;
        BranchCurve b{{parse_double(v[0]), parse_double(v[1])},
                      {parse_double(v[2]), parse_double(v[3])},
                      {parse_double(v[4]), parse_double(v[5])}};
        branches.emplace_back(cls, b);
      } else {
        throw DataError("unknown dataset header key '" + key + "'");
      }
      continue;
    }
    if (!header_seen) {
      if (line != "x1,x2,class")
        throw DataError("unexpected column header: " + line);
      header_seen = true;
      continue;
    }
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != 3) throw DataError("malformed dataset row: " + line);
    xs.push_back(parse_double(cells[0]));
    ys.push_back(parse_double(cells[1]));
    labels.push_back(std::stoi(cells[2]));
  }
  if (!header_seen || xs.empty()) throw DataError("dataset file has no rows");

  int n_classes = 0;
  for (const auto& [cls, b] : branches) n_classes = std::max(n_classes, cls + 1);
  if (n_classes == 0) throw DataError("dataset file carries no geometry");
  set.raw_spec.classes.assign(size_t(n_classes), {});
  for (const auto& [cls, b] : branches)
    set.raw_spec.classes[size_t(cls)].branches.push_back(b);

  set.points.resize(2, Index(xs.size()));
  for (size_t j = 0; j < xs.size(); ++j) {
    set.points(0, Index(j)) = xs[j];
    set.points(1, Index(j)) = ys[j];
  }
  set.labels = std::move(labels);

  // rebuild the standardized geometry exactly as generate() does
  set.spec = set.raw_spec;
  for (ClassShape& cs : set.spec.classes)
    for (BranchCurve& b : cs.branches) {
      b.p0 = (b.p0 - set.mean).cwiseQuotient(set.scale);
      b.p1 = (b.p1 - set.mean).cwiseQuotient(set.scale);
      b.p2 = (b.p2 - set.mean).cwiseQuotient(set.scale);
    }
  return set;
}

namespace {

void write_params(std::ofstream& f, const HeaderParams& params) {
  for (const auto& [k, v] : params) f << "# " << k << " = " << v << "\n";
}

}  // namespace

void write_samples_csv(const std::string& path, const Matrix& samples,
                       const HeaderParams& params) {
  std::ofstream f = open_out(path);
  write_params(f, params);
  f << "x1,x2\n";
  for (Index j = 0; j < samples.cols(); ++j)
    f << format_g17(samples(0, j)) << "," << format_g17(samples(1, j)) << "\n";
  if (!f) throw DataError("write failed for '" + path + "'");
}

Matrix read_samples_csv(const std::string& path) {
  std::ifstream f = open_in(path);
  std::string line;
  std::vector<double> xs, ys;
  bool header_seen = false;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "x1,x2") throw DataError("unexpected column header: " + line);
      header_seen = true;
      continue;
    }
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != 2) throw DataError("malformed samples row: " + line);
    xs.push_back(parse_double(cells[0]));
    ys.push_back(parse_double(cells[1]));
  }
  if (!header_seen) throw DataError("'" + path + "' is not a samples file");
  Matrix out(2, Index(xs.size()));
  for (size_t j = 0; j < xs.size(); ++j) {
    out(0, Index(j)) = xs[j];
    out(1, Index(j)) = ys[j];
  }
  return out;
}

HeaderParams read_header_params(const std::string& path) {
  std::ifstream f = open_in(path);
  HeaderParams params;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] != '#') break;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const size_t b = s.find_first_not_of(" \t#");
      const size_t e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    params.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return params;
}

void write_trajectory_csv(const std::string& path, const TrajectoryLog& traj,
                          const HeaderParams& params) {
  std::ofstream f = open_out(path);
  write_params(f, params);
  f << "sample_id,t,mod_norm,eps_diff_norm\n";
  for (int k = 0; k < traj.step_count(); ++k)
    for (int j = 0; j < traj.logged_count(); ++j)
      f << traj.sample_ids[size_t(j)] << "," << traj.ts[size_t(k)] << ","
        << format_g17(traj.mod_norm[size_t(k)][j]) << ","
        << format_g17(traj.eps_diff_norm[size_t(k)][j]) << "\n";
  if (!f) throw DataError("write failed for '" + path + "'");
}

TrajectoryRows read_trajectory_csv(const std::string& path) {
  std::ifstream f = open_in(path);
  std::string line;
  TrajectoryRows rows;
  bool header_seen = false;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "sample_id,t,mod_norm,eps_diff_norm")
        throw DataError("unexpected column header: " + line);
      header_seen = true;
      continue;
    }
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != 4) throw DataError("malformed trajectory row: " + line);
    rows.sample_id.push_back(std::stol(cells[0]));
    rows.t.push_back(std::stoi(cells[1]));
    rows.mod_norm.push_back(parse_double(cells[2]));
    rows.eps_diff_norm.push_back(parse_double(cells[3]));
  }
  if (!header_seen) throw DataError("'" + path + "' is not a trajectory file");
  return rows;
}

void append_eval_report(const std::string& path, const EvalReport& r) {
  std::ofstream f = open_out(path, /*append=*/true);
  f << "[eval]\n";
  f << "rule = " << r.rule << "\n";
  f << "seed = " << r.seed << "\n";
  f << "n_samples = " << r.n_samples << "\n";
  f << "outlier_rate = " << format_g17(r.outlier_rate) << "\n";
  f << "coverage = " << format_g17(r.coverage) << "\n";
  f << "mean_manifold_distance = " << format_g17(r.mean_manifold_distance)
    << "\n";
  f << "class_purity = " << format_g17(r.class_purity) << "\n";
  f << "\n";
  if (!f) throw DataError("write failed for '" + path + "'");
}

void write_loss_curve_csv(const std::string& path,
                          const std::vector<TrainPoint>& curve) {
  std::ofstream f = open_out(path);
  f << "step,train_loss,val_loss\n";
  for (const TrainPoint& p : curve)
    f << p.step << "," << format_g17(p.train_loss) << ","
      << format_g17(p.val_loss) << "\n";
  if (!f) throw DataError("write failed for '" + path + "'");
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot hash missing file '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) {
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= std::uint64_t(static_cast<unsigned char>(buf[i]));
      h *= 0x100000001b3ull;
    }
    if (!f) break;
  }
  return h;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    std::uint64_t seed) {
  std::ofstream f = open_out(path);
  f << "betacfg manifest v1\n";
  f << "command = " << command << "\n";
  f << "seed = " << seed << "\n";
  for (const std::string& in : inputs) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a_file(in)));
    f << "input = " << in << " fnv1a:" << buf << "\n";
  }
  for (const std::string& out : outputs) f << "output = " << out << "\n";
  if (!f) throw DataError("write failed for '" + path + "'");
}

}  // namespace betacfg
