#include <betacfg/checkpoint.hpp>

#include <fstream>
#include <sstream>

#include <betacfg/io.hpp>

namespace betacfg {

namespace {

constexpr const char* kMagic = "betacfg checkpoint v1";

void write_tensor(std::ofstream& f, const std::string& name, const Matrix& m) {
  f << "tensor " << name << " " << m.rows() << " " << m.cols() << "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) f << " ";
      f << format_g17(m(i, j));
    }
    f << "\n";
  }
}

void write_mlp(std::ofstream& f, const std::string& prefix, const Mlp& net) {
  for (size_t i = 0; i < net.layers.size(); ++i) {
    write_tensor(f, prefix + ".L" + std::to_string(i) + ".W",
                 net.layers[i].W);
    write_tensor(f, prefix + ".L" + std::to_string(i) + ".b",
                 net.layers[i].b);
  }
}

void write_dims(std::ofstream& f, const std::vector<int>& dims) {
  f << "dims =";
  for (int d : dims) f << " " << d;
  f << "\n";
}

struct Parser {
  std::ifstream f;
  std::string line;
  bool pending = false;

  explicit Parser(const std::string& path) : f(path) {
    if (!f) throw DataError("cannot open checkpoint '" + path + "'");
  }

  bool next() {
    if (pending) {
      pending = false;
      return true;
    }
    while (std::getline(f, line))
      if (!line.empty()) return true;
    return false;
  }

  void push_back() { pending = true; }

  [[noreturn]] void fail(const std::string& what) {
    throw DataError("checkpoint parse error: " + what + " near '" + line +
                    "'");
  }
};

std::pair<std::string, std::string> parse_kv(Parser& p) {
  const size_t eq = p.line.find('=');
  if (eq == std::string::npos) p.fail("expected key = value");
  std::string key = p.line.substr(0, eq);
  std::string val = p.line.substr(eq + 1);
  auto trim = [](std::string& s) {
    const size_t b = s.find_first_not_of(' ');
    const size_t e = s.find_last_not_of(' ');
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
  };
  trim(key);
  trim(val);
  return {key, val};
}

Matrix read_tensor(Parser& p, const std::string& expect_name) {
  std::istringstream hdr(p.line);
  std::string tag, name;
  Index rows, cols;
  hdr >> tag >> name >> rows >> cols;
  if (tag != "tensor" || !hdr) p.fail("expected tensor header");
  if (name != expect_name)
    p.fail("expected tensor '" + expect_name + "', found '" + name + "'");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (!p.next()) p.fail("truncated tensor " + name);
    std::istringstream row(p.line);
    std::string cell;
    for (Index j = 0; j < cols; ++j) {
      if (!(row >> cell)) p.fail("short row in tensor " + name);
      m(i, j) = parse_double(cell);
    }
    if (row >> cell) p.fail("extra columns in tensor " + name);
  }
  return m;
}

Mlp read_mlp(Parser& p, const std::string& prefix,
             const std::vector<int>& dims, Activation act) {
  Mlp net;
  net.activation = act;
  net.layers.resize(dims.size() - 1);
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::string base = prefix + ".L" + std::to_string(i);
    if (!p.next()) p.fail("missing tensor " + base + ".W");
    Matrix W = read_tensor(p, base + ".W");
    if (!p.next()) p.fail("missing tensor " + base + ".b");
    Matrix b = read_tensor(p, base + ".b");
    if (W.rows() != dims[i + 1] || W.cols() != dims[i] ||
        b.rows() != dims[i + 1] || b.cols() != 1)
      p.fail("tensor shape does not match declared dims for " + base);
    net.layers[i].W = std::move(W);
    net.layers[i].b = b.col(0);
  }
  return net;
}

std::vector<int> parse_dims(const std::string& val) {
  std::istringstream is(val);
  std::vector<int> dims;
  int d;
  while (is >> d) dims.push_back(d);
  if (dims.size() < 2) throw DataError("checkpoint dims line too short");
  return dims;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open '" + path + "' for writing");

  f << kMagic << "\n";
  f << "[schedule]\n";
  f << "T = " << c.schedule_steps << "\n";
  f << "beta_start = " << format_g17(c.beta_start) << "\n";
  f << "beta_end = " << format_g17(c.beta_end) << "\n";

  f << "[denoiser]\n";
  f << "n_classes = " << c.denoiser.n_classes << "\n";
  f << "embed_dim = " << c.denoiser.embed_dim << "\n";
  f << "n_time_freqs = " << c.denoiser.n_time_freqs << "\n";
  f << "data_dim = " << c.denoiser.data_dim << "\n";
  f << "activation = " << activation_name(c.denoiser.net.activation) << "\n";
  write_dims(f, c.denoiser.net.dims());
  f << "p_uncond = " << format_g17(c.p_uncond) << "\n";

  if (c.classifier) {
    f << "[classifier]\n";
    f << "n_classes = " << c.classifier->n_classes << "\n";
    f << "n_time_freqs = " << c.classifier->n_time_freqs << "\n";
    f << "data_dim = " << c.classifier->data_dim << "\n";
    f << "activation = " << activation_name(c.classifier->net.activation)
      << "\n";
    write_dims(f, c.classifier->net.dims());
  }

  f << "[meta]\n";
  f << "seed = " << c.seed << "\n";
  f << "train_steps = " << c.train_steps << "\n";
  f << "final_loss = " << format_g17(c.final_loss) << "\n";
  f << "val_loss = " << format_g17(c.val_loss) << "\n";

  f << "[tensors]\n";
  write_mlp(f, "denoiser", c.denoiser.net);
  write_tensor(f, "denoiser.embedding", c.denoiser.cond_embedding);
  if (c.classifier) write_mlp(f, "classifier", c.classifier->net);

  if (!f) throw DataError("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  Parser p(path);
  if (!p.next() || p.line != kMagic)
    throw DataError("'" + path + "' is not a checkpoint file");

  Checkpoint c;
  std::vector<int> denoiser_dims, classifier_dims;
  Activation denoiser_act = Activation::Silu;
  Activation classifier_act = Activation::Silu;
  bool has_classifier = false;
  int classifier_classes = 0, classifier_freqs = 8, classifier_dim = 2;

  std::string section;
  while (p.next()) {
    if (p.line[0] == '[') {
      section = p.line;
      if (section == "[classifier]") has_classifier = true;
      if (section == "[tensors]") break;
      continue;
    }
    const auto [key, val] = parse_kv(p);
    if (section == "[schedule]") {
      if (key == "T") c.schedule_steps = std::stoi(val);
      else if (key == "beta_start") c.beta_start = parse_double(val);
      else if (key == "beta_end") c.beta_end = parse_double(val);
      else p.fail("unknown schedule key '" + key + "'");
    } else if (section == "[denoiser]") {
      if (key == "n_classes") c.denoiser.n_classes = std::stoi(val);
      else if (key == "embed_dim") c.denoiser.embed_dim = std::stoi(val);
      else if (key == "n_time_freqs") c.denoiser.n_time_freqs = std::stoi(val);
      else if (key == "data_dim") c.denoiser.data_dim = std::stoi(val);
      else if (key == "activation") denoiser_act = activation_from_name(val);
      else if (key == "dims") denoiser_dims = parse_dims(val);
      else if (key == "p_uncond") c.p_uncond = parse_double(val);
      else p.fail("unknown denoiser key '" + key + "'");
    } else if (section == "[classifier]") {
      if (key == "n_classes") classifier_classes = std::stoi(val);
      else if (key == "n_time_freqs") classifier_freqs = std::stoi(val);
      else if (key == "data_dim") classifier_dim = std::stoi(val);
      else if (key == "activation") classifier_act = activation_from_name(val);
      else if (key == "dims") classifier_dims = parse_dims(val);
      else p.fail("unknown classifier key '" + key + "'");
    } else if (section == "[meta]") {
      if (key == "seed") c.seed = std::stoull(val);
      else if (key == "train_steps") c.train_steps = std::stol(val);
      else if (key == "final_loss") c.final_loss = parse_double(val);
      else if (key == "val_loss") c.val_loss = parse_double(val);
      else p.fail("unknown meta key '" + key + "'");
    } else {
      p.fail("key outside any section");
    }
  }

  if (denoiser_dims.empty()) throw DataError("checkpoint missing denoiser dims");

  const NoiseSchedule sched =
      linear_schedule(c.schedule_steps, c.beta_start, c.beta_end);
  c.denoiser.schedule = sched;
  c.denoiser.net = read_mlp(p, "denoiser", denoiser_dims, denoiser_act);
  if (!p.next()) throw DataError("checkpoint missing embedding tensor");
  c.denoiser.cond_embedding = read_tensor(p, "denoiser.embedding");
  if (c.denoiser.cond_embedding.rows() != c.denoiser.n_classes + 1 ||
      c.denoiser.cond_embedding.cols() != c.denoiser.embed_dim)
    throw DataError("embedding shape does not match declared n_classes");
  if (Index(c.denoiser.input_dim()) != denoiser_dims.front())
    throw DataError("denoiser input dim does not match declared fields");

  if (has_classifier) {
    NoisyClassifier cls;
    cls.schedule = sched;
    cls.n_classes = classifier_classes;
    cls.n_time_freqs = classifier_freqs;
    cls.data_dim = classifier_dim;
    cls.net = read_mlp(p, "classifier", classifier_dims, classifier_act);
    if (Index(cls.input_dim()) != classifier_dims.front())
      throw DataError("classifier input dim does not match declared fields");
    c.classifier = std::move(cls);
  }
  return c;
}

}  // namespace betacfg
