#include "fdloss/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "fdloss/error.hpp"
#include "fdloss/formats.hpp"

namespace fdloss {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(',', start);
    out.push_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

const std::set<std::string, std::less<>> kSections = {"trainer", "generator", "estimator", "ensemble",
                                                      "target",  "source",    "pretrain"};

// Reads typed values out of a ConfigFile and remembers which keys were consumed.
class Reader {
 public:
  explicit Reader(const ConfigFile& file) : file_(file) {}

  bool has(const std::string& key) const { return file_.entries.count(key) != 0; }

  const std::string& raw(const std::string& key) {
    used_.insert(key);
    return file_.entries.at(key);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const auto it = file_.lines.find(key);
    std::string where = it == file_.lines.end() ? "" : "line " + std::to_string(it->second) + ": ";
    throw Error(ErrorKind::kConfig, where + key + ": " + what);
  }

  double number_at(const std::string& key, std::string_view text) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
      fail(key, "expected a finite number, got '" + std::string(text) + "'");
    }
    return v;
  }

  std::uint64_t unsigned_at(const std::string& key, std::string_view text) const {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      fail(key, "expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return v;
  }

  void read(const std::string& key, double& out) {
    if (has(key)) out = number_at(key, raw(key));
  }
  void read(const std::string& key, std::size_t& out) {
    if (has(key)) out = static_cast<std::size_t>(unsigned_at(key, raw(key)));
  }
  void read_seed(const std::string& key, std::uint64_t& out) {
    if (has(key)) out = unsigned_at(key, raw(key));
  }
  void read(const std::string& key, std::string& out) {
    if (has(key)) out = raw(key);
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    for (auto part : split_list(raw(key))) out.push_back(number_at(key, part));
    return out;
  }

  std::vector<std::size_t> sizes(const std::string& key) {
    std::vector<std::size_t> out;
    const std::string_view text = trim(raw(key));
    if (text.empty()) return out;
    for (auto part : split_list(text)) out.push_back(static_cast<std::size_t>(unsigned_at(key, part)));
    return out;
  }

  // Number of contiguous indices N for which some "<prefix>.N." key exists.
  std::size_t indexed_count(const std::string& prefix) const {
    std::set<std::size_t> found;
    for (const auto& [key, value] : file_.entries) {
      if (key.compare(0, prefix.size() + 1, prefix + ".") != 0) continue;
      const std::string_view rest = std::string_view(key).substr(prefix.size() + 1);
      const auto dot = rest.find('.');
      if (dot == std::string_view::npos) continue;
      std::size_t idx = 0;
      const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + dot, idx);
      if (ec != std::errc() || ptr != rest.data() + dot) fail(key, "index is not an integer");
      found.insert(idx);
    }
    for (std::size_t i = 0; i < found.size(); ++i) {
      if (!found.count(i)) {
        throw Error(ErrorKind::kConfig, prefix + " entries must be numbered 0.." +
                                            std::to_string(found.size() - 1) + " without gaps");
      }
    }
    return found.size();
  }

  void reject_unused() const {
    for (const auto& [key, value] : file_.entries) {
      if (!used_.count(key)) fail(key, "unknown key");
    }
  }

 private:
  const ConfigFile& file_;
  std::set<std::string> used_;
};

TargetSpec read_target(Reader& r, const std::string& section) {
  TargetSpec spec;
  r.read_seed(section + ".seed", spec.seed);
  r.read(section + ".reference_count", spec.reference_count);
  r.read(section + ".path", spec.path);
  const std::string prefix = section + ".component";
  const std::size_t n = r.indexed_count(prefix);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string base = prefix + "." + std::to_string(i) + ".";
    GaussianComponent c;
    if (!r.has(base + "mean")) r.fail(base + "mean", "missing");
    c.mean = r.numbers(base + "mean");
    const std::size_t d = c.mean.size();
    if (r.has(base + "cov")) {
      const std::vector<double> cov = r.numbers(base + "cov");
      if (cov.size() == d) {
        c.cov = Matrix::diagonal(cov);
      } else if (cov.size() == d * d) {
        c.cov = Matrix(d, d, cov);
      } else {
        r.fail(base + "cov", "expected " + std::to_string(d) + " diagonal or " +
                                 std::to_string(d * d) + " row-major entries");
      }
    } else {
      c.cov = Matrix::identity(d);
    }
    r.read(base + "weight", c.weight);
    spec.components.push_back(std::move(c));
  }
  return spec;
}

}  // namespace

ConfigFile parse_config(std::string_view text) {
  ConfigFile out;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::kConfig, where + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!kSections.count(section)) {
        throw Error(ErrorKind::kConfig, where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::kConfig, where + "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::kConfig, where + "empty key");
    if (section.empty()) {
      throw Error(ErrorKind::kConfig, where + "key '" + std::string(key) + "' outside a section");
    }
    std::string full = section + "." + std::string(key);
    if (out.entries.count(full)) {
      throw Error(ErrorKind::kConfig, where + "duplicate key " + full + " (first on line " +
                                          std::to_string(out.lines[full]) + ")");
    }
    out.entries.emplace(full, std::string(trim(line.substr(eq + 1))));
    out.lines.emplace(std::move(full), line_no);
  }
  return out;
}

TrainConfig train_config_from(const ConfigFile& file) {
  Reader r(file);
  TrainConfig c;

  r.read("trainer.batch_size", c.batch_size);
  r.read("trainer.total_steps", c.total_steps);
  r.read("trainer.warmup_steps", c.warmup_steps);
  r.read("trainer.peak_lr", c.peak_lr);
  r.read("trainer.beta1", c.optimizer.beta1);
  r.read("trainer.beta2", c.optimizer.beta2);
  r.read("trainer.eps", c.optimizer.eps);
  r.read("trainer.weight_decay", c.optimizer.weight_decay);
  r.read_seed("trainer.seed", c.seed);
  r.read("trainer.warm_start_count", c.warm_start_count);
  r.read("trainer.eval_count", c.eval_count);

  r.read("generator.z_dim", c.z_dim);
  if (r.has("generator.hidden")) c.hidden = r.sizes("generator.hidden");
  r.read("generator.out_dim", c.out_dim);

  if (r.has("estimator.kind")) {
    const std::string kind = r.raw("estimator.kind");
    if (kind == "ema") {
      c.estimator.kind = EstimatorKind::kEma;
    } else if (kind == "queue") {
      c.estimator.kind = EstimatorKind::kQueue;
    } else {
      r.fail("estimator.kind", "expected ema or queue, got '" + kind + "'");
    }
  }
  r.read("estimator.beta", c.estimator.beta);
  r.read("estimator.capacity", c.estimator.capacity);

  r.read("ensemble.c", c.ensemble.c);
  const std::size_t k = r.indexed_count("ensemble.rep");
  bool any_weight = false;
  std::vector<double> weights;
  for (std::size_t i = 0; i < k; ++i) {
    const std::string base = "ensemble.rep." + std::to_string(i) + ".";
    RepresentationSpec spec;
    if (!r.has(base + "kind")) r.fail(base + "kind", "missing");
    try {
      spec.kind = representation_kind_from_string(r.raw(base + "kind"));
    } catch (const Error& e) {
      r.fail(base + "kind", e.what());
    }
    r.read_seed(base + "seed", spec.seed);
    spec.in_dim = c.out_dim;
    r.read(base + "in_dim", spec.in_dim);
    switch (spec.kind) {
      case RepresentationKind::kIdentity: spec.out_dim = spec.in_dim; break;
      case RepresentationKind::kQuadratic: spec.out_dim = quadratic_out_dim(spec.in_dim); break;
      default: spec.out_dim = 0; break;
    }
    r.read(base + "out_dim", spec.out_dim);
    r.read(base + "scale", spec.scale);
    double w = 1.0;
    if (r.has(base + "weight")) {
      any_weight = true;
      r.read(base + "weight", w);
    }
    weights.push_back(w);
    c.ensemble.specs.push_back(spec);
  }
  if (any_weight) c.ensemble.weights = std::move(weights);

  c.target = read_target(r, "target");
  c.source = read_target(r, "source");

  r.read("pretrain.steps", c.pretrain_steps);
  r.read("pretrain.lr", c.pretrain_lr);
  r.read("pretrain.batch_size", c.pretrain_batch_size);

  r.reject_unused();
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfig, std::string("invalid configuration: ") + e.what());
  }
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  TrainConfig c = train_config_from(parse_config(read_file(path)));
  // Relative sample-file paths resolve against the config's directory.
  for (TargetSpec* spec : {&c.target, &c.source}) {
    if (!spec->path.empty() && std::filesystem::path(spec->path).is_relative()) {
      spec->path = (path.parent_path() / spec->path).string();
    }
  }
  return c;
}

}  // namespace fdloss
