#include "fdloss/formats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fdloss/error.hpp"

namespace fdloss {

namespace {

constexpr std::string_view kFeatureMagic = "FDF1";
constexpr std::string_view kStatsMagic = "FDS1";
constexpr std::string_view kCheckpointMagic = "FDC1";

class Writer {
 public:
  void magic(std::string_view m) { out_.append(m); }

  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out_.push_back(static_cast<char>((v >> (8 * k)) & 0xFFu));
  }

  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k) out_.push_back(static_cast<char>((bits >> (8 * k)) & 0xFFu));
  }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(std::string_view bytes, const char* format) : bytes_(bytes), format_(format) {}

  void expect_magic(std::string_view m) {
    if (bytes_.size() < m.size() || bytes_.substr(0, m.size()) != m) {
      throw Error(ErrorKind::kBadMagic,
                  std::string(format_) + ": bad magic, expected \"" + std::string(m) + "\"");
    }
    pos_ = m.size();
  }

  // Fails unless exactly `n` bytes remain.
  void expect_remaining(std::size_t n) const {
    const std::size_t remaining = bytes_.size() - pos_;
    if (remaining != n) {
      std::ostringstream msg;
      msg << format_ << ": truncated or oversized payload, expected " << pos_ + n
          << " bytes, found " << bytes_.size();
      throw Error(ErrorKind::kTruncated, msg.str());
    }
  }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      std::ostringstream msg;
      msg << format_ << ": truncated header, expected at least " << pos_ + n << " bytes, found "
          << bytes_.size();
      throw Error(ErrorKind::kTruncated, msg.str());
    }
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + k])) << (8 * k);
    pos_ += 4;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + k])) << (8 * k);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  double finite_f64(const char* what) {
    const double v = f64();
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kNonFinite, std::string(format_) + ": non-finite " + what);
    }
    return v;
  }

 private:
  std::string_view bytes_;
  const char* format_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw Error(ErrorKind::kInvalidArgument, std::string(what) + " exceeds u32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string encode_features(const Matrix& features) {
  if (features.rows() == 0 || features.cols() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "feature file needs n >= 1 and d >= 1");
  }
  Writer w;
  w.magic(kFeatureMagic);
  w.u32(checked_u32(features.rows(), "row count"));
  w.u32(checked_u32(features.cols(), "column count"));
  for (double v : features.data()) {
    const auto f = static_cast<float>(v);
    if (!std::isfinite(f)) throw Error(ErrorKind::kNonFinite, "feature value not finite at f32");
    w.f32(f);
  }
  return w.take();
}

Matrix decode_features(std::string_view bytes) {
  Reader r(bytes, "feature file");
  r.expect_magic(kFeatureMagic);
  const std::size_t n = r.u32();
  const std::size_t d = r.u32();
  r.expect_remaining(n * d * 4);
  Matrix m(n, d);
  for (std::size_t k = 0; k < n * d; ++k) {
    const float f = r.f32();
    if (!std::isfinite(f)) {
      throw Error(ErrorKind::kNonFinite,
                  "feature file: non-finite value in row " + std::to_string(k / d));
    }
    m.data()[k] = static_cast<double>(f);
  }
  return m;
}

std::string encode_stats(const GaussianStats& stats) {
  const std::size_t d = stats.dim();
  if (d == 0 || stats.sigma.rows() != d || stats.sigma.cols() != d) {
    throw Error(ErrorKind::kDimensionMismatch, "stats: inconsistent shapes");
  }
  Writer w;
  w.magic(kStatsMagic);
  w.u32(checked_u32(d, "dimension"));
  w.f64(stats.weight);
  for (double v : stats.mu) w.f64(v);
  for (double v : stats.sigma.data()) w.f64(v);
  return w.take();
}

GaussianStats decode_stats(std::string_view bytes) {
  Reader r(bytes, "stats file");
  r.expect_magic(kStatsMagic);
  const std::size_t d = r.u32();
  if (d == 0) throw Error(ErrorKind::kInvalidArgument, "stats file: zero dimension");
  r.expect_remaining(8 * (1 + d + d * d));
  GaussianStats s{Vector(d), Matrix(d, d), 0.0};
  s.weight = r.finite_f64("weight");
  for (double& v : s.mu) v = r.finite_f64("mean entry");
  for (double& v : s.sigma.data()) v = r.finite_f64("covariance entry");
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (std::abs(s.sigma(i, j) - s.sigma(j, i)) > 1e-10 * std::max(1.0, std::abs(s.sigma(i, j)))) {
        std::ostringstream msg;
        msg << "stats file: covariance not symmetric at (" << i << ", " << j << ")";
        throw Error(ErrorKind::kAsymmetric, msg.str());
      }
    }
  }
  return s;
}

std::string encode_checkpoint(const GeneratorModel& model) {
  Writer w;
  w.magic(kCheckpointMagic);
  w.u32(checked_u32(model.layers().size(), "layer count"));
  for (const auto& l : model.layers()) {
    w.u32(checked_u32(l.weight.cols(), "layer input"));
    w.u32(checked_u32(l.weight.rows(), "layer output"));
  }
  for (const auto& l : model.layers()) {
    for (double v : l.weight.data()) w.f64(v);
    for (double v : l.bias) w.f64(v);
  }
  return w.take();
}

GeneratorModel decode_checkpoint(std::string_view bytes) {
  Reader r(bytes, "checkpoint");
  r.expect_magic(kCheckpointMagic);
  const std::size_t layers = r.u32();
  if (layers == 0) throw Error(ErrorKind::kInvalidArgument, "checkpoint: no layers");
  r.need(8 * layers);
  std::vector<std::pair<std::size_t, std::size_t>> dims(layers);
  std::size_t params = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    dims[l].first = r.u32();
    dims[l].second = r.u32();
    if (l > 0 && dims[l].first != dims[l - 1].second) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "checkpoint: layer " + std::to_string(l) + " does not chain");
    }
    params += dims[l].first * dims[l].second + dims[l].second;
  }
  r.expect_remaining(8 * params);
  std::vector<DenseLayer> out;
  for (const auto& [in, o] : dims) {
    DenseLayer l{Matrix(o, in), Vector(o)};
    for (double& v : l.weight.data()) v = r.finite_f64("weight");
    for (double& v : l.bias) v = r.finite_f64("bias");
    out.push_back(std::move(l));
  }
  return GeneratorModel(std::move(out));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::kIo, "read failed for " + path.string());
  return ss.str();
}

std::string read_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFileNotFound, "cannot open " + path.string());
  std::string magic(4, '\0');
  in.read(magic.data(), 4);
  if (in.gcount() != 4) return {};
  return magic;
}

void atomic_write(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot rename onto " + path.string());
  }
}

void write_features(const std::filesystem::path& path, const Matrix& features) {
  atomic_write(path, encode_features(features));
}

Matrix read_features(const std::filesystem::path& path) { return decode_features(read_file(path)); }

void write_stats(const std::filesystem::path& path, const GaussianStats& stats) {
  atomic_write(path, encode_stats(stats));
}

GaussianStats read_stats(const std::filesystem::path& path) { return decode_stats(read_file(path)); }

void write_checkpoint(const std::filesystem::path& path, const GeneratorModel& model) {
  atomic_write(path, encode_checkpoint(model));
}

GeneratorModel read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace fdloss
