#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "fdloss/frechet.hpp"
#include "fdloss/generator.hpp"
#include "fdloss/matrix.hpp"

namespace fdloss {

// Binary file formats. All integers are u32 little-endian, all floats IEEE-754 little-endian.
//
//   FeatureFile     "FDF1" n d, then n*d f32 row-major
//   StatsFile       "FDS1" d, f64 weight, d f64 mean, d*d f64 covariance row-major
//   CheckpointFile  "FDC1" L, L x (in, out), then per layer f64 weight row-major, f64 bias
//
// Decoding errors carry distinct kinds: kBadMagic, kTruncated (payload length differs from
// the header), kNonFinite, kAsymmetric (stats covariance), kDimensionMismatch (checkpoint
// layers that do not chain).

std::string encode_features(const Matrix& features);
Matrix decode_features(std::string_view bytes);

std::string encode_stats(const GaussianStats& stats);
GaussianStats decode_stats(std::string_view bytes);

std::string encode_checkpoint(const GeneratorModel& model);
GeneratorModel decode_checkpoint(std::string_view bytes);

void write_features(const std::filesystem::path& path, const Matrix& features);
Matrix read_features(const std::filesystem::path& path);

void write_stats(const std::filesystem::path& path, const GaussianStats& stats);
GaussianStats read_stats(const std::filesystem::path& path);

void write_checkpoint(const std::filesystem::path& path, const GeneratorModel& model);
GeneratorModel read_checkpoint(const std::filesystem::path& path);

// Returns the first four bytes of the file, or an empty string if it is shorter. Throws
// kFileNotFound when the file cannot be opened.
std::string read_magic(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file, then renames it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

}  // namespace fdloss
