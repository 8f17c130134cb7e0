#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "fdloss/trainer.hpp"

namespace fdloss {

// Plain-text configuration:
//
//   # comment
//   [section]
//   key = value
//
// Entries are addressed as "section.key". Representation specs and mixture components are
// indexed entries (`rep.0.kind`, `component.1.mean`). Keys outside a section, duplicate keys,
// and unknown keys are errors.
struct ConfigFile {
  std::map<std::string, std::string> entries;
  std::map<std::string, std::size_t> lines;  // source line per entry
};

ConfigFile parse_config(std::string_view text);

// Recognized sections and keys:
//   [trainer]   batch_size total_steps warmup_steps peak_lr beta1 beta2 eps weight_decay seed
//               warm_start_count eval_count
//   [generator] z_dim hidden (comma list) out_dim
//   [estimator] kind (ema|queue) beta capacity
//   [ensemble]  c, rep.N.{kind,seed,in_dim,out_dim,scale,weight}
//   [target], [source]
//               seed reference_count path component.N.{weight,mean,cov}
//   [pretrain]  steps lr batch_size
TrainConfig train_config_from(const ConfigFile& config);
TrainConfig load_train_config(const std::filesystem::path& path);

}  // namespace fdloss
