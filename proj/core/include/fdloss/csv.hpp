#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "fdloss/metrics.hpp"
#include "fdloss/trainer.hpp"

namespace fdloss {

// Report CSV, LF line endings, values at 9 significant digits:
//   rep,fd_gen,fd_val,fdr
//   <name>,<fd_gen>,<fd_val>,<ratio>     one row per representation
//   FDRK,,,<fdr_k>
std::string format_report_csv(const FdrReport& report);
// Recovers entries and fdr_k; population sizes are not stored in the CSV.
FdrReport parse_report_csv(std::string_view text);
void write_report_csv(const FdrReport& report, const std::filesystem::path& path);

// Metrics log CSV: header `phase,step,lr,loss,fd_<rep>...`, values printed with 17
// significant digits so that a log written twice from the same run is byte-identical.
std::string format_metrics_log(const MetricsLog& log);
MetricsLog parse_metrics_log(std::string_view text);
void write_metrics_log(const MetricsLog& log, const std::filesystem::path& path);
MetricsLog read_metrics_log(const std::filesystem::path& path);

// "%.<digits>g" rendering used by the CSV writers.
std::string format_number(double value, int digits);

}  // namespace fdloss
