#include "fdloss/csv.hpp"

#include <charconv>
#include <cstdio>
#include <vector>

#include "fdloss/error.hpp"
#include "fdloss/formats.hpp"

namespace fdloss {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

double parse_number(std::string_view field, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorKind::kInvalidArgument, "csv line " + std::to_string(line) +
                                                 ": cannot parse number '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::string format_number(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return buf;
}

std::string format_report_csv(const FdrReport& report) {
  std::string out = "rep,fd_gen,fd_val,fdr\n";
  for (const auto& e : report.entries) {
    out += e.name + "," + format_number(e.fd_gen, 9) + "," + format_number(e.fd_val, 9) + "," +
           format_number(e.ratio, 9) + "\n";
  }
  out += "FDRK,,," + format_number(report.fdr_k, 9) + "\n";
  return out;
}

FdrReport parse_report_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2 || lines.front() != "rep,fd_gen,fd_val,fdr") {
    throw Error(ErrorKind::kInvalidArgument, "report csv: missing header");
  }
  FdrReport report;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() != 4) {
      throw Error(ErrorKind::kInvalidArgument, "report csv line " + std::to_string(i + 1) +
                                                   ": expected 4 fields");
    }
    if (fields[0] == "FDRK") {
      if (i + 1 != lines.size()) {
        throw Error(ErrorKind::kInvalidArgument, "report csv: FDRK row must be last");
      }
      report.fdr_k = parse_number(fields[3], i + 1);
      return report;
    }
    report.entries.push_back({std::string(fields[0]), parse_number(fields[1], i + 1),
                              parse_number(fields[2], i + 1), parse_number(fields[3], i + 1)});
  }
  throw Error(ErrorKind::kInvalidArgument, "report csv: missing FDRK row");
}

void write_report_csv(const FdrReport& report, const std::filesystem::path& path) {
  atomic_write(path, format_report_csv(report));
}

std::string format_metrics_log(const MetricsLog& log) {
  std::string out = "phase,step,lr,loss";
  for (const auto& name : log.rep_names) out += ",fd_" + name;
  out += "\n";
  for (const auto& r : log.records) {
    out += r.phase + "," + std::to_string(r.step) + "," + format_number(r.lr, 17) + "," +
           format_number(r.loss, 17);
    for (double v : r.fd) out += "," + format_number(v, 17);
    out += "\n";
  }
  return out;
}

MetricsLog parse_metrics_log(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorKind::kInvalidArgument, "metrics log: empty");
  const auto header = split(lines.front(), ',');
  if (header.size() < 4 || header[0] != "phase" || header[1] != "step" || header[2] != "lr" ||
      header[3] != "loss") {
    throw Error(ErrorKind::kInvalidArgument, "metrics log: unexpected header");
  }
  MetricsLog log;
  for (std::size_t j = 4; j < header.size(); ++j) {
    std::string_view name = header[j];
    if (name.substr(0, 3) != "fd_") {
      throw Error(ErrorKind::kInvalidArgument, "metrics log: column '" + std::string(name) +
                                                   "' is not an fd_ column");
    }
    log.rep_names.emplace_back(name.substr(3));
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "metrics log line " + std::to_string(i + 1) + ": wrong field count");
    }
    MetricsRecord r;
    r.phase = std::string(fields[0]);
    r.step = static_cast<std::size_t>(parse_number(fields[1], i + 1));
    r.lr = parse_number(fields[2], i + 1);
    r.loss = parse_number(fields[3], i + 1);
    for (std::size_t j = 4; j < fields.size(); ++j) r.fd.push_back(parse_number(fields[j], i + 1));
    log.records.push_back(std::move(r));
  }
  return log;
}

void write_metrics_log(const MetricsLog& log, const std::filesystem::path& path) {
  atomic_write(path, format_metrics_log(log));
}

MetricsLog read_metrics_log(const std::filesystem::path& path) {
  return parse_metrics_log(read_file(path));
}

}  // namespace fdloss
