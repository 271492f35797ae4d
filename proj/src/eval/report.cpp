#include "rlab/eval/report.hpp"

#include <cstdio>

#include "json.hpp"
#include "rlab/util/error.hpp"

namespace rlab::eval {

namespace {

std::string one_decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "table") return ReportFormat::kTableText;
  if (name == "tsv") return ReportFormat::kDelimited;
  throw Error(ErrorCode::kInvalidArgument, "unknown report format '" + std::string(name) + "'");
}

std::string render_report(const std::vector<MetricRow>& rows, ReportFormat format) {
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, "report needs at least one row");
  const char* sep = format == ReportFormat::kDelimited ? "\t" : " | ";
  std::string out = std::string("Model") + sep + "BLEU Score" + sep + "Perplexity" + sep +
                    "Sentiment Alignment (%)\n";
  if (format == ReportFormat::kTableText) out += std::string(out.size() - 1, '-') + "\n";
  for (const auto& r : rows) {
    out += r.system_name + sep + one_decimal(r.bleu * 100.0) + sep + one_decimal(r.perplexity) + sep +
           one_decimal(r.sentiment_alignment) + "\n";
  }
  return out;
}

std::string serialize_metric_rows(const std::vector<MetricRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += nlohmann::json{{"system_name", r.system_name},
                          {"bleu", r.bleu},
                          {"perplexity", r.perplexity},
                          {"sentiment_alignment", r.sentiment_alignment}}
               .dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<MetricRow> parse_metric_rows(std::string_view contents) {
  std::vector<MetricRow> rows;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const auto line = contents.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      rows.push_back(MetricRow{j.at("system_name").get<std::string>(), j.at("bleu").get<double>(),
                               j.at("perplexity").get<double>(),
                               j.at("sentiment_alignment").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, std::string("metric rows: ") + e.what());
    }
  }
  return rows;
}

}  // namespace rlab::eval
