#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rlab::eval {

struct MetricRow {
  std::string system_name;
  double bleu = 0.0;  // [0, 1], displayed x100
  double perplexity = 0.0;
  double sentiment_alignment = 0.0;  // percent
};

enum class ReportFormat { kTableText, kDelimited };

ReportFormat parse_report_format(std::string_view name);  // "table" or "tsv"

// Columns: Model | BLEU Score | Perplexity | Sentiment Alignment (%), one
// decimal each, rows in input order. The text table has a header line and a
// rule; the delimited form is tab-separated with a header line.
std::string render_report(const std::vector<MetricRow>& rows, ReportFormat format);

// Full-precision JSON lines for handing rows between pipeline stages.
std::string serialize_metric_rows(const std::vector<MetricRow>& rows);
std::vector<MetricRow> parse_metric_rows(std::string_view contents);

}  // namespace rlab::eval
