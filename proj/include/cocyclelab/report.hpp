#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cocyclelab/errors.hpp"

namespace cocyclelab {

using Cell = std::variant<double, long, bool, std::string>;

/// Flat result table with a fixed, documented column order per command.
struct ReportTable {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

enum class ReportFormat { kCsv, kJson };

ReportFormat parse_format(const std::string& name);

/// CSV with doubles printed at 17 significant digits (round-trip exact);
/// JSON with a schema version field "v1".
std::string emit_report(const ReportTable& table, ReportFormat format);

/// Parse-and-re-emit for JSON reports; bit-identical for emit_report output.
std::string reemit_json(const std::string& text);

void write_report(const ReportTable& table, ReportFormat format, const std::string& path);

}  // namespace cocyclelab
