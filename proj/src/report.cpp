#include "cocyclelab/report.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

namespace cocyclelab {

void ReportTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw DomainError("report: row width does not match the column count");
  rows.push_back(std::move(row));
}

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw DomainError("report format must be csv or json");
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string cell_to_csv(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return format_double(v);
        if constexpr (std::is_same_v<T, long>) return std::to_string(v);
        if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        if constexpr (std::is_same_v<T, std::string>) return v;
      },
      c);
}

nlohmann::json cell_to_json(const Cell& c) {
  return std::visit([](const auto& v) -> nlohmann::json { return v; }, c);
}

}  // namespace

std::string emit_report(const ReportTable& table, ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    std::string out;
    for (size_t i = 0; i < table.columns.size(); ++i) {
      if (i) out += ',';
      out += table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
      for (size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += cell_to_csv(row[i]);
      }
      out += '\n';
    }
    return out;
  }
  nlohmann::json j;
  j["schema"] = "v1";
  j["command"] = table.command;
  j["columns"] = table.columns;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& c : row) r.push_back(cell_to_json(c));
    rows.push_back(r);
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string reemit_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text).dump(2) + "\n";
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("reemit_json: ") + e.what());
  }
}

void write_report(const ReportTable& table, ReportFormat format, const std::string& path) {
  const std::string payload = emit_report(table, format);
  if (path.empty() || path == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << payload;
  if (!out) throw IoError("failed writing output file: " + path);
}

}  // namespace cocyclelab
