#pragma once

#include <string>
#include <vector>

namespace mixkit {
namespace report {

/// Locale-independent fixed decimal formatting ("%.6f") for every numeric
/// CSV/JSON field, so identical runs produce identical bytes.
std::string fmt_value(double v);

/// One tabular report: a header row plus string cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const Table& table);

/// JSON mirror of the same schema: an array of objects keyed by the header.
std::string to_json(const Table& table);

/// Writes via a temp file in the same directory plus rename, so readers never
/// observe a partial file.
void atomic_write(const std::string& path, const std::string& contents);

}  // namespace report
}  // namespace mixkit
