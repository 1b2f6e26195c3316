#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace sensnet {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double x);

double parse_double(const std::string& s);

// Minimal CSV support for the artifact's outputs: a block of "# key = value"
// comment lines describing the resolved configuration, one header row, then
// data rows. Numeric fields round-trip exactly via format_double.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void comment(const std::string& key, const std::string& value);
  void comment(const std::string& key, double value);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& os_;
};

struct CsvDocument {
  std::map<std::string, std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Parses a document produced by CsvWriter. Throws on malformed input.
CsvDocument read_csv(std::istream& is);
CsvDocument read_csv_file(const std::string& path);

}  // namespace sensnet
