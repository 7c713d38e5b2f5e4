#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace bss::csv {

// Minimal RFC-4180 reader: quoted fields, embedded commas/quotes, CRLF.
// Multi-line quoted fields are not supported (no city feed uses them).
std::vector<std::string> split_row(const std::string& line);

class Reader {
public:
  explicit Reader(const std::string& path);
  ~Reader();
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  const std::vector<std::string>& header() const { return header_; }
  // -1 when absent
  int column(const std::string& name) const;

  // Returns false at EOF. Skips blank lines.
  bool next(std::vector<std::string>& out);

  // 1-based line number of the row last returned by next().
  long line_number() const { return line_; }

private:
  struct Impl;
  Impl* impl_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, int> index_;
  long line_ = 0;
};

std::string quote(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace bss::csv
