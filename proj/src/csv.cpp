#include "bss/csv.hpp"

#include <fstream>
#include <ostream>

#include "bss/error.hpp"

namespace bss::csv {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\r') {
      // drop
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

struct Reader::Impl {
  std::ifstream in;
};

Reader::Reader(const std::string& path) : impl_(new Impl) {
  impl_->in.open(path);
  if (!impl_->in) {
    delete impl_;
    throw Error(ErrorCode::io, "cannot open " + path);
  }
  std::string line;
  if (std::getline(impl_->in, line)) {
    // Strip a UTF-8 BOM if present.
    if (line.size() >= 3 && line[0] == '\xef' && line[1] == '\xbb' &&
        line[2] == '\xbf') {
      line.erase(0, 3);
    }
    header_ = split_row(line);
    for (int i = 0; i < static_cast<int>(header_.size()); ++i) {
      index_.emplace(header_[i], i);
    }
    line_ = 1;
  }
}

Reader::~Reader() { delete impl_; }

int Reader::column(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

bool Reader::next(std::vector<std::string>& out) {
  std::string line;
  while (std::getline(impl_->in, line)) {
    ++line_;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    out = split_row(line);
    return true;
  }
  return false;
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << '\n';
}

}  // namespace bss::csv
