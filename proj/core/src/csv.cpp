#include "brainalign/csv.hpp"

#include <boost/tokenizer.hpp>

#include <sstream>

#include "brainalign/io.hpp"

namespace brainalign::csv {

std::vector<std::vector<std::string>> read(const std::filesystem::path& path,
                                           const std::vector<std::string>& expected_header) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    try {
      Tokenizer tok(line, boost::escaped_list_separator<char>('\\', ',', '"'));
      cells.assign(tok.begin(), tok.end());
    } catch (const boost::escaped_list_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!header_seen) {
      if (cells != expected_header) throw FormatError(path.string() + ": unexpected CSV header");
      header_seen = true;
      continue;
    }
    if (cells.size() != expected_header.size())
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(expected_header.size()) + " columns");
    rows.push_back(std::move(cells));
  }
  if (!header_seen) throw FormatError(path.string() + ": empty CSV");
  return rows;
}

}  // namespace brainalign::csv
