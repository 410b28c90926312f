#include "brainalign/npy.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "brainalign/errors.hpp"
#include "brainalign/io.hpp"

static_assert(std::endian::native == std::endian::little,
              "NPY codec assumes a little-endian host");

namespace brainalign::npy {
namespace {

constexpr std::string_view kMagic{"\x93NUMPY", 6};

struct Header {
  std::string descr;
  bool fortran_order = false;
  std::vector<long long> shape;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == ','))
    s.remove_suffix(1);
  return s;
}

// Returns the raw text of the value for `key` in a python dict literal.
std::string_view dict_value(std::string_view dict, std::string_view key) {
  for (const char quote : {'\'', '"'}) {
    const std::string needle = std::string(1, quote) + std::string(key) + std::string(1, quote);
    const auto pos = dict.find(needle);
    if (pos == std::string_view::npos) continue;
    auto rest = dict.substr(pos + needle.size());
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw FormatError("NPY header: missing ':' after " + std::string(key));
    rest = rest.substr(colon + 1);
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    if (rest.empty()) throw FormatError("NPY header: empty value for " + std::string(key));
    std::size_t end = 0;
    if (rest.front() == '(') {
      end = rest.find(')');
      if (end == std::string_view::npos) throw FormatError("NPY header: unterminated shape tuple");
      return rest.substr(0, end + 1);
    }
    if (rest.front() == '\'' || rest.front() == '"') {
      end = rest.find(rest.front(), 1);
      if (end == std::string_view::npos) throw FormatError("NPY header: unterminated string");
      return rest.substr(0, end + 1);
    }
    end = rest.find_first_of(",}");
    if (end == std::string_view::npos) throw FormatError("NPY header: unterminated value");
    return trim(rest.substr(0, end));
  }
  throw FormatError("NPY header: missing key '" + std::string(key) + "'");
}

Header parse_header(std::string_view text) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '{' || text.back() != '}')
    throw FormatError("NPY header is not a dict literal");
  Header h;
  auto descr = dict_value(text, "descr");
  if (descr.size() < 2) throw FormatError("NPY header: bad descr");
  h.descr = std::string(descr.substr(1, descr.size() - 2));

  const auto fortran = dict_value(text, "fortran_order");
  if (fortran == "False") {
    h.fortran_order = false;
  } else if (fortran == "True") {
    h.fortran_order = true;
  } else {
    throw FormatError("NPY header: bad fortran_order '" + std::string(fortran) + "'");
  }

  auto shape = dict_value(text, "shape");
  shape = shape.substr(1, shape.size() - 2);
  std::size_t pos = 0;
  while (pos < shape.size()) {
    auto next = shape.find(',', pos);
    if (next == std::string_view::npos) next = shape.size();
    const auto item = trim(shape.substr(pos, next - pos));
    if (!item.empty()) {
      long long v = 0;
      for (const char c : item) {
        if (c < '0' || c > '9') throw FormatError("NPY header: bad shape entry '" + std::string(item) + "'");
        v = v * 10 + (c - '0');
      }
      h.shape.push_back(v);
    }
    pos = next + 1;
  }
  return h;
}

}  // namespace

Matrix decode(std::string_view bytes) {
  if (bytes.size() < 10 || bytes.substr(0, 6) != kMagic) throw FormatError("not an NPY file (bad magic)");
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0)
    throw FormatError("unsupported NPY version " + std::to_string(major) + "." + std::to_string(minor));
  std::uint16_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 8, sizeof(header_len));
  if (bytes.size() < 10u + header_len) throw FormatError("NPY header truncated");
  const Header h = parse_header(bytes.substr(10, header_len));

  std::size_t width = 0;
  if (h.descr == "<f8") {
    width = 8;
  } else if (h.descr == "<f4") {
    width = 4;
  } else {
    throw DtypeError("unsupported NPY dtype '" + h.descr + "' (expected <f8 or <f4)");
  }
  if (h.fortran_order) throw FormatError("fortran_order NPY arrays are not supported");
  if (h.shape.size() != 2) throw ShapeError("expected a 2-D array, got ndim=" + std::to_string(h.shape.size()));

  const auto rows = static_cast<std::size_t>(h.shape[0]);
  const auto cols = static_cast<std::size_t>(h.shape[1]);
  const auto payload = bytes.substr(10 + header_len);
  if (payload.size() != rows * cols * width) {
    throw ShapeError("NPY payload holds " + std::to_string(payload.size() / width) + " values, header shape (" +
                     std::to_string(rows) + ", " + std::to_string(cols) + ") needs " + std::to_string(rows * cols));
  }

  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  const char* p = payload.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (width == 8) {
        double v;
        std::memcpy(&v, p, 8);
        m(static_cast<Index>(r), static_cast<Index>(c)) = v;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        m(static_cast<Index>(r), static_cast<Index>(c)) = static_cast<double>(v);
      }
      p += width;
    }
  }
  return m;
}

std::string encode(const Matrix& m) {
  std::ostringstream dict;
  dict << "{'descr': '<f8', 'fortran_order': False, 'shape': (" << m.rows() << ", " << m.cols() << "), }";
  std::string header = dict.str();
  // magic + version + length + header + '\n' padded to a multiple of 64.
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  std::string out;
  out.reserve(10 + header.size() + static_cast<std::size_t>(m.size()) * 8);
  out.append(kMagic);
  out.push_back('\x01');
  out.push_back('\x00');
  const auto len = static_cast<std::uint16_t>(header.size());
  out.append(reinterpret_cast<const char*>(&len), 2);
  out.append(header);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      out.append(reinterpret_cast<const char*>(&v), 8);
    }
  }
  return out;
}

Matrix read_matrix(const std::filesystem::path& path) {
  return decode(read_file(path));
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  write_file_atomic(path, encode(m));
}

}  // namespace brainalign::npy
