#include "msgp/io.hpp"

#include <openssl/sha.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "msgp/error.hpp"

namespace msgp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s == "nan" || s == "NaN" || s == "NA") {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text, bool allow_missing, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) fail(ErrorKind::data, source + ": missing header");
  Dataset data;
  std::size_t d = 0;
  while (d < header.size() && header[d] == "x" + std::to_string(d + 1)) ++d;
  if (d == 0) fail(ErrorKind::data, where() + "header must start with x1");
  if (d >= header.size() || header[d] != "y") fail(ErrorKind::data, where() + "expected column y after x1..x" + std::to_string(d));
  const bool has_truth = header.size() == d + 2 && header[d + 1] == "true_component";
  if (header.size() != d + 1 && !has_truth) fail(ErrorKind::data, where() + "unexpected column " + header[d + 1]);
  data.dims = d;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      fail(ErrorKind::data, where() + "expected " + std::to_string(header.size()) + " fields, found " +
                                std::to_string(cells.size()));
    std::vector<double> x(d);
    for (std::size_t l = 0; l < d; ++l) {
      if (!parse_number(cells[l], x[l]) || !std::isfinite(x[l]))
        fail(ErrorKind::data, where() + "bad coordinate '" + cells[l] + "'");
    }
    double y = std::numeric_limits<double>::quiet_NaN();
    if (!cells[d].empty() && !parse_number(cells[d], y)) fail(ErrorKind::data, where() + "bad outcome '" + cells[d] + "'");
    if (std::isinf(y)) fail(ErrorKind::data, where() + "infinite outcome");
    if (std::isnan(y) && !allow_missing) fail(ErrorKind::data, where() + "missing outcome");
    if (has_truth) {
      long k = 0;
      const auto& c = cells[d + 1];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), k);
      if (ec != std::errc() || ptr != c.data() + c.size() || k < 1)
        fail(ErrorKind::data, where() + "bad true_component '" + c + "'");
      data.true_component.push_back(k);
    }
    data.coords.push_back(std::move(x));
    data.y.push_back(y);
  }
  if (data.size() == 0) fail(ErrorKind::data, source + ": no data rows");
  return data;
}

Dataset read_dataset_csv(const std::string& path, bool allow_missing) {
  return parse_dataset_csv(read_file(path), allow_missing, path);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_dataset_csv(const Dataset& data) {
  std::string out;
  for (std::size_t l = 0; l < data.dims; ++l) out += "x" + std::to_string(l + 1) + ",";
  out += "y";
  const bool truth = !data.true_component.empty();
  if (truth) out += ",true_component";
  out += "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t l = 0; l < data.dims; ++l) out += format_double(data.coords[i][l]) + ",";
    out += std::isnan(data.y[i]) ? std::string() : format_double(data.y[i]);
    if (truth) out += "," + std::to_string(data.true_component[i]);
    out += "\n";
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::data, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::data, "cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      std::remove(tmp.c_str());
      fail(ErrorKind::data, "write failed for " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    fail(ErrorKind::data, "cannot rename onto " + path + ": " + ec.message());
  }
}

std::string sha1_hex(const std::string& bytes) {
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : digest) {
    out += hex[c >> 4];
    out += hex[c & 15];
  }
  return out;
}

}  // namespace msgp
