#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "roughkit/errors.hpp"
#include "roughkit/rough_path.hpp"

namespace roughkit {
namespace {

std::string hex(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw InvalidArgument("rough path CSV: bad number '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string& s) {
  const double v = parse(s);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw InvalidArgument("rough path CSV: bad count '" + s + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

void write_rough_path(std::ostream& out, const RoughPath& path) {
  const std::size_t d = path.dim(), n = path.intervals();
  out << "roughpath," << d << ',' << hex(path.alpha()) << ',' << n << '\n';
  for (std::size_t i = 0; i <= n; ++i) {
    out << "node," << hex(path.grid()[i]);
    for (double v : path.value(i)) out << ',' << hex(v);
    out << '\n';
  }
  for (std::size_t i = 0; i < n; ++i) {
    out << "area," << i;
    for (double v : path.area(i)) out << ',' << hex(v);
    out << '\n';
  }
}

RoughPath read_rough_path(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("rough path CSV: empty input");
  const auto head = split(line);
  if (head.size() != 4 || head[0] != "roughpath")
    throw InvalidArgument("rough path CSV: bad header '" + line + "'");
  const std::size_t d = parse_count(head[1]);
  const double alpha = parse(head[2]);
  const std::size_t n = parse_count(head[3]);
  if (d == 0 || n == 0) throw InvalidArgument("rough path CSV: empty path");

  std::vector<double> times, first, second;
  for (std::size_t i = 0; i <= n; ++i) {
    if (!std::getline(in, line)) throw InvalidArgument("rough path CSV: truncated node rows");
    const auto cells = split(line);
    if (cells.size() != d + 2 || cells[0] != "node")
      throw InvalidArgument("rough path CSV: bad node row " + std::to_string(i));
    times.push_back(parse(cells[1]));
    for (std::size_t k = 0; k < d; ++k) first.push_back(parse(cells[2 + k]));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw InvalidArgument("rough path CSV: truncated area rows");
    const auto cells = split(line);
    if (cells.size() != d * d + 2 || cells[0] != "area" || parse_count(cells[1]) != i)
      throw InvalidArgument("rough path CSV: bad area row " + std::to_string(i));
    for (std::size_t k = 0; k < d * d; ++k) second.push_back(parse(cells[2 + k]));
  }
  return RoughPath(TimeGrid(std::move(times)), d, std::move(first), std::move(second), alpha);
}

}  // namespace roughkit
