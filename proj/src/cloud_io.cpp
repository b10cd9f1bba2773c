#include "dimest/cloud_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dimest {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  return s.substr(start);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_cloud_csv(std::ostream& os, const PointCloud& cloud) {
  for (Eigen::Index j = 0; j < cloud.cols(); ++j) {
    if (j) os << ',';
    os << 'x' << j;
  }
  os << '\n';
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    for (Eigen::Index j = 0; j < cloud.cols(); ++j) {
      if (j) os << ',';
      os << format_double(cloud(i, j));
    }
    os << '\n';
  }
}

void write_cloud_csv(const std::string& path, const PointCloud& cloud) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_cloud_csv(os, cloud);
}

PointCloud read_cloud_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("cloud CSV is empty");
  const auto header = split_line(strip(line));
  const auto cols = static_cast<Eigen::Index>(header.size());
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (strip(header[static_cast<std::size_t>(j)]) != "x" + std::to_string(j)) {
      throw DomainError("cloud CSV header must read x0,...,x{N-1}");
    }
  }

  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(is, line)) {
    line = strip(line);
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (static_cast<Eigen::Index>(fields.size()) != cols) {
      throw ShapeError("cloud CSV row " + std::to_string(rows + 1) + " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(cols));
    }
    for (const auto& f : fields) {
      const std::string s = strip(f);
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size() || (errno == ERANGE && std::isinf(v))) {
        throw DomainError("cloud CSV has a malformed number '" + s + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  PointCloud cloud(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) cloud(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  validate_cloud(cloud);
  return cloud;
}

PointCloud read_cloud_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_cloud_csv(is);
}

}  // namespace dimest
