#pragma once

#include <iosfwd>
#include <string>

#include "dimest/types.hpp"

namespace dimest {

// CSV with header x0,...,x{N-1} and one sample per line at 17 significant digits.
void write_cloud_csv(std::ostream& os, const PointCloud& cloud);
void write_cloud_csv(const std::string& path, const PointCloud& cloud);

PointCloud read_cloud_csv(std::istream& is);
PointCloud read_cloud_csv(const std::string& path);

// "%.17g" formatting shared by every CSV writer.
std::string format_double(double v);

}  // namespace dimest
