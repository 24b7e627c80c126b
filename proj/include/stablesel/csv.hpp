#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stablesel/core.hpp"

namespace stablesel {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// Header `x1,...,xd,y`, one row per sample, LF line endings.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);

// Accepts any header whose last column is the outcome; feature names are
// taken from the header.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

void write_weights_csv(const std::string& path, const WeightVector& w);
Vector read_weights_csv(const std::string& path);

}  // namespace stablesel
