#include "stablesel/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "stablesel/error.hpp"

namespace stablesel {

namespace {

double parse_double(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\r')) --end;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("csv line " + std::to_string(line) + ": cannot parse '" + field + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t j = 0; j < data.d(); ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  const auto& x = data.features();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out << format_double(x(i, j)) << ',';
    out << format_double(data.outcome()[i]) << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  auto out = open_out(path);
  write_dataset_csv(out, data);
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 2) throw ParseError("csv: need at least one feature and an outcome column");
  const std::size_t d = header.size() - 1;
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != d + 1) {
      throw ParseError("csv line " + std::to_string(lineno) + ": expected " + std::to_string(d + 1) + " fields");
    }
    for (const auto& f : fields) values.push_back(parse_double(f, lineno));
    ++rows;
  }
  if (rows == 0) throw ParseError("csv: no data rows");
  Matrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  Vector y(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * (d + 1) + j];
    }
    y[static_cast<Eigen::Index>(i)] = values[i * (d + 1) + d];
  }
  return Dataset(std::move(x), std::move(y), std::vector<std::string>(header.begin(), header.end() - 1));
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  return read_dataset_csv(in);
}

void write_weights_csv(const std::string& path, const WeightVector& w) {
  auto out = open_out(path);
  out << "w\n";
  for (std::size_t i = 0; i < w.size(); ++i) out << format_double(w[i]) << '\n';
}

Vector read_weights_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<double> v;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    v.push_back(parse_double(line, lineno));
  }
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace stablesel
