#include "aop/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "aop/error.hpp"

namespace aop {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, const std::string& source, std::size_t line, const char* column) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw ParseError(source, line, std::string("invalid number in column '") + column + "': '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::size_t FunctionalDataset::total_points() const {
  std::size_t total = 0;
  for (const auto& c : curves) total += c.size();
  return total;
}

void FunctionalDataset::validate(const Domain& domain) const {
  for (const auto& c : curves) {
    if (c.times.empty()) throw ConfigError("curve '" + c.id + "' has no observations");
    if (c.times.size() != c.values.size()) throw DimensionError("curve '" + c.id + "' has mismatched times/values");
    for (std::size_t j = 0; j < c.times.size(); ++j) {
      if (!domain.contains(c.times[j])) {
        throw DomainError("curve '" + c.id + "' time " + format_double(c.times[j]) + " outside basis domain");
      }
      if (!std::isfinite(c.values[j])) throw DomainError("curve '" + c.id + "' has a non-finite value");
    }
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

FunctionalDataset read_long_csv(std::istream& in, const std::string& source) {
  FunctionalDataset data;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != "id,t,y") throw ParseError(source, line_no, "expected header 'id,t,y', got '" + std::string(row) + "'");
      header_seen = true;
      continue;
    }
    const auto c1 = row.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
    if (c2 == std::string_view::npos || row.find(',', c2 + 1) != std::string_view::npos) {
      throw ParseError(source, line_no, "expected 3 fields");
    }
    const std::string id(trim(row.substr(0, c1)));
    if (id.empty()) throw ParseError(source, line_no, "empty id");
    const double t = parse_number(row.substr(c1 + 1, c2 - c1 - 1), source, line_no, "t");
    const double y = parse_number(row.substr(c2 + 1), source, line_no, "y");
    auto [it, inserted] = index.try_emplace(id, data.curves.size());
    if (inserted) data.curves.push_back(Curve{id, {}, {}});
    auto& curve = data.curves[it->second];
    curve.times.push_back(t);
    curve.values.push_back(y);
  }
  if (!header_seen) throw ParseError(source, line_no == 0 ? 1 : line_no, "missing header 'id,t,y'");
  return data;
}

FunctionalDataset read_long_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open input file");
  return read_long_csv(in, path);
}

void write_long_csv(std::ostream& out, const FunctionalDataset& data) {
  out << "id,t,y\n";
  for (const auto& c : data.curves) {
    for (std::size_t j = 0; j < c.size(); ++j) {
      out << c.id << ',' << format_double(c.times[j]) << ',' << format_double(c.values[j]) << '\n';
    }
  }
}

void write_long_csv(const std::string& path, const FunctionalDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open output file");
  write_long_csv(out, data);
  if (!out) throw IoError(path, "write failed");
}

FunctionalDataset rescale_times(const FunctionalDataset& data, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ConfigError("time scale factor must be positive");
  FunctionalDataset out = data;
  for (auto& c : out.curves) {
    for (double& t : c.times) t *= factor;
  }
  return out;
}

FunctionalDataset scale_to_unit_rms(const FunctionalDataset& data) {
  FunctionalDataset out = data;
  std::string bad;
  for (auto& c : out.curves) {
    if (c.values.empty()) throw ConfigError("curve '" + c.id + "' has no observations");
    double ss = 0.0;
    for (double v : c.values) ss += v * v;
    const double rms = std::sqrt(ss / static_cast<double>(c.values.size()));
    if (!(rms > 0.0)) {
      bad += (bad.empty() ? "" : ", ") + c.id;
      continue;
    }
    for (double& v : c.values) v /= rms;
  }
  if (!bad.empty()) throw DomainError("cannot scale all-zero curves: " + bad);
  return out;
}

}  // namespace aop
