#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "aop/basis.hpp"

namespace aop {

struct Curve {
  std::string id;
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
  bool operator==(const Curve&) const = default;
};

struct FunctionalDataset {
  std::vector<Curve> curves;

  std::size_t size() const { return curves.size(); }
  std::size_t total_points() const;
  /// Every curve has m_i >= 1 matching times/values, finite values and times inside `domain`.
  void validate(const Domain& domain) const;
  bool operator==(const FunctionalDataset&) const = default;
};

/// Long-format CSV with header `id,t,y`. Rows of one curve need not be contiguous;
/// curves keep the order of their first appearance.
FunctionalDataset read_long_csv(std::istream& in, const std::string& source = "<stream>");
FunctionalDataset read_long_csv(const std::string& path);

/// Shortest round-trip decimal formatting, so reading back yields identical doubles.
void write_long_csv(std::ostream& out, const FunctionalDataset& data);
void write_long_csv(const std::string& path, const FunctionalDataset& data);

/// Divides each curve by its root mean square. Throws DomainError listing the ids of
/// all-zero curves.
FunctionalDataset scale_to_unit_rms(const FunctionalDataset& data);

/// Multiplies every observation time by `factor` (> 0).
FunctionalDataset rescale_times(const FunctionalDataset& data, double factor);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace aop
