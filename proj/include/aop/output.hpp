#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "aop/metrics.hpp"
#include "aop/sampler.hpp"

namespace aop {

/// draws.bin layout, all little-endian:
///   char[8]  magic "AOPDRAWS"
///   u32      format version (1)
///   u32      K, L, n, n_tau
///   u32      flags (bit 0: scores present)
///   u64      draw count D
///   D blocks of f64, each: betas (K*L, row k = beta_k), scores (n*K, row i = curve i; only
///   when flag bit 0 is set), lambdas (K), tau^2 (n_tau), sigma^2 (1).
inline constexpr char kDrawsMagic[8] = {'A', 'O', 'P', 'D', 'R', 'A', 'W', 'S'};
inline constexpr std::uint32_t kDrawsVersion = 1;

void write_draws_bin(const std::string& path, const PosteriorDraws& draws);
/// Reads back the stored blocks; posterior means and relabelling info are not stored.
PosteriorDraws read_draws_bin(const std::string& path);

nlohmann::json metric_report_json(const MetricReport& report, double epsilon);
nlohmann::json summary_json(const PosteriorDraws& draws, const MetricReport& report, double epsilon);

void write_text_file(const std::string& path, const std::string& content);
std::string format_functions_csv(const FunctionSummary& summary);
std::string format_matrix_csv(const Eigen::MatrixXd& m);

}  // namespace aop
