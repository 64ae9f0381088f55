#include "aop/output.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aop/dataset.hpp"
#include "aop/error.hpp"

namespace aop {

static_assert(std::endian::native == std::endian::little, "draws.bin writer assumes a little-endian host");

namespace {

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError(path, "truncated draws file");
  return v;
}

void put_doubles(std::ofstream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::ifstream& in, std::vector<double>& dst, std::size_t n, const std::string& path) {
  const std::size_t old = dst.size();
  dst.resize(old + n);
  if (!in.read(reinterpret_cast<char*>(dst.data() + old), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw IoError(path, "truncated draws file");
  }
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void write_draws_bin(const std::string& path, const PosteriorDraws& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open output file");
  out.write(kDrawsMagic, sizeof(kDrawsMagic));
  put<std::uint32_t>(out, kDrawsVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d.K));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d.L));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d.n));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d.n_tau));
  put<std::uint32_t>(out, d.has_scores ? 1u : 0u);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(d.draw_count));
  const auto KL = static_cast<std::size_t>(d.K * d.L);
  const auto nK = static_cast<std::size_t>(d.n * d.K);
  for (long i = 0; i < d.draw_count; ++i) {
    const auto di = static_cast<std::size_t>(i);
    put_doubles(out, d.betas.data() + di * KL, KL);
    if (d.has_scores) put_doubles(out, d.scores.data() + di * nK, nK);
    put_doubles(out, d.lambdas.data() + di * static_cast<std::size_t>(d.K), static_cast<std::size_t>(d.K));
    put_doubles(out, d.tau_sqs.data() + di * static_cast<std::size_t>(d.n_tau), static_cast<std::size_t>(d.n_tau));
    put_doubles(out, d.sigma_sqs.data() + di, 1);
  }
  if (!out) throw IoError(path, "write failed");
}

PosteriorDraws read_draws_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open draws file");
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kDrawsMagic, sizeof(magic)) != 0) {
    throw IoError(path, "not a draws file");
  }
  if (get<std::uint32_t>(in, path) != kDrawsVersion) throw IoError(path, "unsupported draws format version");
  PosteriorDraws d;
  d.K = static_cast<int>(get<std::uint32_t>(in, path));
  d.L = static_cast<int>(get<std::uint32_t>(in, path));
  d.n = static_cast<int>(get<std::uint32_t>(in, path));
  d.n_tau = static_cast<int>(get<std::uint32_t>(in, path));
  d.has_scores = (get<std::uint32_t>(in, path) & 1u) != 0;
  d.draw_count = static_cast<long>(get<std::uint64_t>(in, path));
  for (long i = 0; i < d.draw_count; ++i) {
    get_doubles(in, d.betas, static_cast<std::size_t>(d.K * d.L), path);
    if (d.has_scores) get_doubles(in, d.scores, static_cast<std::size_t>(d.n * d.K), path);
    get_doubles(in, d.lambdas, static_cast<std::size_t>(d.K), path);
    get_doubles(in, d.tau_sqs, static_cast<std::size_t>(d.n_tau), path);
    get_doubles(in, d.sigma_sqs, 1, path);
  }
  return d;
}

nlohmann::json metric_report_json(const MetricReport& r, double epsilon) {
  return {{"nc", r.nc}, {"og", r.og}, {"epsilon", epsilon}, {"norms", r.norms}, {"ip_matrix", matrix_json(r.ip_matrix)}};
}

nlohmann::json summary_json(const PosteriorDraws& d, const MetricReport& r, double epsilon) {
  const Eigen::VectorXd lam = d.lambda_mean();
  nlohmann::json j;
  j["prior"] = to_string(d.prior);
  j["K"] = d.K;
  j["L"] = d.L;
  j["n"] = d.n;
  j["draws"] = d.draw_count;
  j["metrics"] = metric_report_json(r, epsilon);
  j["posterior_mean"] = {
      {"betas", matrix_json(d.beta_mean)},
      {"lambda", std::vector<double>(lam.data(), lam.data() + lam.size())},
      {"tau_sq", d.tau_mean()},
      {"sigma_sq", d.sigma_sq_mean()},
  };
  j["relabel"] = {{"order", d.order}, {"signs", d.signs}};
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open output file");
  out << content;
  if (!out) throw IoError(path, "write failed");
}

std::string format_functions_csv(const FunctionSummary& s) {
  std::ostringstream os;
  os << "component,t,mean,lower,upper\n";
  for (Eigen::Index k = 0; k < s.mean.cols(); ++k) {
    for (std::size_t g = 0; g < s.grid.size(); ++g) {
      const auto gi = static_cast<Eigen::Index>(g);
      os << (k + 1) << ',' << format_double(s.grid[g]) << ',' << format_double(s.mean(gi, k)) << ','
         << format_double(s.lower(gi, k)) << ',' << format_double(s.upper(gi, k)) << '\n';
    }
  }
  return os.str();
}

std::string format_matrix_csv(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  os << "row";
  for (Eigen::Index c = 0; c < m.cols(); ++c) os << ",f" << (c + 1);
  os << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << 'f' << (r + 1);
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << ',' << format_double(m(r, c));
    os << '\n';
  }
  return os.str();
}

}  // namespace aop
