#include "rfista/lasso.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "format.hpp"
#include "rfista/kernels.hpp"
#include "rfista/restart.hpp"

namespace rfista {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

enum Stream : std::uint64_t { kPattern = 0, kValues = 1, kRhs = 2, kWeights = 3 };

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// mt19937_64 is bit-specified by the standard; the distributions below are
// written out so that draws do not depend on the standard library vendor.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, Stream stream) : engine_(splitmix64(seed + stream * kGolden)) {}

  /// [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal, Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct RawData {
  SparseMatrix a;
  std::vector<double> b;
  std::vector<double> w;
};

RawData draw(std::size_t rows, std::size_t cols, double sparsity, double alpha,
             std::uint64_t seed) {
  StreamRng pattern(seed, kPattern);
  StreamRng values(seed, kValues);
  std::vector<Triplet> entries;
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      if (pattern.uniform() < sparsity) continue;
      entries.push_back({i, j, values.normal()});
    }
  }
  RawData d;
  d.a = SparseMatrix::from_triplets(rows, cols, std::move(entries));
  StreamRng rhs(seed, kRhs);
  d.b.resize(rows);
  for (auto& v : d.b) v = rhs.normal();
  StreamRng weights(seed, kWeights);
  d.w.resize(cols);
  for (auto& v : d.w) v = alpha * weights.uniform();
  return d;
}

}  // namespace

void LassoSpec::validate() const {
  if (rows < 1) throw std::invalid_argument("lasso parameters: N must be >= 1");
  if (cols <= rows) throw std::invalid_argument("lasso parameters: n must exceed N");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("lasso parameters: alpha must be finite and >= 0");
  }
  if (!(sparsity >= 0.0 && sparsity < 1.0)) {
    throw std::invalid_argument("lasso parameters: sparsity must lie in [0, 1)");
  }
}

void QuadraticSpec::validate() const {
  if (cols < 1) throw std::invalid_argument("quadratic parameters: n must be >= 1");
  if (rows < cols) throw std::invalid_argument("quadratic parameters: N must be >= n");
  if (!(sparsity >= 0.0 && sparsity < 1.0)) {
    throw std::invalid_argument("quadratic parameters: sparsity must lie in [0, 1)");
  }
}

std::string_view family_name(Family family) {
  return family == Family::Lasso ? "lasso" : "quadratic";
}

std::optional<Family> parse_family(std::string_view token) {
  if (token == "lasso") return Family::Lasso;
  if (token == "quadratic") return Family::Quadratic;
  return std::nullopt;
}

LeastSquares::LeastSquares(std::shared_ptr<const SparseMatrix> a, std::vector<double> b,
                           double scale)
    : a_(std::move(a)), b_(std::move(b)), scale_(scale) {
  if (!a_ || a_->rows() != b_.size()) {
    throw std::invalid_argument("LeastSquares: A and b disagree in row count");
  }
}

double LeastSquares::value(std::span<const double> x) const {
  std::vector<double> r(a_->rows());
  kernels::spmv(*a_, x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b_[i];
  return 0.5 * scale_ * kernels::dot(r, r);
}

void LeastSquares::gradient(std::span<const double> x, std::span<double> out) const {
  std::vector<double> r(a_->rows());
  kernels::spmv(*a_, x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = scale_ * (r[i] - b_[i]);
  kernels::spmv_transpose(*a_, r, out);
}

Metric gershgorin_metric(const SparseMatrix& a, std::size_t n_rows) {
  if (n_rows == 0) throw std::invalid_argument("gershgorin_metric: N must be >= 1");
  std::vector<double> diag(a.cols());
  kernels::gram_abs_row_sums(a, 1.0 / static_cast<double>(n_rows), diag);
  const double top = diag.empty() ? 0.0 : *std::max_element(diag.begin(), diag.end());
  const double floor = top > 0.0 ? 1e-12 * top : 1.0;
  for (auto& d : diag) d = std::max(d, floor);
  return Metric(std::move(diag));
}

LassoProblem assemble(Family family, std::size_t rows, std::size_t cols, double alpha,
                      double sparsity, std::uint64_t seed, SparseMatrix a, std::vector<double> b,
                      std::vector<double> weights) {
  if (a.rows() != rows || a.cols() != cols || b.size() != rows || weights.size() != cols) {
    throw std::invalid_argument("assemble: inconsistent dimensions");
  }
  auto shared_a = std::make_shared<const SparseMatrix>(std::move(a));
  Metric metric = gershgorin_metric(*shared_a, rows);
  auto smooth =
      std::make_shared<const LeastSquares>(shared_a, b, 1.0 / static_cast<double>(rows));
  Nonsmooth psi = family == Family::Quadratic ? Nonsmooth{ZeroPenalty{}}
                                              : Nonsmooth{WeightedL1{weights}};
  return LassoProblem{
      .family = family,
      .rows = rows,
      .cols = cols,
      .alpha = alpha,
      .sparsity = sparsity,
      .seed = seed,
      .a = shared_a,
      .b = std::move(b),
      .weights = std::move(weights),
      .problem = CompositeProblem(std::move(smooth), std::move(psi), AllSpace{}, std::move(metric)),
  };
}

LassoProblem generate(const LassoSpec& spec) {
  spec.validate();
  RawData d = draw(spec.rows, spec.cols, spec.sparsity, spec.alpha, spec.seed);
  return assemble(Family::Lasso, spec.rows, spec.cols, spec.alpha, spec.sparsity, spec.seed,
                  std::move(d.a), std::move(d.b), std::move(d.w));
}

LassoProblem generate(const QuadraticSpec& spec) {
  spec.validate();
  RawData d = draw(spec.rows, spec.cols, spec.sparsity, 0.0, spec.seed);
  return assemble(Family::Quadratic, spec.rows, spec.cols, 0.0, spec.sparsity, spec.seed,
                  std::move(d.a), std::move(d.b), std::vector<double>(spec.cols, 0.0));
}

double lasso_kkt_residual(const LassoProblem& lasso, std::span<const double> x) {
  std::vector<double> grad(lasso.cols);
  lasso.problem.smooth().gradient(x, grad);
  double worst = 0.0;
  for (std::size_t i = 0; i < lasso.cols; ++i) {
    const double w = lasso.weights[i];
    const double v = x[i] != 0.0 ? std::abs(grad[i] + (x[i] > 0 ? w : -w))
                                 : std::max(std::abs(grad[i]) - w, 0.0);
    worst = std::max(worst, v);
  }
  return worst;
}

FstarOracle oracle_fstar(const LassoProblem& lasso, double tight_eps, std::size_t budget) {
  RestartRun run;
  run.scheme = Scheme::Lcr;
  run.epsilon = tight_eps;
  run.r0.assign(lasso.cols, 0.0);
  run.budget = budget;
  RestartResult res = lcr_fista(lasso.problem, run);

  FstarOracle out;
  out.iterations = res.trace.total_iterations;
  out.kkt_residual = lasso_kkt_residual(lasso, res.r_star);
  out.f_star = objective(lasso.problem, res.r_star);
  out.x_star = std::move(res.r_star);
  if (!res.trace.converged) {
    out.diagnostic = "oracle did not reach eps=" + detail::format_double(tight_eps) +
                     " within budget";
  } else if (!(out.kkt_residual <= 1e-6)) {
    out.diagnostic = "oracle KKT residual " + detail::format_double(out.kkt_residual) +
                     " exceeds 1e-6";
  } else {
    out.valid = true;
  }
  return out;
}

std::optional<double> growth_parameter(std::span<const double> h_dense, const Metric& metric) {
  const auto n = static_cast<Eigen::Index>(metric.dimension());
  if (h_dense.size() != static_cast<std::size_t>(n * n)) {
    throw std::invalid_argument("growth_parameter: H has wrong size");
  }
  Eigen::MatrixXd m(n, n);
  const auto d = metric.diag();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = h_dense[static_cast<std::size_t>(i * n + j)] /
                std::sqrt(d[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(j)]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 1e-12 * std::max(hi, 1.0))) return std::nullopt;
  return lo;
}

namespace {

bool psi_is_zero(const LassoProblem& lasso) {
  return std::all_of(lasso.weights.begin(), lasso.weights.end(), [](double w) { return w == 0.0; });
}

Eigen::MatrixXd dense_a(const LassoProblem& lasso) {
  const auto dense = lasso.a->to_dense();
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      dense.data(), static_cast<Eigen::Index>(lasso.rows), static_cast<Eigen::Index>(lasso.cols));
}

}  // namespace

std::optional<double> oracle_mu(const LassoProblem& lasso) {
  if (!psi_is_zero(lasso) || lasso.rows < lasso.cols) return std::nullopt;
  const Eigen::MatrixXd a = dense_a(lasso);
  const Eigen::MatrixXd h = (a.transpose() * a) / static_cast<double>(lasso.rows);
  std::vector<double> flat(static_cast<std::size_t>(h.size()));
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      flat[static_cast<std::size_t>(i * h.cols() + j)] = h(i, j);
    }
  }
  return growth_parameter(flat, lasso.problem.metric());
}

std::optional<std::pair<double, std::vector<double>>> least_squares_solution(
    const LassoProblem& lasso) {
  if (!psi_is_zero(lasso)) return std::nullopt;
  const Eigen::MatrixXd a = dense_a(lasso);
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(
      lasso.b.data(), static_cast<Eigen::Index>(lasso.b.size()));
  const Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(b);
  std::vector<double> xs(x.data(), x.data() + x.size());
  return std::make_pair(objective(lasso.problem, xs), std::move(xs));
}

void write_problem(std::ostream& os, const LassoProblem& lasso) {
  nlohmann::json header = {
      {"format", "rfista-problem"},
      {"version", 1},
      {"family", std::string(family_name(lasso.family))},
      {"rows", lasso.rows},
      {"cols", lasso.cols},
      {"alpha", lasso.alpha},
      {"sparsity", lasso.sparsity},
      {"seed", lasso.seed},
      {"nnz", lasso.a->nonzeros()},
  };
  os << header.dump() << '\n';
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << lasso.rows << ' ' << lasso.cols << ' ' << lasso.a->nonzeros() << '\n';
  for (const auto& t : lasso.a->triplets()) {
    os << t.row + 1 << ' ' << t.col + 1 << ' ' << detail::format_double(t.value) << '\n';
  }
  os << "% b\n";
  for (double v : lasso.b) os << detail::format_double(v) << '\n';
  os << "% w\n";
  for (double v : lasso.weights) os << detail::format_double(v) << '\n';
  if (!os) throw std::runtime_error("write_problem: stream failure");
}

namespace {

std::string next_line(std::istream& is, const char* what) {
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error(std::string("read_problem: unexpected end of input before ") + what);
  }
  return line;
}

std::vector<double> read_block(std::istream& is, std::string_view tag, std::size_t count) {
  const std::string marker = next_line(is, "vector block");
  if (marker != tag) {
    throw std::runtime_error("read_problem: expected '" + std::string(tag) + "', got '" + marker +
                             "'");
  }
  std::vector<double> v(count);
  for (auto& x : v) x = std::stod(next_line(is, "vector value"));
  return v;
}

LassoProblem parse_problem(std::istream& is) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(next_line(is, "header"));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("read_problem: bad header: ") + e.what());
  }
  if (header.value("format", "") != "rfista-problem") {
    throw std::runtime_error("read_problem: not an rfista problem file");
  }
  const auto family = parse_family(header.at("family").get<std::string>());
  if (!family) throw std::runtime_error("read_problem: unknown family");
  const auto rows = header.at("rows").get<std::size_t>();
  const auto cols = header.at("cols").get<std::size_t>();

  std::string banner = next_line(is, "Matrix Market banner");
  if (banner.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0) {
    throw std::runtime_error("read_problem: unsupported Matrix Market banner: " + banner);
  }
  std::string line = next_line(is, "size line");
  while (!line.empty() && line[0] == '%') line = next_line(is, "size line");
  std::size_t mm_rows = 0, mm_cols = 0, nnz = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> mm_rows >> mm_cols >> nnz) || mm_rows != rows || mm_cols != cols) {
      throw std::runtime_error("read_problem: size line disagrees with header");
    }
  }
  std::vector<Triplet> entries;
  entries.reserve(nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    std::istringstream ss(next_line(is, "matrix entry"));
    std::size_t i = 0, j = 0;
    std::string value;
    if (!(ss >> i >> j >> value) || i == 0 || j == 0) {
      throw std::runtime_error("read_problem: malformed entry " + std::to_string(e + 1));
    }
    entries.push_back({i - 1, j - 1, std::stod(value)});
  }
  auto b = read_block(is, "% b", rows);
  auto w = read_block(is, "% w", cols);
  return assemble(*family, rows, cols, header.value("alpha", 0.0), header.value("sparsity", 0.0),
                  header.value("seed", std::uint64_t{0}),
                  SparseMatrix::from_triplets(rows, cols, std::move(entries)), std::move(b),
                  std::move(w));
}

}  // namespace

LassoProblem read_problem(std::istream& is) {
  try {
    return parse_problem(is);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("read_problem: bad header: ") + e.what());
  } catch (const std::logic_error& e) {  // bad numbers, out-of-range indices
    throw std::runtime_error(std::string("read_problem: ") + e.what());
  }
}

}  // namespace rfista
