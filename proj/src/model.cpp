#include "rkmor/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "rkmor/numkernel.hpp"
#include "rkmor/random.hpp"

namespace rkmor {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

double max_real_eigenvalue_part(const ComplexMatrix& A, const ComplexMatrix& E,
                                bool identity_mass) {
  Eigen::ComplexEigenSolver<ComplexMatrix> es;
  if (identity_mass) {
    es.compute(A, /*computeEigenvectors=*/false);
  } else {
    es.compute(ComplexMatrix(Eigen::PartialPivLU<ComplexMatrix>(E).solve(A)),
               /*computeEigenvectors=*/false);
  }
  double mu = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    mu = std::max(mu, es.eigenvalues()(i).real());
  }
  return mu;
}

}  // namespace

StateSpaceSystem make_system(ComplexMatrix A, ComplexMatrix E, ComplexVector b,
                             ComplexVector c) {
  const Index n = A.rows();
  if (A.cols() != n || E.rows() != n || E.cols() != n) {
    throw DimensionMismatch("make_system: A and E must be square and equal");
  }
  if (b.size() != n || c.size() != n) {
    throw DimensionMismatch("make_system: b and c must have length n");
  }
  if (!A.allFinite() || !E.allFinite() || !b.allFinite() || !c.allFinite()) {
    throw ParseError("make_system: non-finite entry");
  }
  StateSpaceSystem sys;
  sys.identity_mass = E.isIdentity(0.0);
  if (!sys.identity_mass) {
    Eigen::PartialPivLU<ComplexMatrix> lu(E);
    if (!lu_nonsingular(lu)) {
      throw SingularMass("make_system: mass matrix E numerically singular");
    }
  }
  sys.A = std::move(A);
  sys.E = std::move(E);
  sys.b = std::move(b);
  sys.c = std::move(c);
  return sys;
}

StateSpaceSystem gen_test_system(SystemKind kind, Index n, std::uint32_t seed) {
  if (n < 1) throw DimensionMismatch("gen_test_system: n must be positive");
  ComplexMatrix A = ComplexMatrix::Zero(n, n);
  ComplexMatrix E = ComplexMatrix::Identity(n, n);
  ComplexVector b = ComplexVector::Ones(n);
  ComplexVector c = ComplexVector::Ones(n);

  switch (kind) {
    case SystemKind::diagonal:
      for (Index i = 0; i < n; ++i) A(i, i) = Complex(-double(i + 1), 0.0);
      break;
    case SystemKind::laplacian_1d: {
      const double h2 = double(n + 1) * double(n + 1);
      for (Index i = 0; i < n; ++i) {
        A(i, i) = Complex(-2.0 * h2, 0.0);
        if (i + 1 < n) {
          A(i, i + 1) = Complex(h2, 0.0);
          A(i + 1, i) = Complex(h2, 0.0);
        }
      }
      break;
    }
    case SystemKind::random_stable: {
      RandomStream rng(seed);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) A(i, j) = Complex(rng.normal(), 0.0);
      for (Index i = 0; i < n; ++i) b(i) = Complex(rng.normal(), 0.0);
      for (Index i = 0; i < n; ++i) c(i) = Complex(rng.normal(), 0.0);
      const double mu = max_real_eigenvalue_part(A, E, true);
      if (mu >= 0.0) A -= 2.0 * mu * E;
      break;
    }
  }
  return make_system(std::move(A), std::move(E), std::move(b), std::move(c));
}

ComplexMatrix gen_random_mass(Index n, std::uint32_t seed) {
  RandomStream rng(seed);
  ComplexMatrix G(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) G(i, j) = Complex(rng.normal(), 0.0);
  // ||G||_2 <= sqrt(||G||_1 ||G||_inf); the bound keeps E = I + G/(2*bound)
  // at condition number <= 3.
  const double n1 = G.cwiseAbs().colwise().sum().maxCoeff();
  const double ninf = G.cwiseAbs().rowwise().sum().maxCoeff();
  const double bound = std::max(std::sqrt(n1 * ninf), 1e-300);
  return ComplexMatrix::Identity(n, n) + G / (2.0 * bound);
}

StateSpaceSystem with_mass_matrix(const StateSpaceSystem& sys, ComplexMatrix E,
                                  bool restabilize) {
  ComplexMatrix A = sys.A;
  if (restabilize) {
    const double mu = max_real_eigenvalue_part(A, E, E.isIdentity(0.0));
    if (mu >= 0.0) A -= 2.0 * mu * E;
  }
  return make_system(std::move(A), std::move(E), sys.b, sys.c);
}

SampleGrid make_grid(double alpha, double beta, int k) {
  if (k < 1) throw ConfigError("make_grid: k must be at least 1");
  if (!(alpha <= beta)) throw ConfigError("make_grid: requires alpha <= beta");
  SampleGrid g;
  g.alpha = alpha;
  g.beta = beta;
  g.k = k;
  std::vector<double> mags(k);
  for (int i = 0; i < k; ++i) {
    const double x =
        (k == 1) ? beta : alpha + (beta - alpha) * double(i) / double(k - 1);
    mags[i] = std::pow(10.0, x);
  }
  g.points.reserve(2 * std::size_t(k) + 1);
  for (int i = k - 1; i >= 0; --i) g.points.emplace_back(0.0, -mags[i]);
  g.points.emplace_back(0.0, 0.0);
  for (int i = 0; i < k; ++i) g.points.emplace_back(0.0, mags[i]);
  return g;
}

// ---------------------------------------------------------------------------
// Matrix Market I/O

namespace {

struct MmHeader {
  std::string format;    // array | coordinate
  std::string field;     // real | integer | complex
  std::string symmetry;  // general | symmetric | skew-symmetric | hermitian
};

[[noreturn]] void parse_fail(const std::string& path, int line_no,
                             const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line_no << ": " << what;
  throw ParseError(os.str());
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

ComplexMatrix load_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix file: " + path);

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++line_no;

  MmHeader hdr;
  {
    std::istringstream hs(line);
    std::string banner, object;
    hs >> banner >> object >> hdr.format >> hdr.field >> hdr.symmetry;
    if (to_lower(banner) != "%%matrixmarket" || to_lower(object) != "matrix") {
      parse_fail(path, line_no, "not a MatrixMarket matrix header");
    }
    hdr.format = to_lower(hdr.format);
    hdr.field = to_lower(hdr.field);
    hdr.symmetry = hdr.symmetry.empty() ? "general" : to_lower(hdr.symmetry);
  }
  if (hdr.format != "array" && hdr.format != "coordinate") {
    parse_fail(path, line_no, "unsupported format '" + hdr.format + "'");
  }
  if (hdr.field != "real" && hdr.field != "integer" && hdr.field != "complex") {
    parse_fail(path, line_no, "unsupported field '" + hdr.field + "'");
  }
  if (hdr.symmetry != "general" && hdr.symmetry != "symmetric" &&
      hdr.symmetry != "skew-symmetric" && hdr.symmetry != "hermitian") {
    parse_fail(path, line_no, "unsupported symmetry '" + hdr.symmetry + "'");
  }
  const bool complex_field = hdr.field == "complex";

  auto next_line = [&](std::string& out) -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (blank(line) || line[0] == '%') continue;
      out = line;
      return true;
    }
    return false;
  };

  std::string size_line;
  if (!next_line(size_line)) parse_fail(path, line_no, "missing size line");

  Index rows = 0, cols = 0;
  long long nnz = 0;
  {
    std::istringstream ss(size_line);
    if (hdr.format == "coordinate") {
      if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
        parse_fail(path, line_no, "malformed coordinate size line");
      }
    } else {
      if (!(ss >> rows >> cols) || rows < 0 || cols < 0) {
        parse_fail(path, line_no, "malformed array size line");
      }
    }
    std::string extra;
    if (ss >> extra) parse_fail(path, line_no, "trailing tokens on size line");
  }
  if (hdr.symmetry != "general" && rows != cols) {
    parse_fail(path, line_no, "symmetric storage requires a square matrix");
  }

  ComplexMatrix M = ComplexMatrix::Zero(rows, cols);

  auto read_value = [&](std::istringstream& ss) -> Complex {
    double re = 0.0, im = 0.0;
    if (!(ss >> re)) parse_fail(path, line_no, "malformed numeric value");
    if (complex_field && !(ss >> im)) {
      parse_fail(path, line_no, "complex entry needs two values");
    }
    return Complex(re, im);
  };

  if (hdr.format == "coordinate") {
    std::string data;
    for (long long e = 0; e < nnz; ++e) {
      if (!next_line(data)) parse_fail(path, line_no, "unexpected end of data");
      std::istringstream ss(data);
      Index i = 0, j = 0;
      if (!(ss >> i >> j)) parse_fail(path, line_no, "malformed entry indices");
      if (i < 1 || i > rows || j < 1 || j > cols) {
        parse_fail(path, line_no, "entry index out of range");
      }
      const Complex v = read_value(ss);
      std::string extra;
      if (ss >> extra) parse_fail(path, line_no, "trailing tokens on entry");
      M(i - 1, j - 1) = v;
      if (i != j) {
        if (hdr.symmetry == "symmetric") M(j - 1, i - 1) = v;
        if (hdr.symmetry == "hermitian") M(j - 1, i - 1) = std::conj(v);
        if (hdr.symmetry == "skew-symmetric") M(j - 1, i - 1) = -v;
      }
    }
  } else {
    auto stored_rows_begin = [&](Index j) -> Index {
      if (hdr.symmetry == "general") return 0;
      if (hdr.symmetry == "skew-symmetric") return j + 1;
      return j;  // symmetric, hermitian
    };
    std::string data;
    for (Index j = 0; j < cols; ++j) {
      for (Index i = stored_rows_begin(j); i < rows; ++i) {
        if (!next_line(data)) {
          parse_fail(path, line_no, "unexpected end of data");
        }
        std::istringstream ss(data);
        const Complex v = read_value(ss);
        std::string extra;
        if (ss >> extra) parse_fail(path, line_no, "trailing tokens on entry");
        M(i, j) = v;
        if (i != j) {
          if (hdr.symmetry == "symmetric") M(j, i) = v;
          if (hdr.symmetry == "hermitian") M(j, i) = std::conj(v);
          if (hdr.symmetry == "skew-symmetric") M(j, i) = -v;
        }
      }
    }
  }

  std::string trailing;
  if (next_line(trailing)) parse_fail(path, line_no, "trailing data");
  return M;
}

void save_matrix_market_array(const std::string& path, const ComplexMatrix& M) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  const bool complex_field = (M.imag().cwiseAbs().sum() != 0.0);
  out << "%%MatrixMarket matrix array "
      << (complex_field ? "complex" : "real") << " general\n";
  out << M.rows() << " " << M.cols() << "\n";
  char buf[96];
  for (Index j = 0; j < M.cols(); ++j) {
    for (Index i = 0; i < M.rows(); ++i) {
      if (complex_field) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g", M(i, j).real(),
                      M(i, j).imag());
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g", M(i, j).real());
      }
      out << buf << "\n";
    }
  }
  if (!out) throw ParseError("write failed: " + path);
}

namespace {

std::string resolve_path(const std::string& p, const std::string& root) {
  if (root.empty()) return p;
  std::filesystem::path fp(p);
  if (fp.is_absolute()) return p;
  return (std::filesystem::path(root) / fp).string();
}

ComplexVector as_vector(ComplexMatrix M, const std::string& which) {
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.transpose().col(0);
  throw DimensionMismatch("load_system: " + which + " is not a vector");
}

}  // namespace

StateSpaceSystem load_system(const std::string& path_a,
                             const std::string& path_e,
                             const std::string& path_b,
                             const std::string& path_c,
                             const std::string& data_root) {
  ComplexMatrix A = load_matrix_market(resolve_path(path_a, data_root));
  if (A.rows() != A.cols()) {
    throw DimensionMismatch("load_system: A is not square");
  }
  const Index n = A.rows();
  ComplexMatrix E;
  if (path_e.empty()) {
    E = ComplexMatrix::Identity(n, n);
  } else {
    E = load_matrix_market(resolve_path(path_e, data_root));
    if (E.rows() != n || E.cols() != n) {
      throw DimensionMismatch("load_system: E shape does not match A");
    }
  }
  ComplexVector b = as_vector(load_matrix_market(resolve_path(path_b, data_root)), "b");
  ComplexVector c = as_vector(load_matrix_market(resolve_path(path_c, data_root)), "c");
  if (b.size() != n || c.size() != n) {
    throw DimensionMismatch("load_system: b or c length does not match A");
  }
  return make_system(std::move(A), std::move(E), std::move(b), std::move(c));
}

}  // namespace rkmor
