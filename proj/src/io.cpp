#include <sda/io.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace sda::io {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '%' || line[first] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

Matrix read_matrix_market(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("matrix market: empty input");
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
    throw IoError("matrix market: missing %%MatrixMarket matrix banner");
  }
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (field != "real" && field != "integer" && field != "double") {
    throw IoError("matrix market: unsupported field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric") {
    throw IoError("matrix market: unsupported symmetry '" + symmetry + "'");
  }
  const double mirror = symmetry == "skew-symmetric" ? -1.0 : 1.0;
  const bool symmetric = symmetry != "general";

  std::string line;
  if (!next_data_line(in, line)) throw IoError("matrix market: missing size line");
  std::istringstream size_line(line);
  long rows = 0, cols = 0, nnz = 0;
  if (format == "coordinate") {
    if (!(size_line >> rows >> cols >> nnz)) throw IoError("matrix market: bad size line");
  } else if (format == "array") {
    if (!(size_line >> rows >> cols)) throw IoError("matrix market: bad size line");
  } else {
    throw IoError("matrix market: unsupported format '" + format + "'");
  }
  if (rows < 0 || cols < 0) throw IoError("matrix market: negative dimensions");
  if (symmetric && rows != cols) throw IoError("matrix market: symmetric matrix must be square");

  Matrix M = Matrix::Zero(rows, cols);
  if (format == "coordinate") {
    for (long k = 0; k < nnz; ++k) {
      if (!next_data_line(in, line)) throw IoError("matrix market: truncated entry list");
      std::istringstream es(line);
      long i = 0, j = 0;
      double v = 0.0;
      if (!(es >> i >> j >> v)) throw IoError("matrix market: bad entry '" + line + "'");
      if (i < 1 || j < 1 || i > rows || j > cols) throw IoError("matrix market: index out of range");
      M(i - 1, j - 1) += v;
      if (symmetric && i != j) M(j - 1, i - 1) += mirror * v;
    }
  } else {
    for (long j = 0; j < cols; ++j) {
      const long start = symmetric ? j + (symmetry == "skew-symmetric" ? 1 : 0) : 0;
      for (long i = start; i < rows; ++i) {
        if (!next_data_line(in, line)) throw IoError("matrix market: truncated array data");
        std::istringstream es(line);
        double v = 0.0;
        if (!(es >> v)) throw IoError("matrix market: bad value '" + line + "'");
        M(i, j) = v;
        if (symmetric && i != j) M(j, i) = mirror * v;
      }
    }
  }
  return M;
}

Matrix read_matrix_market(const std::string& path) {
  auto in = open_in(path);
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const Matrix& M) {
  out << "%%MatrixMarket matrix array real general\n" << M.rows() << ' ' << M.cols() << '\n';
  for (Index j = 0; j < M.cols(); ++j) {
    for (Index i = 0; i < M.rows(); ++i) out << format_double(M(i, j)) << '\n';
  }
}

void write_matrix_market(const std::string& path, const Matrix& M) {
  auto out = open_out(path);
  write_matrix_market(out, M);
  if (!out) throw IoError("write failed: " + path);
}

Vector read_vector(std::istream& in) {
  std::vector<double> values;
  std::string line;
  while (next_data_line(in, line)) {
    std::istringstream ls(line);
    double v = 0.0;
    if (!(ls >> v)) throw IoError("vector: bad value '" + line + "'");
    values.push_back(v);
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Index>(values.size()));
}

Vector read_vector(const std::string& path) {
  auto in = open_in(path);
  return read_vector(in);
}

void write_vector(std::ostream& out, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

void write_vector(const std::string& path, const Vector& v) {
  auto out = open_out(path);
  write_vector(out, v);
  if (!out) throw IoError("write failed: " + path);
}

namespace {

struct EdgeListData {
  long n = 0;
  std::vector<std::pair<Index, Index>> edges;
};

EdgeListData parse_edge_list(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line)) throw IoError("edge list: missing header line");
  std::istringstream hs(line);
  EdgeListData data;
  long m = 0;
  if (!(hs >> data.n >> m) || data.n < 0 || m < 0) throw IoError("edge list: bad header '" + line + "'");
  for (long k = 0; k < m; ++k) {
    if (!next_data_line(in, line)) throw IoError("edge list: expected " + std::to_string(m) + " edges");
    std::istringstream es(line);
    long i = 0, j = 0;
    if (!(es >> i >> j)) throw IoError("edge list: bad edge '" + line + "'");
    if (i < 1 || j < 1 || i > data.n || j > data.n) {
      throw IoError("edge list: node id out of range in '" + line + "' (ids are 1-based)");
    }
    data.edges.emplace_back(i - 1, j - 1);
  }
  return data;
}

}  // namespace

GossipNetwork read_edge_list(std::istream& in, Vector values) {
  auto data = parse_edge_list(in);
  return GossipNetwork(data.n, data.edges, std::move(values));
}

GossipNetwork read_edge_list(const std::string& path, Vector values) {
  auto in = open_in(path);
  return read_edge_list(in, std::move(values));
}

Index edge_list_node_count(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!next_data_line(in, line)) throw IoError("edge list: missing header line");
  std::istringstream hs(line);
  long n = 0;
  if (!(hs >> n)) throw IoError("edge list: bad header '" + line + "'");
  return n;
}

void write_edge_list(std::ostream& out, const GossipNetwork& g) {
  out << g.nodes() << ' ' << g.edge_count() << '\n';
  for (const Edge& e : g.edges()) out << e.i + 1 << ' ' << e.j + 1 << '\n';
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace sda::io
