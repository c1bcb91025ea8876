#pragma once

#include <sda/gossip.hpp>
#include <sda/linalg.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace sda::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix Market: reads real/integer coordinate or array files, general,
/// symmetric or skew-symmetric. Writes dense array/general.
Matrix read_matrix_market(std::istream& in);
Matrix read_matrix_market(const std::string& path);
void write_matrix_market(std::ostream& out, const Matrix& M);
void write_matrix_market(const std::string& path, const Matrix& M);

/// One number per line; blank lines and lines starting with '#' or '%' are skipped.
Vector read_vector(std::istream& in);
Vector read_vector(const std::string& path);
void write_vector(std::ostream& out, const Vector& v);
void write_vector(const std::string& path, const Vector& v);

/// First line "n m", then m lines "i j" with 1-based node ids.
GossipNetwork read_edge_list(std::istream& in, Vector values);
GossipNetwork read_edge_list(const std::string& path, Vector values);
/// Node count only (to size a default value vector before constructing the network).
Index edge_list_node_count(const std::string& path);
void write_edge_list(std::ostream& out, const GossipNetwork& g);

/// Round-trip decimal form ("%.17g").
std::string format_double(double v);

}  // namespace sda::io
