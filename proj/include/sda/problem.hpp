#pragma once

#include <sda/linalg.hpp>

namespace sda {

/// Best-approximation problem: minimize 1/2 ||x - c||_B^2 subject to A x = b,
/// paired with its dual  max_y (b - A c)^T y - 1/2 ||A^T y||^2_{B^-1}.
///
/// Caches W = B^-1 A^T (n x m), the whitened factor K = L^-1 A^T (B = L L^T)
/// and G = A B^-1 A^T = K^T K (m x m).
class ProjectionProblem {
 public:
  ProjectionProblem(Matrix A, Vector b, SpdMatrix B, Vector c);

  /// B = I, c = 0: the least-norm solution of A x = b.
  static ProjectionProblem least_norm(Matrix A, Vector b);

  Index rows() const { return A_.rows(); }
  Index cols() const { return A_.cols(); }

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  const SpdMatrix& B() const { return B_; }
  const Vector& c() const { return c_; }

  const Matrix& binv_at() const { return binv_at_; }
  const Matrix& whitened_at() const { return whitened_at_; }
  const Matrix& gram() const { return gram_; }

  /// Euclidean norm of the least-squares residual of A x = b.
  double consistency_residual() const;

  /// Throws InconsistentSystem if the least-squares residual exceeds
  /// rel_tol * max(1, ||b||).
  void check_consistent(double rel_tol = 1e-8) const;

 private:
  Matrix A_;
  Vector b_;
  SpdMatrix B_;
  Vector c_;
  Matrix binv_at_;
  Matrix whitened_at_;
  Matrix gram_;
};

/// Z = A^T (A B^-1 A^T)^+ A. B^-1 Z projects onto Range(B^-1 A^T) in the B-geometry.
struct BProjector {
  Matrix Z;
  Matrix binv_Z;
};

BProjector projector(const ProjectionProblem& problem);

/// x = s + t with s in Range(B^-1 A^T) and t in Null(A), B-orthogonal.
struct Decomposition {
  Vector s;
  Vector t;
};

Decomposition decompose(const Vector& x, const ProjectionProblem& problem);

}  // namespace sda
