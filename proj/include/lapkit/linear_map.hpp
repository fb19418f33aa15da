#pragma once

#include <functional>
#include <memory>
#include <string>

#include "lapkit/grid.hpp"

namespace lapkit {

/// Immutable operator on the grid's function space, matrix-free.
///
/// Holds an apply procedure and an adjoint-apply procedure. Copies share the
/// underlying closures; nothing is mutated after construction, so a map may
/// be used from several threads at once.
class LinearMap {
 public:
  using ApplyFn = std::function<void(const Vector& in, Vector& out)>;

  LinearMap(GridSpec grid, std::string tag, ApplyFn apply, ApplyFn adjoint, bool hermitian);

  /// Hermitian map: the adjoint is the map itself.
  static LinearMap hermitian(GridSpec grid, std::string tag, ApplyFn apply);
  static LinearMap identity(const GridSpec& grid);
  static LinearMap zero(const GridSpec& grid);
  /// Diagonal in the position basis.
  static LinearMap diagonal(const GridSpec& grid, std::string tag, Vector values);
  /// Dense matrix (oracle paths and small demos).
  static LinearMap dense(const GridSpec& grid, std::string tag, Matrix m, bool hermitian);

  void apply(const Vector& in, Vector& out) const { (*apply_)(in, out); }
  void apply_adjoint(const Vector& in, Vector& out) const { (*adjoint_)(in, out); }
  Vector operator()(const Vector& in) const;
  Vector adjoint_apply(const Vector& in) const;

  LinearMap adjoint() const;
  LinearMap with_tag(std::string tag) const;

  const GridSpec& grid() const { return grid_; }
  const std::string& tag() const { return tag_; }
  bool is_hermitian() const { return hermitian_; }
  std::size_t size() const { return grid_.size(); }

 private:
  GridSpec grid_;
  std::string tag_;
  std::shared_ptr<const ApplyFn> apply_;
  std::shared_ptr<const ApplyFn> adjoint_;
  bool hermitian_;
};

/// a∘b.
LinearMap compose(const LinearMap& a, const LinearMap& b);
/// outer∘inner∘outer^†; Hermitian whenever inner is.
LinearMap sandwich(const LinearMap& outer, const LinearMap& inner);
LinearMap operator+(const LinearMap& a, const LinearMap& b);
LinearMap operator-(const LinearMap& a, const LinearMap& b);
LinearMap scale(Complex c, const LinearMap& a);
/// Symmetrized product ½(a∘b + b∘a); Hermitian for Hermitian a, b.
LinearMap symmetric_product(const LinearMap& a, const LinearMap& b);

/// Dense matrix of the map in the node basis (column j = map(e_j)).
Matrix assemble(const LinearMap& map);

/// max over trials of |(g, Tf) - (T^†g, f)| / (‖f‖‖g‖); when the map is
/// flagged Hermitian the same quantity is computed with T^† = T.
double adjoint_defect(const LinearMap& map, int trials, std::uint64_t seed);

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  bool stagnated = false;
};

/// Largest singular value by power iteration on M^†M (or MM^† when
/// use_adjoint_first), fixed seed, relative stagnation exit.
NormEstimate estimate_norm(const LinearMap& map, int steps, std::uint64_t seed,
                           double stagnation_tol = 1e-6, bool use_adjoint_first = false);

}  // namespace lapkit
