#include "chf/assembly.hpp"
#include "chf/fe_spaces.hpp"
#include "chf/linalg.hpp"

namespace chf {

FEField discrete_laplacian(const FEField& phi) {
  if (!phi.space || phi.space->family() != Family::CG1) {
    throw FEError("discrete Laplacian needs a CG1 field");
  }
  const FESpace& V = *phi.space;
  const SparseMatrix M = assemble_bilinear(BilinearForm::Mass, V, V);
  const SparseMatrix K = assemble_bilinear(BilinearForm::Stiffness, V, V);
  Vector rhs = -(K * phi.coeffs);
  Vector L;
  try {
    L = lu_solve(M, rhs);
  } catch (const LinearSolveError& e) {
    throw std::logic_error(std::string("singular CG1 mass matrix: ") + e.what());
  }
  const Vector ones = Vector::Ones(L.size());
  const double area = ones.dot(M * ones);
  L.array() -= ones.dot(M * L) / area;
  return FEField(phi.space, std::move(L));
}

}  // namespace chf
