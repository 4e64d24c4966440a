#include "chf/assembly.hpp"

#include <cmath>
#include <string>

#include "chf/forchheimer.hpp"

namespace chf {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& t) {
  SparseMatrix A(rows, cols);
  A.setFromTriplets(t.begin(), t.end());
  A.makeCompressed();
  return A;
}

void require(bool ok, const char* what) {
  if (!ok) throw AssemblyError(what);
}

}  // namespace

RTTables tabulate_rt(const FESpace& rt) {
  require(rt.family() == Family::RT1, "tabulate_rt needs an RT1 space");
  const Mesh& m = rt.mesh();
  const auto& q = default_quadrature();
  RTTables tab;
  tab.n_quad = static_cast<int>(q.points.size());
  tab.volume.reserve(m.num_triangles() * q.points.size());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto g = cell_geometry(m, static_cast<int>(t));
    for (const auto& b : q.points) tab.volume.push_back(rt.rt_shape(static_cast<int>(t), g.map(b)));
  }
  for (std::size_t bi = 0; bi < m.boundary_edges.size(); ++bi) {
    const int e = m.boundary_edges[bi];
    RTTables::BoundaryEdge be;
    be.cell = m.edge_triangles[e][0];
    be.local_edge = 0;
    while (m.triangle_edges[be.cell][be.local_edge] != e) ++be.local_edge;
    be.length = m.edge_length(e);
    be.normal = m.boundary_normals[bi];
    const auto g = cell_geometry(m, be.cell);
    const Point a = m.vertices[m.edges[e][0]];
    const Point b = m.vertices[m.edges[e][1]];
    for (double s : q.edge_points) {
      const Point x = a + s * (b - a);
      be.bary.push_back(g.barycentric(x));
      be.shape.push_back(rt.rt_shape(be.cell, x));
    }
    tab.boundary.push_back(std::move(be));
  }
  return tab;
}

SparseMatrix assemble_bilinear(BilinearForm form, const FESpace& trial, const FESpace& test,
                               const FEField* coefficient, const ParamFn& weight) {
  require(trial.mesh_ptr() == test.mesh_ptr(), "trial and test spaces live on different meshes");
  const Mesh& m = trial.mesh();
  const auto& q = default_quadrature();
  const auto nq = q.points.size();
  Triplets trip;

  auto scalar_family = [](Family f) { return f == Family::CG1 || f == Family::DG1; };

  switch (form) {
    case BilinearForm::Mass: {
      require(trial.family() == test.family(), "mass matrix needs one space");
      if (scalar_family(trial.family())) {
        for (std::size_t t = 0; t < m.num_triangles(); ++t) {
          const auto dofs = trial.cell_dofs(static_cast<int>(t));
          const double a = m.area(static_cast<int>(t));
          for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) trip.emplace_back(dofs[i], dofs[j], a * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
          }
        }
      } else {
        const RTTables tab = tabulate_rt(trial);
        for (std::size_t t = 0; t < m.num_triangles(); ++t) {
          const auto dofs = trial.cell_dofs(static_cast<int>(t));
          const double a = m.area(static_cast<int>(t));
          Eigen::Matrix<double, 8, 8> loc = Eigen::Matrix<double, 8, 8>::Zero();
          for (std::size_t k = 0; k < nq; ++k) {
            const auto& sh = tab.at(static_cast<int>(t), static_cast<int>(k));
            for (int i = 0; i < 8; ++i)
              for (int j = 0; j < 8; ++j) loc(i, j) += q.weights[k] * a * sh.value[i].dot(sh.value[j]);
          }
          for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) trip.emplace_back(dofs[i], dofs[j], loc(i, j));
        }
      }
      break;
    }
    case BilinearForm::Stiffness:
    case BilinearForm::WeightedStiffness: {
      require(trial.family() == Family::CG1 && test.family() == Family::CG1, "stiffness needs CG1");
      const bool weighted = form == BilinearForm::WeightedStiffness;
      if (weighted) {
        require(coefficient && weight, "weighted stiffness needs a coefficient field and weight");
        require(coefficient->space->family() == Family::CG1 &&
                    coefficient->space->mesh_ptr() == trial.mesh_ptr(),
                "weighted stiffness coefficient must be CG1 on the same mesh");
      }
      for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        const int cell = static_cast<int>(t);
        const auto g = cell_geometry(m, cell);
        const auto dofs = trial.cell_dofs(cell);
        double k_avg = 1.0;
        if (weighted) {
          k_avg = 0.0;
          for (std::size_t k = 0; k < nq; ++k) k_avg += q.weights[k] * weight(coefficient->value(cell, q.points[k]));
        }
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            trip.emplace_back(dofs[i], dofs[j], k_avg * g.area * g.grad_lambda[i].dot(g.grad_lambda[j]));
      }
      break;
    }
    case BilinearForm::Divergence: {
      require(trial.family() == Family::RT1 && test.family() == Family::DG1, "divergence form needs RT1 x DG1");
      const RTTables tab = tabulate_rt(trial);
      for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        const auto rd = trial.cell_dofs(static_cast<int>(t));
        const auto qd = test.cell_dofs(static_cast<int>(t));
        const double a = m.area(static_cast<int>(t));
        for (std::size_t k = 0; k < nq; ++k) {
          const auto& sh = tab.at(static_cast<int>(t), static_cast<int>(k));
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 8; ++j) trip.emplace_back(qd[i], rd[j], q.weights[k] * a * q.points[k][i] * sh.div[j]);
        }
      }
      break;
    }
    case BilinearForm::HdivGram: {
      require(trial.family() == Family::RT1 && test.family() == Family::RT1, "H(div) Gram needs RT1");
      const RTTables tab = tabulate_rt(trial);
      for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        const auto dofs = trial.cell_dofs(static_cast<int>(t));
        const double a = m.area(static_cast<int>(t));
        Eigen::Matrix<double, 8, 8> loc = Eigen::Matrix<double, 8, 8>::Zero();
        for (std::size_t k = 0; k < nq; ++k) {
          const auto& sh = tab.at(static_cast<int>(t), static_cast<int>(k));
          for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
              loc(i, j) += q.weights[k] * a * (sh.value[i].dot(sh.value[j]) + sh.div[i] * sh.div[j]);
        }
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j) trip.emplace_back(dofs[i], dofs[j], loc(i, j));
      }
      break;
    }
    default:
      throw AssemblyError("unknown bilinear form");
  }
  return from_triplets(static_cast<Eigen::Index>(test.ndofs()), static_cast<Eigen::Index>(trial.ndofs()), trip);
}

Vector assemble_divergence_residual(const FEField& v, const FESpace& dg) {
  require(v.space->family() == Family::RT1 && dg.family() == Family::DG1, "divergence residual needs RT1 and DG1");
  require(v.space->mesh_ptr() == dg.mesh_ptr(), "spaces live on different meshes");
  const Mesh& m = dg.mesh();
  const auto& q = default_quadrature();
  Vector r = Vector::Zero(static_cast<Eigen::Index>(dg.ndofs()));
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const int cell = static_cast<int>(t);
    const auto g = cell_geometry(m, cell);
    const auto qd = dg.cell_dofs(cell);
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      const double d = v.divergence(cell, g.map(q.points[k]));
      for (int i = 0; i < 3; ++i) r[qd[i]] += q.weights[k] * g.area * q.points[k][i] * d;
    }
  }
  return r;
}

CoupledAssembler::CoupledAssembler(std::shared_ptr<const Mesh> mesh, ModelParams params)
    : params_(std::move(params)), mesh_(std::move(mesh)) {
  params_.validate();
  cg_ = make_space(mesh_, Family::CG1);
  rt_ = make_space(mesh_, Family::RT1);
  dg_ = make_space(mesh_, Family::DG1);
  tables_ = tabulate_rt(*rt_);
  layout_.n_cg = static_cast<Eigen::Index>(cg_->ndofs());
  layout_.n_rt = static_cast<Eigen::Index>(rt_->ndofs());
  layout_.n_dg = static_cast<Eigen::Index>(dg_->ndofs());
  layout_.phi = 0;
  layout_.mu = layout_.n_cg;
  layout_.v = 2 * layout_.n_cg;
  layout_.p = layout_.v + layout_.n_rt;
  layout_.size = layout_.p + layout_.n_dg;
  geom_.reserve(mesh_->num_triangles());
  for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) geom_.push_back(cell_geometry(*mesh_, static_cast<int>(t)));
  set_previous(Vector::Zero(layout_.n_cg));
}

void CoupledAssembler::set_previous(const Vector& phi_old) {
  require(phi_old.size() == layout_.n_cg, "previous phi has wrong length");
  phi_old_ = phi_old;
  const auto& q = default_quadrature();
  const auto nq = q.points.size();
  cache_.resize(mesh_->num_triangles() * nq);
  for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) {
    const auto& tri = mesh_->triangles[t];
    for (std::size_t k = 0; k < nq; ++k) {
      const auto& b = q.points[k];
      const double ph = b[0] * phi_old_[tri[0]] + b[1] * phi_old_[tri[1]] + b[2] * phi_old_[tri[2]];
      cache_[t * nq + k] = {ph,
                            params_.alpha(ph),
                            params_.beta(ph),
                            params_.mobility(ph),
                            params_.gamma_phi(ph),
                            params_.gamma_v(ph)};
    }
  }
}

Vector CoupledAssembler::residual(const Vector& x) const {
  Vector r;
  assemble(x, &r, nullptr);
  return r;
}

SparseMatrix CoupledAssembler::jacobian(const Vector& x) const {
  std::vector<Eigen::Triplet<double>> trip;
  assemble(x, nullptr, &trip);
  for (const auto& t : trip) {
    if (!std::isfinite(t.value())) {
      throw AssemblyError("non-finite Jacobian entry at (" + std::to_string(t.row()) + ", " +
                          std::to_string(t.col()) + ")");
    }
  }
  return from_triplets(layout_.size, layout_.size, trip);
}

void CoupledAssembler::assemble(const Vector& x, Vector* res, std::vector<Eigen::Triplet<double>>* trip) const {
  require(x.size() == layout_.size, "state vector has wrong length");
  const auto& q = default_quadrature();
  const int nq = static_cast<int>(q.points.size());
  const double tau = params_.tau;
  const double eps2 = params_.eps2;
  const double s = params_.s;
  const double gam = params_.gamma;
  const Mesh& m = *mesh_;
  const auto& L = layout_;

  if (res) *res = Vector::Zero(L.size);
  if (trip) trip->reserve(m.num_triangles() * 17 * 17 + m.boundary_edges.size() * 48);

  // local ordering: phi 0-2, mu 3-5, v 6-13, p 14-16
  constexpr int N = 17;
  std::array<Eigen::Index, N> gl{};
  Eigen::Matrix<double, N, 1> rl;
  Eigen::Matrix<double, N, N> jl;

  auto gather = [&](int t) {
    const auto& tri = m.triangles[t];
    const auto rd = rt_->cell_dofs(t);
    const auto pd = dg_->cell_dofs(t);
    for (int i = 0; i < 3; ++i) {
      gl[i] = L.phi + tri[i];
      gl[3 + i] = L.mu + tri[i];
      gl[14 + i] = L.p + pd[i];
    }
    for (int i = 0; i < 8; ++i) gl[6 + i] = L.v + rd[i];
  };
  auto scatter = [&]() {
    if (res)
      for (int i = 0; i < N; ++i) (*res)[gl[i]] += rl[i];
    if (trip)
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          if (jl(i, j) != 0.0 || i == j) trip->emplace_back(gl[i], gl[j], jl(i, j));
  };

  for (std::size_t tt = 0; tt < m.num_triangles(); ++tt) {
    const int t = static_cast<int>(tt);
    const auto& g = geom_[t];
    gather(t);
    rl.setZero();
    jl.setZero();

    std::array<double, 3> phi_new, phi_prev, mu;
    std::array<double, 8> vc;
    std::array<double, 3> pc;
    for (int i = 0; i < 3; ++i) {
      phi_new[i] = x[gl[i]];
      mu[i] = x[gl[3 + i]];
      pc[i] = x[gl[14 + i]];
      phi_prev[i] = phi_old_[m.triangles[t][i]];
    }
    for (int i = 0; i < 8; ++i) vc[i] = x[gl[6 + i]];

    Vec2 grad_phi = Vec2::Zero(), grad_mu = Vec2::Zero();
    for (int i = 0; i < 3; ++i) {
      grad_phi += phi_new[i] * g.grad_lambda[i];
      grad_mu += mu[i] * g.grad_lambda[i];
    }

    for (int k = 0; k < nq; ++k) {
      const auto& b = q.points[k];
      const double w = q.weights[k] * g.area;
      const auto& c = cache_[tt * nq + k];
      const auto& sh = tables_.at(t, k);

      double ph = 0.0, ph_old = 0.0, mu_q = 0.0, p_q = 0.0;
      for (int i = 0; i < 3; ++i) {
        ph += b[i] * phi_new[i];
        ph_old += b[i] * phi_prev[i];
        mu_q += b[i] * mu[i];
        p_q += b[i] * pc[i];
      }
      Vec2 v = Vec2::Zero();
      double div_v = 0.0;
      for (int i = 0; i < 8; ++i) {
        v += vc[i] * sh.value[i];
        div_v += vc[i] * sh.div[i];
      }
      const double vnorm = v.norm();
      const double drag = c.alpha + c.beta * (vnorm > 0.0 ? std::pow(vnorm, s - 1.0) : (s == 1.0 ? 1.0 : 0.0));

      if (res) {
        const double dphi = (ph - ph_old) / tau;
        const double psi_av = psi_prime_av(ph, ph_old);
        for (int i = 0; i < 3; ++i) {
          rl[i] += w * (dphi * b[i] - c.phi_old * v.dot(g.grad_lambda[i]) +
                        c.mobility * grad_mu.dot(g.grad_lambda[i]) - c.gamma_phi * b[i]);
          rl[3 + i] += w * (mu_q * b[i] - eps2 * grad_phi.dot(g.grad_lambda[i]) - psi_av * b[i]);
          rl[14 + i] += w * (div_v - c.gamma_v) * b[i];
        }
        for (int j = 0; j < 8; ++j) {
          rl[6 + j] += w * (drag * v.dot(sh.value[j]) - p_q * sh.div[j] +
                            c.phi_old * grad_mu.dot(sh.value[j]) + gam * c.phi_old * mu_q * sh.div[j]);
        }
      }
      if (trip) {
        const double dpsi = psi_prime_av_derivative(ph, ph_old);
        // d/dv [|v|^{s-1} v] = |v|^{s-1} I + (s-1) |v|^{s-3} v v^T
        const double vreg = std::sqrt(vnorm * vnorm + kJacobianDelta * kJacobianDelta);
        const double outer = (s - 1.0) * c.beta * std::pow(vreg, s - 3.0);
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) {
            const double mass = w * b[i] * b[j];
            const double stiff = w * g.grad_lambda[i].dot(g.grad_lambda[j]);
            jl(i, j) += mass / tau;
            jl(i, 3 + j) += c.mobility * stiff;
            jl(3 + i, 3 + j) += mass;
            jl(3 + i, j) += -eps2 * stiff - dpsi * mass;
          }
          for (int j = 0; j < 8; ++j) {
            jl(i, 6 + j) += -w * c.phi_old * sh.value[j].dot(g.grad_lambda[i]);
            jl(14 + i, 6 + j) += w * sh.div[j] * b[i];
          }
        }
        for (int i = 0; i < 8; ++i) {
          const double vi = v.dot(sh.value[i]);
          for (int j = 0; j < 8; ++j) {
            jl(6 + i, 6 + j) += w * (drag * sh.value[i].dot(sh.value[j]) + outer * vi * v.dot(sh.value[j]));
          }
          for (int j = 0; j < 3; ++j) {
            jl(6 + i, 14 + j) += -w * b[j] * sh.div[i];
            jl(6 + i, 3 + j) += w * c.phi_old * (g.grad_lambda[j].dot(sh.value[i]) + gam * b[j] * sh.div[i]);
          }
        }
      }
    }
    scatter();
  }

  if (params_.gamma == 1) {
    const int ne = static_cast<int>(q.edge_points.size());
    for (const auto& be : tables_.boundary) {
      const int t = be.cell;
      gather(t);
      rl.setZero();
      jl.setZero();
      const auto& tri = m.triangles[t];
      for (int k = 0; k < ne; ++k) {
        const auto& b = be.bary[k];
        const auto& sh = be.shape[k];
        const double w = q.edge_weights[k] * be.length;
        double ph_old = 0.0, mu_q = 0.0;
        for (int i = 0; i < 3; ++i) {
          ph_old += b[i] * phi_old_[tri[i]];
          mu_q += b[i] * x[gl[3 + i]];
        }
        double vn = 0.0;
        for (int i = 0; i < 8; ++i) vn += x[gl[6 + i]] * sh.value[i].dot(be.normal);
        if (res) {
          for (int i = 0; i < 3; ++i) rl[i] += w * ph_old * vn * b[i];
          for (int j = 0; j < 8; ++j) rl[6 + j] += -w * ph_old * mu_q * sh.value[j].dot(be.normal);
        }
        if (trip) {
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 8; ++j) {
              const double wn = sh.value[j].dot(be.normal);
              jl(i, 6 + j) += w * ph_old * wn * b[i];
              jl(6 + j, 3 + i) += -w * ph_old * b[i] * wn;
            }
        }
      }
      scatter();
    }
  }
}

}  // namespace chf
