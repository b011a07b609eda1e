#pragma once

#include "caplab/types.hpp"

#include <Eigen/Core>

#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace caplab {

/// Values carried by a boundary vertex. `wall` is -1 on an unsupported boundary, in which case
/// the in-wall quantities are NaN.
struct BoundaryPointFields {
  int vertex = -1;
  int wall = -1;
  Vec3 nu = Vec3::Zero();     // exterior unit conormal, tangent to the surface
  Vec3 nubar = Vec3::Zero();  // unit normal to the boundary inside the wall
  double sigma_nn = 0.0;      // sigma(nu, nu)
  double H_bdry = std::numeric_limits<double>::quiet_NaN();  // <D_T T, nubar>
  double angle = std::numeric_limits<double>::quiet_NaN();   // arccos <N, n_wall>
};

/// Per-vertex geometry. Sign conventions: sigma(X, Y) = <-D_X N, Y>, H = trace(sigma) / n,
/// and N is oriented so that the mean of H is non-negative.
struct GeometryFields {
  std::vector<Vec3> N;
  Eigen::VectorXd H;
  Eigen::VectorXd sigma_sq;
  std::vector<Mat3> shape;  // ambient shape operator W with sigma(X, Y) = X^T W Y on tangent vectors
  std::vector<BoundaryPointFields> boundary;
  std::vector<int> boundary_slot;  // vertex -> index into `boundary`, -1 for interior vertices
  std::vector<std::string> warnings;
  bool exact = false;

  std::size_t num_vertices() const { return N.size(); }

  const BoundaryPointFields* at_boundary(int v) const {
    const int s = boundary_slot[v];
    return s < 0 ? nullptr : &boundary[s];
  }

  void resize(std::size_t nv) {
    N.assign(nv, Vec3::Zero());
    H = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
    sigma_sq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
    shape.assign(nv, Mat3::Zero());
    boundary.clear();
    boundary_slot.assign(nv, -1);
  }

  void add_boundary(const BoundaryPointFields& b) {
    boundary_slot[b.vertex] = static_cast<int>(boundary.size());
    boundary.push_back(b);
  }
};

/// Per-vertex CSV with a header row; boundary columns are empty on interior vertices.
inline void write_fields_csv(std::ostream& os, const GeometryFields& f) {
  os << "vertex,Nx,Ny,Nz,H,sigma_sq,wall,nux,nuy,nuz,nubarx,nubary,nubarz,sigma_nn,H_bdry,angle\n";
  os.precision(17);
  for (std::size_t v = 0; v < f.num_vertices(); ++v) {
    os << v << ',' << f.N[v].x() << ',' << f.N[v].y() << ',' << f.N[v].z() << ',' << f.H[v] << ',' << f.sigma_sq[v];
    if (const auto* b = f.at_boundary(static_cast<int>(v))) {
      os << ',' << b->wall << ',' << b->nu.x() << ',' << b->nu.y() << ',' << b->nu.z() << ',' << b->nubar.x() << ','
         << b->nubar.y() << ',' << b->nubar.z() << ',' << b->sigma_nn << ',' << b->H_bdry << ',' << b->angle;
    } else {
      os << ",,,,,,,,,,";
    }
    os << '\n';
  }
}

}  // namespace caplab
