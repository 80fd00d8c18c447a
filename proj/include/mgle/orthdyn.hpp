#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "mgle/linops.hpp"
#include "mgle/mori.hpp"
#include "mgle/report.hpp"

namespace mgle::orthdyn {

using mori::Series;
using mori::TimeGrid;

/// The orbit t -> u(x, t) of the orthogonal dynamics and its scalar companion f(x, t).
struct OrbitMap {
  Vector x;
  TimeGrid grid;
  Series f;
  Matrix u;  ///< column k holds u(x, t_k)
};

/// f(x,t) = (U(t)Qx, QL^dagger z)/(z,z) - int f(x,t-s) (U(s)z, QL^dagger z)/(z,z) ds,
/// u(x,t) = Px + U(t)Qx - int f(x,t-s) U(s)z ds.
OrbitMap orbit(const mori::Dynamics& dyn, const mori::Orbit& x_orbit);

/// Convenience for the matrix backend.
OrbitMap orbit(const mori::MatrixDynamics& dyn, const Vector& x);

/// Max over the grid of the weighted operator norm of expm(QLQ t) - (P + Q expm(LQ t)).
/// A negative `tol` selects 1e-10 e^{|w| t} with w the fitted growth rate of QLQ.
CheckResult check_dyson(const linops::OperatorModel& model, const mori::MoriProjection& p, const TimeGrid& grid,
                        double tol = -1.0);

/// Max over the grid of ||G(t)^H W G(t) - W|| for G(t) = expm(QLQ t).
CheckResult check_unitarity(const linops::OperatorModel& model, const mori::MoriProjection& p, const TimeGrid& grid,
                            double tol);

using OrbitFactory = std::function<OrbitMap(const Vector&)>;

/// ||u(x, t+s) - u(u(x,t), s)||; throws Error if t, s or t+s is off the grid.
CheckResult check_semigroup(const OrbitFactory& factory, const hilbert::Space& space, const Vector& x, double t,
                            double s, double tol);

struct Triple {
  std::size_t t, s, r;
};

/// The fixed set of 20 (t, s, r) index triples used for stationarity checks on a grid of `count` nodes.
std::vector<Triple> stationarity_triples(std::size_t count);

/// max over the triples of |(eta_{t+r}, eta_{s+r}) - (eta_t, eta_s)|.
CheckResult check_stationarity(const mori::ForceEnsemble& eta, const hilbert::Space& space, double tol);

/// ||u(x,t)|| <= (1 + M e^{w t}) ||x|| exp(t M e^{w t} ||L^dagger z|| / ||z||) at every node, with w clamped at 0.
CheckResult check_growth_bound(const OrbitMap& orbit, const linops::GrowthBound& gb, const hilbert::Space& space,
                               double ldagger_z_norm, double z_norm);

/// Largest node-to-node increment ||u(x, t_{k+1}) - u(x, t_k)||.
double max_increment(const OrbitMap& orbit, const hilbert::Space& space);

}  // namespace mgle::orthdyn
