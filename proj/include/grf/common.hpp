#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace grf {

using index_t = std::int64_t;

// Hard numerical policy knobs. These are contracts, not tunables: tests and
// the acceptance suite pin them.
inline constexpr double kSpdFloor     = 1e-10;  // minimum metric eigenvalue
inline constexpr double kClosedTol    = 1e-10;  // max-norm of dH for admissibility
inline constexpr double kDensityFloor = 1e-8;   // minimum density value
inline constexpr double kEllipticTol  = 1e-10;  // relative residual for elliptic solves
inline constexpr double kGeodesicTol  = 1e-6;   // first-variation residual at convergence
inline constexpr double kCflDefault   = 0.2;    // parabolic CFL fraction

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Metric failed the SPD floor somewhere; message carries the node.
struct spd_error : error {
  index_t node = -1;
  spd_error(const std::string& msg, index_t where) : error(msg), node(where) {}
};

struct shape_error : error {
  using error::error;
};

struct solver_error : error {
  using error::error;
};

struct config_error : error {
  using error::error;
};

struct cfl_error : error {
  using error::error;
};

}  // namespace grf
