#pragma once

#include <memory>
#include <string>

#include "emsx/model.hpp"
#include "emsx/step_info.hpp"

namespace emsx {

/// Tolerance used by built-in controllers when projecting onto the
/// admissible interval.
inline constexpr double kControllerClampTol = 1e-9;
/// Tolerance of the simulator's admissibility check.
inline constexpr double kContractTol = 1e-7;

/// A decision rule u_t = phi_t(x_t, h_t). Implementations must return a
/// control inside admissible_interval(x) (within kContractTol).
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual double decide(StateOfCharge x, const StepInfo& info) = 0;
};

using ControllerPtr = std::unique_ptr<Controller>;

/// Clamps u onto the admissible interval at x when it lies within
/// kControllerClampTol of it; values inside are returned unchanged, values
/// further out throw ControllerFault.
double project_admissible(double u, double x, const BatteryParams& battery);

}  // namespace emsx
