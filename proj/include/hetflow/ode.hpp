/**
 * @file ode.hpp
 * @brief Adaptive Dormand–Prince 5(4) integration with dense output and event localisation.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace hetflow {

using OdeState = std::vector<double>;
using OdeRhs = std::function<void(const OdeState& x, OdeState& dxdt, double t)>;

/// Terminal event: fires when g changes from positive to non-positive.
struct OdeEvent {
    std::string name;
    std::function<double(double t, const OdeState& x)> g;
};

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 1e-3;
    double min_step = 1e-13;         ///< relative to max(1, |t|)
    double event_time_tol = 1e-10;   ///< bisection width in t, floored at a few ulps of t
    std::size_t max_steps = 2000000;
};

enum class OdeStatus { Completed, Event, StepUnderflow, MaxSteps, NonFinite };

const char* to_string(OdeStatus s);

struct OdeSample {
    double t;
    OdeState x;
};

struct OdeResult {
    OdeStatus status = OdeStatus::Completed;
    int event_index = -1;
    std::string event_name;
    std::string message;  ///< what() of an exception thrown by the right-hand side
    double t_end = 0.0;
    OdeState x_end;
    std::vector<OdeSample> samples;
    std::size_t steps = 0;
    /// Sum over accepted steps of the per-step tolerance atol + rtol·|x|∞; a crude global error bound.
    double error_bound = 0.0;
};

/// Integrates from t0 towards t1 (either direction). With sample_dt > 0 the trajectory is
/// sampled on the grid t0 + k·sample_dt via dense output, otherwise at every accepted step.
/// The final state is always the last sample.
OdeResult integrate_ode(const OdeRhs& rhs, const OdeState& x0, double t0, double t1, const OdeOptions& opt,
                        const std::vector<OdeEvent>& events = {}, double sample_dt = 0.0);

}  // namespace hetflow
