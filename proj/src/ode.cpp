#include "hetflow/ode.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

namespace hetflow {

namespace odeint = boost::numeric::odeint;

const char* to_string(OdeStatus s) {
    switch (s) {
        case OdeStatus::Completed: return "completed";
        case OdeStatus::Event: return "event";
        case OdeStatus::StepUnderflow: return "step_underflow";
        case OdeStatus::MaxSteps: return "max_steps";
        case OdeStatus::NonFinite: return "non_finite";
    }
    return "unknown";
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool finite_state(const OdeState& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double inf_norm(const OdeState& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

OdeResult integrate_ode(const OdeRhs& rhs, const OdeState& x0, double t0, double t1, const OdeOptions& opt,
                        const std::vector<OdeEvent>& events, double sample_dt) {
    using Stepper = odeint::runge_kutta_dopri5<OdeState>;
    auto stepper = odeint::make_dense_output(opt.atol, opt.rtol, Stepper());
    auto system = [&rhs](const OdeState& x, OdeState& dxdt, double t) { rhs(x, dxdt, t); };

    OdeResult res;
    res.samples.push_back({t0, x0});
    res.t_end = t0;
    res.x_end = x0;
    if (t1 == t0) return res;

    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    stepper.initialize(x0, t0, dir * std::min(opt.initial_step, span));

    std::vector<double> g_prev(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) g_prev[i] = events[i].g(t0, x0);

    const double step_dt = std::abs(sample_dt);
    std::size_t next_sample = 1;
    OdeState xs(x0.size());

    auto emit_until = [&](double t_hi) {
        if (step_dt <= 0.0) return;
        while (true) {
            const double ts = t0 + dir * step_dt * static_cast<double>(next_sample);
            if (dir * (ts - t_hi) > 0.0 || dir * (ts - t1) > 0.0) break;
            stepper.calc_state(ts, xs);
            res.samples.push_back({ts, xs});
            ++next_sample;
        }
    };

    while (true) {
        if (res.steps >= opt.max_steps) {
            res.status = OdeStatus::MaxSteps;
            break;
        }
        // do not step past t1
        const double remaining = dir * (t1 - stepper.current_time());
        if (dir * stepper.current_time_step() > remaining)
            stepper.initialize(stepper.current_state(), stepper.current_time(), dir * remaining);

        std::pair<double, double> iv;
        try {
            iv = stepper.do_step(system);
        } catch (const odeint::step_adjustment_error&) {
            res.status = OdeStatus::StepUnderflow;
            break;
        } catch (const std::exception& e) {
            // the right-hand side left its domain
            res.status = OdeStatus::NonFinite;
            res.message = e.what();
            break;
        }
        ++res.steps;
        const double ta = iv.first, tb = iv.second;
        const OdeState& xb = stepper.current_state();
        if (!finite_state(xb)) {
            res.status = OdeStatus::NonFinite;
            break;
        }

        // earliest event inside [ta, tb]
        int hit = -1;
        double t_hit = tb;
        for (std::size_t i = 0; i < events.size(); ++i) {
            const double gb = events[i].g(tb, xb);
            if (g_prev[i] > 0.0 && gb <= 0.0) {
                double lo = ta, hi = tb;
                const double width = std::max(opt.event_time_tol, 4.0 * kEps * std::max(std::abs(ta), std::abs(tb)));
                while (std::abs(hi - lo) > width) {
                    const double mid = 0.5 * (lo + hi);
                    stepper.calc_state(mid, xs);
                    if (events[i].g(mid, xs) > 0.0)
                        lo = mid;
                    else
                        hi = mid;
                }
                if (hit < 0 || dir * (hi - t_hit) < 0.0) {
                    hit = static_cast<int>(i);
                    t_hit = hi;
                }
            }
            g_prev[i] = gb;
        }

        if (hit >= 0) {
            emit_until(t_hit);
            stepper.calc_state(t_hit, xs);
            res.status = OdeStatus::Event;
            res.event_index = hit;
            res.event_name = events[hit].name;
            res.t_end = t_hit;
            res.x_end = xs;
            if (res.samples.back().t != t_hit) res.samples.push_back({t_hit, xs});
            return res;
        }

        res.error_bound += opt.atol + opt.rtol * inf_norm(xb);
        emit_until(tb);
        if (step_dt <= 0.0) res.samples.push_back({tb, xb});
        res.t_end = tb;
        res.x_end = xb;
        if (dir * (t1 - tb) <= 0.0) {
            res.status = OdeStatus::Completed;
            break;
        }
        if (std::abs(stepper.current_time_step()) < opt.min_step * std::max(1.0, std::abs(tb))) {
            res.status = OdeStatus::StepUnderflow;
            break;
        }
    }
    if (res.samples.back().t != res.t_end) res.samples.push_back({res.t_end, res.x_end});
    return res;
}

}  // namespace hetflow
