#include "fidvr/network.hpp"

#include <cmath>
#include <string>

#include "fidvr/errors.hpp"

namespace fidvr {

void FaultSpec::validate() const {
    if (!(t_apply >= 0.0)) throw ValidationError("network.fault.t_apply", "must be >= 0");
    if (!(duration >= 0.0)) throw ValidationError("network.fault.duration", "must be >= 0");
    if (!(g_fault >= 0.0)) throw ValidationError("network.fault.g_fault", "must be >= 0");
}

void NetworkSpec::validate() const {
    if (!(e_source > 0.0)) throw ValidationError("network.e_source", "must be > 0");
    if (!(y_trans.magnitude() > 0.0)) throw ValidationError("network.y_trans", "must be nonzero");
    if (!(y_fd.magnitude() > 0.0)) throw ValidationError("network.y_fd", "must be nonzero");
    fault.validate();
}

Admittance effective_admittance(Admittance y_fd, Admittance y_trans) {
    const Complex sum = y_fd.value() + y_trans.value();
    const double scale = y_fd.magnitude() + y_trans.magnitude();
    if (std::abs(sum) <= 1e-12 * scale) {
        throw SingularNetworkError("effective_admittance: y_fd + y_trans is degenerate");
    }
    return Admittance(y_fd.value() * y_trans.value() / sum);
}

TheveninEquivalent thevenin_at_internal_bus(const NetworkSpec& net, bool fault_on,
                                            double e_factor) {
    const Complex e = Complex(net.e_source * e_factor, 0.0);
    if (!fault_on || net.fault.g_fault == 0.0) {
        return {e, effective_admittance(net.y_fd, net.y_trans)};
    }
    // Reduce source + fault shunt at the substation, then the series feeder.
    const Admittance y_shunted = net.y_trans + Admittance::from_load(net.fault.g_fault, 0.0);
    const Complex e_th = e * net.y_trans.value() / y_shunted.value();
    return {e_th, effective_admittance(net.y_fd, y_shunted)};
}

namespace {

SolveResult picard_fixed_point(const TheveninEquivalent& th, const CompositeLoadSpec& load,
                               const ThermalRelayState& relay, double gamma_c, Complex v_guess,
                               const SolveOptions& options) {
    const Complex numerator = th.e_th * th.y_eff.value();

    Complex v = v_guess;
    double prev_step = 0.0;
    int non_monotone = 0;
    bool damping = false;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const Admittance y_load = total_load_admittance(std::abs(v), load, relay, gamma_c);
        const Complex denom = th.y_eff.value() + y_load.value();
        if (std::abs(denom) == 0.0) {
            throw SingularNetworkError("solve_internal_voltage: zero total admittance");
        }
        Complex v_next = numerator / denom;
        if (damping) v_next = options.damping * v_next + (1.0 - options.damping) * v;

        const double step = std::abs(v_next - v);
        const double scale = std::max(std::abs(v_next), 1e-12);
        v = v_next;
        if (step <= options.rel_tol * scale) return {v, it};

        if (it > 1 && step > prev_step) {
            if (++non_monotone > options.damping_after) damping = true;
        }
        prev_step = step;
    }
    throw VoltageCollapseError(
        "solve_internal_voltage: no fixed point after " + std::to_string(options.max_iterations) +
        " iterations (|V| ~ " + std::to_string(std::abs(v)) + " pu)");
}

}  // namespace

SolveResult solve_internal_voltage(const NetworkSpec& net, const CompositeLoadSpec& load,
                                   const ThermalRelayState& relay, double gamma_c,
                                   Complex v_guess, bool fault_on, double e_factor,
                                   const SolveOptions& options) {
    const TheveninEquivalent th = thevenin_at_internal_bus(net, fault_on, e_factor);
    SolveResult result = picard_fixed_point(th, load, relay, gamma_c, v_guess, options);
    if (fault_on || std::abs(result.v_i) > kVoltageFloor) return result;

    // A sub-floor solution with no fault on is the clamp's spurious branch
    // (the admittance freeze makes it self-consistent). Retry from the
    // source voltage to pick up the high branch; if the iteration lands
    // back below the floor the operating point truly collapsed.
    result = picard_fixed_point(th, load, relay, gamma_c, th.e_th, options);
    if (std::abs(result.v_i) <= kVoltageFloor) {
        throw VoltageCollapseError("solve_internal_voltage: converged onto the collapsed "
                                   "branch (|V| <= " +
                                   std::to_string(kVoltageFloor) + " pu with no fault on)");
    }
    return result;
}

SubstationQuantities substation_quantities(Complex v_i, const NetworkSpec& net,
                                           Admittance y_load_total) {
    if (!(net.y_fd.magnitude() > 0.0)) {
        throw SingularNetworkError("substation_quantities: singular feeder admittance");
    }
    const Complex i = y_load_total.value() * v_i;
    const Complex v0 = v_i + i / net.y_fd.value();
    return {v0, i};
}

}  // namespace fidvr
