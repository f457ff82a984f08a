#pragma once

#include "fidvr/admittance.hpp"
#include "fidvr/load_model.hpp"

namespace fidvr {

/// Shunt fault applied at the substation bus for a fixed interval. A zero
/// duration means no fault.
struct FaultSpec {
    double t_apply = 1.0;    ///< s
    double duration = 0.05;  ///< s
    double g_fault = 1e3;    ///< pu shunt conductance while the fault is on

    void validate() const;
};

/// Two-bus network: source E behind y_trans, substation bus, series feeder
/// y_fd, composite load at the internal bus. y_fd is a single series
/// equivalent (tap transformer and shunt compensation lumped in).
struct NetworkSpec {
    double e_source = 1.05;
    Admittance y_trans = Admittance::from_impedance(0.015, 0.15);
    Admittance y_fd = Admittance::from_impedance(0.005, 0.05);
    FaultSpec fault;

    void validate() const;
};

/// Series combination y_fd * y_trans / (y_fd + y_trans): the effective
/// admittance seen by the load. Throws SingularNetworkError on a degenerate
/// sum.
[[nodiscard]] Admittance effective_admittance(Admittance y_fd, Admittance y_trans);

/// Source voltage and series admittance of the network reduced to the
/// internal bus; includes the substation fault shunt while the fault is on.
struct TheveninEquivalent {
    Complex e_th;
    Admittance y_eff;
};

[[nodiscard]] TheveninEquivalent thevenin_at_internal_bus(const NetworkSpec& net, bool fault_on,
                                                          double e_factor = 1.0);

struct SolveOptions {
    double rel_tol = 1e-12;  ///< relative step tolerance (tighter than the 1e-9 contract)
    int max_iterations = 200;
    int damping_after = 20;  ///< non-monotone iterations before damping engages
    double damping = 0.5;
};

struct SolveResult {
    Complex v_i;
    int iterations = 0;
};

/// Fixed point of V = E_th * Y_eff / (Y_eff + Y_load(|V|)) by Picard
/// iteration with a damping fallback. The complex divider's magnitude is the
/// post-stall voltage relation; the load admittance is re-evaluated at |V|
/// each pass. Throws VoltageCollapseError if the iteration does not
/// converge.
[[nodiscard]] SolveResult solve_internal_voltage(const NetworkSpec& net,
                                                 const CompositeLoadSpec& load,
                                                 const ThermalRelayState& relay, double gamma_c,
                                                 Complex v_guess, bool fault_on = false,
                                                 double e_factor = 1.0,
                                                 const SolveOptions& options = {});

struct SubstationQuantities {
    Complex v0;  ///< substation voltage phasor
    Complex i;   ///< current into the feeder (= load current)
};

/// Substation phasors reconstructed from a solved internal voltage:
/// I = Y_load * V_i and V0 = V_i + I / y_fd.
[[nodiscard]] SubstationQuantities substation_quantities(Complex v_i, const NetworkSpec& net,
                                                         Admittance y_load_total);

}  // namespace fidvr
