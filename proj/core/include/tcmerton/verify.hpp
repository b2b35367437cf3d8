#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tcmerton/model.hpp"
#include "tcmerton/montecarlo.hpp"
#include "tcmerton/pipeline.hpp"

namespace tcm {

/// Closed-form Merton solution for CRRA utility x^gamma/gamma and exponential
/// discounting at rate rho0: p_bar(t,y) = A(t) e^{y/(gamma-1)}, with A solving
/// A' = nu A - 1, A(T) = 1.
class MertonOracle {
 public:
  MertonOracle(const MarketModel& market, double gamma, double rho0);

  double nu() const noexcept { return nu_; }
  /// Closed form (1 + (nu - 1) e^{-nu (T-t)}) / nu, or 1 + (T - t) when nu = 0.
  double annuity(double t) const;
  /// Same ODE integrated backward with classical RK4.
  double annuity_rk4(double t, std::size_t steps = 2000) const;
  double pi() const;
  double consumption(double t) const { return 1.0 / annuity(t); }
  double value(double t, double x) const;
  double pbar(double t, double y) const;

 private:
  MarketModel market_;
  double gamma_;
  double rho0_;
  double nu_;
};

enum class Status { kPass, kFail, kWarn, kInfo };
const char* to_string(Status s);

struct ReportEntry {
  std::string name;
  Status status = Status::kPass;
  double measured = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  std::string detail;
};

/// Named check results; each name appears once. Output is ordered by name.
class VerificationReport {
 public:
  void add(ReportEntry e);
  void merge(const VerificationReport& other);
  const std::vector<ReportEntry>& entries() const noexcept { return entries_; }
  const ReportEntry* find(const std::string& name) const;
  std::size_t count(Status s) const;
  /// Exit status rule: failures always count, warnings only when strict.
  bool ok(bool strict) const;
  std::string to_json() const;
  std::string to_table() const;

 private:
  std::vector<ReportEntry> entries_;
};

struct HjbResidual {
  /// max |R| / max |G_t| over rows 1..N_t-3 and the middle half of the y-range.
  double normalized = 0.0;
  double max_abs = 0.0;
  double max_gt = 0.0;
  /// max |R| on row N_t-2, whose central t-difference reaches the terminal
  /// slice across the implicit startup step (first order there).
  double last_row_abs = 0.0;
};

/// Residual of G_t + sup_{pi,c}{...} - int dh/dt(t,s) f(t,s,x) ds - dh/dt(t,T) g(t,x),
/// evaluated in y-coordinates through x = p_bar(t,y).
HjbResidual hjb_residual(const Solution& sol);

/// Normalized residual on `sol` and, if `coarse` is given, the contraction
/// ratio coarse / fine. A miss is a warning.
ReportEntry check_hjb_residual(const Solution& sol, const Solution* coarse, double tol = 5e-3,
                               double min_ratio = 3.0);
/// Same, when the half-resolution solve itself failed; always a warning.
ReportEntry check_hjb_residual(const Solution& sol, const std::string& coarse_failure,
                               double tol = 5e-3);

/// pi = -theta v / (sigma x v_x) and c = I(v) / x against the p_bar-form
/// controls at every node.
ReportEntry check_first_order_conditions(const Solution& sol, double tol = 1e-8);

/// G(T, x) = U(x) on the terminal slice, compared at the nodes x = I0(y_k).
ReportEntry check_terminal_value(const Solution& sol, double tol = 1e-8);

/// rho_bar, pi*, c* and G(0, .) against the Merton closed form.
std::vector<ReportEntry> check_merton_reduction(const Solution& sol, const MertonOracle& oracle,
                                                const std::vector<double>& wealth);

/// Node-by-node bound checks with worst relative margins. Bounds that are
/// attained with equality at t = T are required to be strictly satisfied
/// for t < T and within 1e-12 at t = T.
std::vector<ReportEntry> check_bounds_suite(const Solution& sol);

/// Central difference of G in x against v(t,x) at interior probes.
ReportEntry check_value_gradient(const Solution& sol, const std::vector<double>& times,
                                 const std::vector<double>& wealth, double tol = 5e-3);

/// MC J(t0, x0) against G(t0, x0); statistical.
ReportEntry check_value_mc(const Solution& sol, double x0, const McOptions& mc,
                           double max_z = 3.0);

struct WealthIdentityResult {
  std::vector<double> dts;
  std::vector<double> median_gap;
  std::vector<double> ratios;
};
WealthIdentityResult wealth_identity_scaling(const Solution& sol, double t0, double x0,
                                             const std::vector<double>& dts, const McOptions& mc);
/// Median gap at dts[1] below tol, and consecutive ratios inside [lo, hi].
std::vector<ReportEntry> check_wealth_identity(const Solution& sol, double t0, double x0,
                                               const McOptions& mc,
                                               const std::vector<double>& dts = {4e-3, 1e-3,
                                                                                 2.5e-4},
                                               double tol = 2e-2, double lo = 1.3,
                                               double hi = 3.2);

struct Probe {
  double t;
  double y;
};
/// Interior probes spread over time and the middle of the y-range.
std::vector<Probe> default_probes(const Grid& grid);

/// apply_F on the PDE side against estimate_F_mc at probes; statistical.
ReportEntry check_operator_mc(const Solution& sol, const std::vector<Probe>& probes,
                              std::size_t n_paths, std::uint64_t seed, double max_z = 3.0);

/// p_bar against its Feynman-Kac representation at probes; statistical.
ReportEntry check_pbar_mc(const Solution& sol, const std::vector<Probe>& probes,
                          std::size_t n_paths, std::uint64_t seed, double max_z = 3.0);

struct PerturbationCase {
  std::string label;
  double epsilon;
  double pi;
  double c;
  McEstimate d;
};

/// D(eps) = J(eq) - J(deviation) for constant deviations on [t0, t0 + eps].
std::vector<PerturbationCase> subgame_perturbations(const Solution& sol, double t0, double x0,
                                                    const std::vector<double>& epsilons,
                                                    const McOptions& mc);
/// Flags any D(eps)/eps below -max_z standard errors; statistical.
ReportEntry check_subgame_perturbation(const Solution& sol, double t0, double x0,
                                       const std::vector<double>& epsilons, const McOptions& mc,
                                       double max_z = 3.0);

}  // namespace tcm
