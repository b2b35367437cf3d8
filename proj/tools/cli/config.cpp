#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tcmerton/errors.hpp"

namespace tcm::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"market", {"r", "mu", "sigma", "T"}},
      {"discount", {"kind", "rho0", "alpha", "beta", "weights", "rates"}},
      {"utility", {"family", "gamma", "alpha", "gamma1", "gamma2", "weights", "gammas", "r1", "r2"}},
      {"grid", {"n_t", "n_y", "y_min", "y_max", "x_lo", "x_hi", "pad"}},
      {"solver", {"tol", "max_iter", "damping", "kappa", "cn_theta", "richardson"}},
      {"mc", {"n_paths", "dt", "seed", "antithetic", "t0", "x0", "export_paths"}},
      {"verify",
       {"monte_carlo", "hjb_refine", "wealth", "value_paths", "operator_paths", "identity_paths",
        "perturbation_paths", "epsilons", "identity_dts"}},
      {"output", {"directory", "value_wealth", "value_t_stride"}},
  };
  return s;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    std::string s = *v;
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    return raw(key).value_or(fallback);
  }

  std::optional<double> number(const std::string& key) const {
    auto s = raw(key);
    if (!s) return std::nullopt;
    return to_double(key, *s);
  }

  double number(const std::string& key, double fallback) const {
    return number(key).value_or(fallback);
  }

  double required(const std::string& key) const {
    auto v = number(key);
    if (!v) throw ValidationError(key, "missing");
    return *v;
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    auto s = raw(key);
    if (!s) return fallback;
    std::size_t v = 0;
    const auto res = std::from_chars(s->data(), s->data() + s->size(), v);
    if (res.ec != std::errc() || res.ptr != s->data() + s->size())
      throw ValidationError(key, "expected a non-negative integer, got '" + *s + "'");
    return v;
  }

  bool flag(const std::string& key, bool fallback) const {
    auto s = raw(key);
    if (!s) return fallback;
    if (*s == "true" || *s == "1" || *s == "yes") return true;
    if (*s == "false" || *s == "0" || *s == "no") return false;
    throw ValidationError(key, "expected true or false, got '" + *s + "'");
  }

  std::optional<std::vector<double>> list(const std::string& key) const {
    auto s = raw(key);
    if (!s) return std::nullopt;
    std::vector<double> out;
    std::istringstream is(*s);
    std::string item;
    while (std::getline(is, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos) throw ValidationError(key, "empty list item");
      out.push_back(to_double(key, item.substr(b, e - b + 1)));
    }
    if (out.empty()) throw ValidationError(key, "empty list");
    return out;
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
    return list(key).value_or(std::move(fallback));
  }

 private:
  static double to_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
      throw ValidationError(key, "expected a finite number, got '" + s + "'");
    return v;
  }

  const pt::ptree& tree_;
};

void check_schema(const pt::ptree& tree, std::map<std::string, std::string>& entries) {
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw ValidationError(section, "unknown section");
    if (!body.data().empty()) throw ValidationError(section, "key outside any section");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ValidationError(section + "." + key, "unknown key");
      entries[section + "." + key] = value.data();
    }
  }
}

DiscountModel make_discount(const Reader& in, double horizon) {
  const std::string kind = in.text("discount.kind", "exponential");
  if (kind == "exponential") return DiscountModel::exponential(in.required("discount.rho0"), horizon);
  if (kind == "hyperbolic")
    return DiscountModel::hyperbolic(in.required("discount.alpha"), in.required("discount.beta"),
                                     horizon);
  if (kind == "pseudo_exponential") {
    auto w = in.list("discount.weights");
    auto r = in.list("discount.rates");
    if (!w) throw ValidationError("discount.weights", "missing");
    if (!r) throw ValidationError("discount.rates", "missing");
    return DiscountModel::pseudo_exponential(*w, *r, horizon);
  }
  throw ValidationError("discount.kind",
                        "expected exponential, hyperbolic or pseudo_exponential, got '" + kind + "'");
}

UtilityModel make_utility(const Reader& in) {
  const std::string family = in.text("utility.family", "crra");
  std::optional<UtilityModel> u;
  if (family == "crra") {
    u = UtilityModel::crra(in.required("utility.gamma"));
  } else if (family == "mixed_power") {
    u = UtilityModel::mixed_power(in.required("utility.alpha"), in.required("utility.gamma1"),
                                  in.required("utility.gamma2"));
  } else if (family == "power_mixture") {
    auto w = in.list("utility.weights");
    auto g = in.list("utility.gammas");
    if (!w) throw ValidationError("utility.weights", "missing");
    if (!g) throw ValidationError("utility.gammas", "missing");
    if (w->size() != g->size()) throw ValidationError("utility.gammas", "length differs from weights");
    std::vector<PowerTerm> terms;
    for (std::size_t k = 0; k < w->size(); ++k) terms.push_back({(*w)[k], (*g)[k]});
    u = UtilityModel::power_mixture(std::move(terms));
  } else {
    throw ValidationError("utility.family",
                          "expected crra, mixed_power or power_mixture, got '" + family + "'");
  }
  const auto r1 = in.number("utility.r1");
  const auto r2 = in.number("utility.r2");
  if (r1 || r2) u = u->with_risk_aversion_bounds(r1.value_or(u->r1()), r2.value_or(u->r2()));
  u->validate();
  return *u;
}

void positive(const std::string& key, double v) {
  if (!(v > 0.0)) throw ValidationError(key, "must be > 0");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    std::ostringstream os;
    os << "line " << e.line() << ": " << e.message();
    throw ValidationError("config", os.str());
  }
  std::map<std::string, std::string> entries;
  check_schema(tree, entries);
  const Reader in(tree);

  const double horizon = in.required("market.T");
  MarketModel market(in.required("market.r"), in.required("market.mu"), in.required("market.sigma"),
                     horizon);
  RunConfig cfg{Problem(market, make_discount(in, horizon), make_utility(in)), {}, {}, {}, {}, {},
                std::move(entries)};

  auto& g = cfg.grid;
  g.n_t = in.count("grid.n_t", g.n_t);
  g.n_y = in.count("grid.n_y", g.n_y);
  g.y_min = in.number("grid.y_min");
  g.y_max = in.number("grid.y_max");
  g.x_lo = in.number("grid.x_lo");
  g.x_hi = in.number("grid.x_hi");
  g.pad = in.number("grid.pad");
  if (g.n_t < 3) throw ValidationError("grid.n_t", "must be >= 3");
  if (g.n_y < 9) throw ValidationError("grid.n_y", "must be >= 9");
  if (g.y_min.has_value() != g.y_max.has_value())
    throw ValidationError("grid.y_max", "y_min and y_max must be given together");
  if (g.x_lo.has_value() != g.x_hi.has_value())
    throw ValidationError("grid.x_hi", "x_lo and x_hi must be given together");
  if (g.y_min && g.x_lo) throw ValidationError("grid.x_lo", "give either a y-range or a wealth range");
  if (g.y_min && !(*g.y_min < *g.y_max)) throw ValidationError("grid.y_max", "must exceed y_min");
  if (g.x_lo) {
    positive("grid.x_lo", *g.x_lo);
    if (!(*g.x_lo < *g.x_hi)) throw ValidationError("grid.x_hi", "must exceed x_lo");
  }
  if (g.pad && !(*g.pad >= 0.0)) throw ValidationError("grid.pad", "must be >= 0");

  auto& s = cfg.solver;
  s.tol = in.number("solver.tol", s.tol);
  s.max_iter = in.count("solver.max_iter", s.max_iter);
  s.damping = in.number("solver.damping", s.damping);
  s.kappa = in.number("solver.kappa");
  s.cn_theta = in.number("solver.cn_theta", s.cn_theta);
  s.richardson = in.flag("solver.richardson", s.richardson);
  positive("solver.tol", s.tol);
  if (s.max_iter == 0) throw ValidationError("solver.max_iter", "must be >= 1");
  if (!(s.damping > 0.0 && s.damping <= 1.0)) throw ValidationError("solver.damping", "must lie in (0,1]");
  if (s.kappa && !(*s.kappa >= 0.0)) throw ValidationError("solver.kappa", "must be >= 0");
  if (!(s.cn_theta >= 0.5 && s.cn_theta <= 1.0))
    throw ValidationError("solver.cn_theta", "must lie in [0.5,1]");
  if (s.richardson && g.n_y % 2 == 0)
    throw ValidationError("grid.n_y", "must be odd when solver.richardson is on");

  auto& m = cfg.mc;
  m.n_paths = in.count("mc.n_paths", m.n_paths);
  m.dt = in.number("mc.dt", m.dt);
  m.seed = in.count("mc.seed", m.seed);
  m.antithetic = in.flag("mc.antithetic", m.antithetic);
  m.t0 = in.number("mc.t0", m.t0);
  m.x0 = in.number("mc.x0", m.x0);
  m.export_paths = in.count("mc.export_paths", m.export_paths);
  if (m.n_paths == 0) throw ValidationError("mc.n_paths", "must be >= 1");
  positive("mc.dt", m.dt);
  positive("mc.x0", m.x0);
  if (!(m.t0 >= 0.0 && m.t0 < horizon)) throw ValidationError("mc.t0", "must lie in [0,T)");

  auto& v = cfg.verify;
  v.monte_carlo = in.flag("verify.monte_carlo", v.monte_carlo);
  v.hjb_refine = in.flag("verify.hjb_refine", v.hjb_refine);
  v.wealth = in.list("verify.wealth", v.wealth);
  v.value_paths = in.count("verify.value_paths", v.value_paths);
  v.operator_paths = in.count("verify.operator_paths", v.operator_paths);
  v.identity_paths = in.count("verify.identity_paths", v.identity_paths);
  v.perturbation_paths = in.count("verify.perturbation_paths", v.perturbation_paths);
  v.epsilons = in.list("verify.epsilons", v.epsilons);
  v.identity_dts = in.list("verify.identity_dts", v.identity_dts);
  for (double x : v.wealth) positive("verify.wealth", x);
  for (double e : v.epsilons)
    if (!(e > 0.0 && e <= horizon)) throw ValidationError("verify.epsilons", "must lie in (0,T]");
  for (double d : v.identity_dts) positive("verify.identity_dts", d);

  auto& o = cfg.output;
  o.directory = in.text("output.directory", o.directory);
  o.value_wealth = in.list("output.value_wealth", o.value_wealth);
  o.value_t_stride = in.count("output.value_t_stride", o.value_t_stride);
  for (double x : o.value_wealth) positive("output.value_wealth", x);
  if (o.value_t_stride == 0) throw ValidationError("output.value_t_stride", "must be >= 1");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

Grid RunConfig::make_grid() const {
  double lo = 0.0, hi = 0.0;
  if (grid.y_min) {
    lo = *grid.y_min;
    hi = *grid.y_max;
  } else if (grid.x_lo) {
    const double pad =
        grid.pad.value_or(6.0 * problem.market.theta() * std::sqrt(problem.horizon()));
    lo = std::log(problem.utility.Up(*grid.x_hi)) - pad;
    hi = std::log(problem.utility.Up(*grid.x_lo)) + pad;
  } else {
    const double yc = std::log(problem.utility.Up(mc.x0));
    lo = yc - grid.pad.value_or(8.0);
    hi = yc + grid.pad.value_or(8.0);
  }
  return Grid(problem.horizon(), grid.n_t, lo, hi, grid.n_y);
}

FixedPointOptions RunConfig::fixed_point_options() const {
  FixedPointOptions o;
  o.tol = solver.tol;
  o.max_iter = solver.max_iter;
  o.damping = solver.damping;
  o.kappa = solver.kappa;
  o.pde.theta = solver.cn_theta;
  o.pde.richardson = solver.richardson;
  return o;
}

McOptions RunConfig::mc_options() const {
  McOptions o;
  o.n_paths = mc.n_paths;
  o.dt = mc.dt;
  o.seed = mc.seed;
  o.antithetic = mc.antithetic;
  return o;
}

}  // namespace tcm::cli
