#include "cli.hpp"

#include "report.hpp"

#include "CLI11.hpp"

#include "apm/error.hpp"
#include "apm/model.hpp"
#include "apm/moments.hpp"
#include "apm/parallel.hpp"
#include "apm/prime_sums.hpp"
#include "apm/sieve.hpp"
#include "apm/simd/kernels.hpp"
#include "apm/stats.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace apm::cli {

namespace {

struct Options {
  std::optional<std::uint64_t> mod;
  std::optional<std::uint64_t> res;
  std::string limit;
  std::string fn = "omega";
  std::string fn2;
  std::string ext;
  std::optional<std::uint64_t> p0;
  std::optional<unsigned> u;
  std::string checkpoints;
  std::uint64_t seed = 1;
  std::string trials = "1e5";
  std::string mode;
  std::string format;  // json, or text for sieve
  std::string out;
  unsigned workers = default_workers();
  std::string spill;
  std::string b = "1.5,2,3";
  std::string bofn;
  double eps = 0.1;
  std::string norm = "sqrtmean";
  std::string series = "p2";
  std::string pair_class = "V";
  std::vector<std::string> overrides;
  bool deterministic = false;
};

// Report body in both shapes; emit picks one.
struct Output {
  Json json = Json::object();
  std::optional<Table> table;
  std::string text;  // used verbatim when set (sieve listings)
};

double parse_real(const std::string& s, const char* what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + ": not a number: '" + s + "'");
  }
  return v;
}

// Accepts 1000000, 1e6 and 10^6.
double parse_magnitude(const std::string& s, const char* what) {
  if (auto caret = s.find('^'); caret != std::string::npos) {
    return std::pow(parse_real(s.substr(0, caret), what), parse_real(s.substr(caret + 1), what));
  }
  return parse_real(s, what);
}

std::uint64_t parse_count(const std::string& s, const char* what) {
  const double v = parse_magnitude(s, what);
  if (v < 0 || v > 9007199254740992.0 || v != std::floor(v)) {
    throw std::invalid_argument(std::string(what) + " must be a non-negative integer, got '" + s +
                                "'");
  }
  return static_cast<std::uint64_t>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_reals(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_real(item, what));
  return out;
}

class Context {
 public:
  Context(const Options& o, std::string command)
      : o_(o), command_(std::move(command)), fn_(parse_function(o.fn)) {
    sieve_.workers = std::max(1u, o.workers);
    apply(fn_, o.fn2.empty());
    if (o.mod) {
      prog_ = Progression(*o.mod, o.res.value_or(*o.mod == 1 ? 0 : 1));
    } else if (o.res) {
      throw std::invalid_argument("--res needs --mod");
    } else if (fn_.domain) {
      prog_ = *fn_.domain;
    }
    if (!o.fn2.empty()) {
      fn2_ = parse_function(o.fn2);
      apply(*fn2_, true);
      if (!o.mod && !fn_.domain && fn2_->domain) prog_ = *fn2_->domain;
    }
  }

  const Options& opt() const { return o_; }
  const std::string& command() const { return command_; }
  const Progression& prog() const { return prog_; }
  const SieveConfig& sieve() const { return sieve_; }
  const BuiltinFunction& fn() const { return fn_; }
  const std::optional<BuiltinFunction>& fn2() const { return fn2_; }

  std::uint64_t limit(const char* what = "--n") const {
    if (o_.limit.empty()) throw std::invalid_argument(std::string(what) + " is required");
    return parse_count(o_.limit, what);
  }

  double real_limit() const {
    if (o_.limit.empty()) throw std::invalid_argument("--x is required");
    return parse_magnitude(o_.limit, "--x");
  }

  std::uint64_t trials() const { return parse_count(o_.trials, "--trials"); }

  unsigned order(unsigned fallback) const { return o_.u.value_or(fallback); }

  std::vector<std::uint64_t> checkpoints(std::vector<std::uint64_t> fallback) const {
    if (!o_.checkpoints.empty()) {
      std::vector<std::uint64_t> out;
      for (const auto& s : split(o_.checkpoints, ',')) out.push_back(parse_count(s, "--checkpoints"));
      return out;
    }
    if (!o_.limit.empty()) return {limit("--x")};
    return fallback;
  }

  // Echo of every resolved setting.
  Json config() const {
    Json c;
    c["command"] = command_;
    c["mod"] = prog_.modulus();
    c["res"] = prog_.residue();
    c["limit"] = o_.limit.empty() ? Json(nullptr) : Json(o_.limit);
    c["fn"] = describe(fn_);
    c["fn2"] = fn2_ ? Json(describe(*fn2_)) : Json(nullptr);
    c["u"] = o_.u ? Json(*o_.u) : Json(nullptr);
    c["checkpoints"] = o_.checkpoints;
    c["seed"] = o_.seed;
    c["trials"] = trials();
    c["mode"] = o_.mode;
    c["class"] = o_.pair_class;
    c["b"] = o_.b;
    c["bofn"] = o_.bofn;
    c["eps"] = num(o_.eps);
    c["norm"] = o_.norm;
    c["series"] = o_.series;
    c["format"] = o_.format.empty() ? (command_ == "sieve" ? "text" : "json") : o_.format;
    c["workers"] = sieve_.workers;
    c["isa"] = std::string(simd::isa_name(simd::kernels().isa));
    return c;
  }

 private:
  void apply(BuiltinFunction& f, bool takes_overrides) const {
    if (!o_.ext.empty()) f.fn.ext.mode = parse_extension(o_.ext);
    if (o_.p0) f.fn.spec = f.fn.spec.with_start_prime(*o_.p0);
    if (!takes_overrides) return;
    for (const auto& item : o_.overrides) {
      // p^a=value
      const auto eq = item.find('=');
      const auto caret = item.find('^');
      if (eq == std::string::npos || caret == std::string::npos || caret > eq) {
        throw std::invalid_argument("--override expects p^a=value, got '" + item + "'");
      }
      const auto p = parse_count(item.substr(0, caret), "--override prime");
      const auto a = parse_count(item.substr(caret + 1, eq - caret - 1), "--override exponent");
      f.fn.ext = f.fn.ext.with_override(p, static_cast<unsigned>(a),
                                        parse_real(item.substr(eq + 1), "--override value"));
    }
  }

  static std::string describe(const BuiltinFunction& f) {
    std::string s = f.name;
    s += " [f(p)=" + f.fn.spec.describe() + ", p0=" + std::to_string(f.fn.spec.start_prime()) +
         ", ext=" + to_string(f.fn.ext.mode);
    for (const auto& [key, value] : f.fn.ext.overrides) {
      s += ", f(" + std::to_string(key.first) + "^" + std::to_string(key.second) +
           ")=" + format_number(value);
    }
    return s + "]";
  }

  const Options& o_;
  std::string command_;
  Progression prog_;
  SieveConfig sieve_;
  BuiltinFunction fn_;
  std::optional<BuiltinFunction> fn2_;
};

std::string cell(double x) { return format_number(x); }
std::string cell(std::uint64_t x) { return std::to_string(x); }

const std::vector<std::string> kSumColumns{"x",       "k",    "l",    "u",    "exact_sum",
                                           "main_term", "err1", "err2", "case", "verdict"};

std::string decay_label(const PrimeFunctionSpec& spec, unsigned u, Json* detail = nullptr) {
  try {
    const auto c = classify_decay(spec, u);
    if (detail) {
      (*detail)["case"] = to_string(c.which);
      (*detail)["sign"] = c.sign;
      (*detail)["constant"] = num(c.constant);
    }
    return to_string(c.which);
  } catch (const InconclusiveError& e) {
    if (detail) {
      (*detail)["case"] = "inconclusive";
      (*detail)["reason"] = e.what();
    }
    return "inconclusive";
  }
}

std::optional<AsymptoticEstimate> try_quadrature(const PrimeFunctionSpec& spec, unsigned u,
                                                 double x, std::uint64_t k) {
  if (!spec.has_continuous_form() || x <= static_cast<double>(spec.start_prime())) {
    return std::nullopt;
  }
  return integral_asymptotic(spec, u, x, k);
}

void write_values(const std::string& path, std::span<const double> values) {
  std::string body;
  body.reserve(values.size() * 8);
  char buf[32];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    body += buf;
  }
  write_atomically(path, body);
}

Output cmd_sieve(const Context& c) {
  const auto limit = c.limit("--limit");
  const auto range = c.opt().mod ? primes_in_progression(limit, c.prog(), c.sieve())
                                 : sieve_primes(limit, c.sieve());
  Output o;
  o.json["limit"] = limit;
  o.json["k"] = c.prog().modulus();
  o.json["l"] = c.prog().residue();
  o.json["count"] = range.primes.size();
  o.json["primes"] = range.primes;
  for (auto p : range.primes) o.text += std::to_string(p) + "\n";
  Table t({"prime"});
  for (auto p : range.primes) t.add({cell(p)});
  o.table = std::move(t);
  return o;
}

Output cmd_sum(const Context& c) {
  const auto& spec = c.fn().fn.spec;
  const unsigned u = c.order(1);
  const auto cps = c.checkpoints({});
  if (cps.empty()) throw std::invalid_argument("--x or --checkpoints is required");
  const auto selection = c.opt().mode == "density" ? PrimeSelection::Density
                                                   : PrimeSelection::Restricted;
  const auto sums = prime_power_sums_at(spec, u, cps, c.prog(), c.sieve(), selection);
  const std::string label = decay_label(spec, u);
  std::string verdict;
  if (sums.size() >= 3) {
    std::vector<double> values;
    for (const auto& s : sums) values.push_back(s.value);
    verdict = to_string(judge_increments(cps, values, {}));
  }
  Output o;
  Table t(kSumColumns);
  Json rows = Json::array();
  for (const auto& s : sums) {
    const auto a = try_quadrature(spec, u, static_cast<double>(s.x), c.prog().modulus());
    Json r;
    r["x"] = s.x;
    r["exact_sum"] = num(s.value);
    r["term_count"] = s.term_count;
    r["main_term"] = a ? num(a->main_term) : Json(nullptr);
    r["err1"] = a ? num(a->error_magnitude_1) : Json(nullptr);
    r["err2"] = a ? num(a->error_magnitude_2) : Json(nullptr);
    rows.push_back(r);
    t.add({cell(s.x), cell(c.prog().modulus()), cell(c.prog().residue()), cell(std::uint64_t{u}),
           cell(s.value), a ? cell(a->main_term) : "", a ? cell(a->error_magnitude_1) : "",
           a ? cell(a->error_magnitude_2) : "", label, verdict});
  }
  o.json["k"] = c.prog().modulus();
  o.json["l"] = c.prog().residue();
  o.json["u"] = u;
  o.json["selection"] = selection == PrimeSelection::Density ? "density" : "restricted";
  o.json["case"] = label;
  o.json["rows"] = rows;
  o.json["verdict"] = verdict.empty() ? Json(nullptr) : Json(verdict);
  o.table = std::move(t);
  return o;
}

Output cmd_asymptotic(const Context& c) {
  const auto& spec = c.fn().fn.spec;
  const unsigned u = c.order(1);
  std::vector<double> xs;
  if (!c.opt().checkpoints.empty()) {
    for (const auto& s : split(c.opt().checkpoints, ',')) xs.push_back(parse_magnitude(s, "--checkpoints"));
  } else {
    xs.push_back(c.real_limit());
  }
  const auto k = c.prog().modulus();
  const std::string label = decay_label(spec, u);
  Output o;
  Table t(kSumColumns);
  Json rows = Json::array();
  for (double x : xs) {
    const auto q = integral_asymptotic(spec, u, x, k);
    Json r;
    r["x"] = num(x);
    r["main_term"] = num(q.main_term);
    r["err1"] = num(q.error_magnitude_1);
    r["err2"] = num(q.error_magnitude_2);
    try {
      const auto f = closed_form_asymptotic(spec, u, x, k);
      r["closed_form"] = {{"formula", to_string(f.formula_tag)},
                          {"main_term", num(f.main_term)},
                          {"leading_term", num(f.leading_term)}};
    } catch (const NoClosedFormError&) {
      r["closed_form"] = nullptr;
    }
    rows.push_back(r);
    t.add({cell(x), cell(k), cell(c.prog().residue()), cell(std::uint64_t{u}), "",
           cell(q.main_term), cell(q.error_magnitude_1), cell(q.error_magnitude_2), label, ""});
  }
  o.json["k"] = k;
  o.json["u"] = u;
  o.json["phi_k"] = euler_phi(k);
  o.json["case"] = label;
  o.json["rows"] = rows;
  o.table = std::move(t);
  return o;
}

Output cmd_classify(const Context& c) {
  const unsigned u = c.order(1);
  Output o;
  const std::string label = decay_label(c.fn().fn.spec, u, &o.json);
  o.json["u"] = u;
  Table t(kSumColumns);
  t.add({"", cell(c.prog().modulus()), cell(c.prog().residue()), cell(std::uint64_t{u}), "", "", "",
         "", label, ""});
  o.table = std::move(t);
  return o;
}

Output cmd_probe(const Context& c) {
  const unsigned u = c.order(1);
  const auto cps = c.checkpoints({1000, 10000, 100000, 1000000, 10000000, 100000000});
  ConvergenceProbe p;
  const bool divergence = c.opt().series == "divergence";
  if (divergence) {
    p = divergence_probe(c.fn().fn.spec, u, cps);
  } else {
    const auto series = parse_series(c.opt().series);
    std::optional<PrimeFunctionSpec> custom;
    if (series == Series::Custom) custom = c.fn().fn.spec;
    p = convergence_probe(series, c.prog(), cps, custom, u, {}, c.sieve());
  }
  Output o;
  o.json["series"] = c.opt().series;
  o.json["k"] = c.prog().modulus();
  o.json["l"] = c.prog().residue();
  o.json["u"] = u;
  o.json["checkpoints"] = p.checkpoints;
  o.json[divergence ? "integrals" : "partial_sums"] = nums(p.partial_sums);
  o.json["decay_exponent"] = num(p.decay_exponent);
  o.json["verdict"] = to_string(p.verdict);
  o.json["tail_bound"] = p.tail_bound ? num(*p.tail_bound) : Json(nullptr);
  Table t(kSumColumns);
  for (std::size_t i = 0; i < p.checkpoints.size(); ++i) {
    const std::string v = cell(p.partial_sums[i]);
    t.add({cell(p.checkpoints[i]), cell(c.prog().modulus()), cell(c.prog().residue()),
           cell(std::uint64_t{u}), divergence ? "" : v, divergence ? v : "", "", "", "",
           to_string(p.verdict)});
  }
  o.table = std::move(t);
  return o;
}

Json predictions_json(const Predictions& p) {
  return {{"restricted_sum", nums(p.restricted_sum)}, {"density_sum", nums(p.density_sum)}};
}

Output cmd_moments(const Context& c) {
  const auto n = c.limit();
  const unsigned umax = c.order(kDefaultUmax);
  const auto& f = c.fn().fn;
  std::vector<double> values;
  const auto s = empirical_moments(f, c.prog(), n, umax, c.sieve(), [&](std::span<const double> b) {
    values.insert(values.end(), b.begin(), b.end());
  });
  const auto b = parse_reals(c.opt().b, "--b");
  const auto cheb = chebyshev_check(s, values, b);
  const auto pred = predictions(f.spec, c.prog(), n, umax, c.sieve());
  if (!c.opt().spill.empty()) write_values(c.opt().spill, values);

  Output o;
  o.json["n"] = n;
  o.json["k"] = c.prog().modulus();
  o.json["l"] = c.prog().residue();
  o.json["count"] = s.count;
  o.json["mean"] = num(s.mean);
  o.json["sigma"] = num(s.sigma);
  o.json["mu"] = nums(s.central_moments);
  o.json["predictions"] = predictions_json(pred);
  Json cov = Json::array();
  for (std::size_t i = 0; i < cheb.b_values.size(); ++i) {
    cov.push_back({{"b", num(cheb.b_values[i])},
                   {"coverage", num(cheb.coverage[i])},
                   {"bound", num(cheb.bound[i])}});
  }
  o.json["coverage"] = cov;
  o.json["degenerate"] = cheb.degenerate;
  o.json["mean_via_counts"] = f.ext.strongly_additive()
                                  ? num(mean_via_counts(f.spec, f.ext, c.prog(), n, c.sieve()))
                                  : Json(nullptr);
  if (!c.opt().bofn.empty()) {
    const std::vector<std::uint64_t> ns{n};
    const auto rec = lln_check(f, c.prog(), ns, parse_b_of_n(c.opt().bofn), c.sieve()).front();
    o.json["lln"] = {{"b_of_n", c.opt().bofn},
                     {"b", num(rec.b)},
                     {"bound", num(rec.bound)},
                     {"coverage_sigma", num(rec.coverage_sigma)},
                     {"coverage_sqrt_mean",
                      rec.coverage_turan ? num(*rec.coverage_turan) : Json(nullptr)}};
  }
  if (!c.opt().spill.empty()) o.json["spill"] = c.opt().spill;

  Table t({"n", "k", "l", "count", "mean", "sigma", "u", "mu", "restricted_sum", "density_sum"});
  for (unsigned u = 2; u <= umax; ++u) {
    t.add({cell(n), cell(c.prog().modulus()), cell(c.prog().residue()), cell(s.count),
           cell(s.mean), cell(s.sigma), cell(std::uint64_t{u}), cell(s.central_moments[u]),
           cell(pred.restricted_sum[u]), cell(pred.density_sum[u])});
  }
  o.table = std::move(t);
  return o;
}

std::vector<ModelMode> modes(const Context& c, bool allow_both) {
  const auto& m = c.opt().mode;
  if (m.empty() || m == "both") {
    if (allow_both) return {ModelMode::Restricted, ModelMode::Density};
    return {ModelMode::Restricted};
  }
  return {parse_model_mode(m)};
}

Output cmd_model_exact(const Context& c) {
  const auto n = c.limit();
  const unsigned umax = c.order(kDefaultUmax);
  Output o;
  Table t({"mode", "u", "kappa", "mu", "paper_approx", "gap_bound"});
  Json all = Json::array();
  for (auto mode : modes(c, true)) {
    const auto m = exact_moments(c.fn().fn.spec, c.prog(), n, umax, mode, c.sieve());
    all.push_back({{"mode", to_string(mode)},
                   {"term_count", m.term_count},
                   {"kappa", nums(m.kappa)},
                   {"mu", nums(m.mu)},
                   {"paper_approx", nums(m.paper_approx)},
                   {"gap_bound", nums(m.gap_bound)}});
    for (unsigned u = 1; u <= umax; ++u) {
      t.add({to_string(mode), cell(std::uint64_t{u}), cell(m.kappa[u]), cell(m.mu[u]),
             cell(m.paper_approx[u]), cell(m.gap_bound[u])});
    }
  }
  o.json["n"] = n;
  o.json["k"] = c.prog().modulus();
  o.json["l"] = c.prog().residue();
  if (all.size() == 1) {
    for (auto& [key, value] : all.front().items()) o.json[key] = value;
  } else {
    o.json["mode"] = "both";
    o.json["models"] = all;
  }
  o.table = std::move(t);
  return o;
}

Output cmd_model_sample(const Context& c) {
  const auto n = c.limit();
  const auto mode = modes(c, false).front();
  const auto& spec = c.fn().fn.spec;
  const auto s = sample(spec, c.prog(), n, c.trials(), c.opt().seed, mode, c.sieve());
  const auto m = exact_moments(spec, c.prog(), n, 2, mode, c.sieve());
  MomentAccumulator acc(2);
  acc.add(s.values);
  const double t_count = static_cast<double>(s.trials);
  Output o;
  o.json["n"] = n;
  o.json["k"] = c.prog().modulus();
  o.json["l"] = c.prog().residue();
  o.json["mode"] = to_string(mode);
  o.json["seed"] = s.seed;
  o.json["trials"] = s.trials;
  o.json["sample_mean"] = num(acc.mean());
  o.json["sample_variance"] = num(acc.central_moment(2));
  o.json["kappa"] = nums(m.kappa);
  const bool spread = m.kappa[2] > 0.0;
  o.json["z"] = spread ? num((acc.mean() - m.kappa[1]) / std::sqrt(m.kappa[2] / t_count))
                       : Json(nullptr);
  o.json["ks"] = spread ? num(ks_distance(s.values, m.kappa[1], std::sqrt(m.kappa[2])))
                        : Json(nullptr);
  if (!c.opt().spill.empty()) {
    write_values(c.opt().spill, s.values);
    o.json["spill"] = c.opt().spill;
  }
  Table t({"trial", "value"});
  for (std::size_t i = 0; i < s.values.size(); ++i) t.add({cell(std::uint64_t{i}), cell(s.values[i])});
  o.table = std::move(t);
  return o;
}

Output cmd_model_lindeberg(const Context& c) {
  const auto n = c.limit();
  const auto mode = modes(c, false).front();
  const auto r = lindeberg_check(c.fn().fn.spec, c.prog(), n, c.opt().eps, mode, c.sieve());
  Output o;
  o.json["n"] = n;
  o.json["k"] = c.prog().modulus();
  o.json["l"] = c.prog().residue();
  o.json["mode"] = to_string(mode);
  o.json["epsilon"] = num(r.epsilon);
  o.json["variance"] = num(r.variance);
  o.json["tail_ratio"] = num(r.tail_ratio);
  o.json["max_abs_f"] = num(r.max_abs_f);
  o.json["corollary"] = num(r.corollary);
  o.json["term_count"] = r.term_count;
  Table t({"n", "k", "l", "epsilon", "variance", "tail_ratio", "max_abs_f", "corollary"});
  t.add({cell(n), cell(c.prog().modulus()), cell(c.prog().residue()), cell(r.epsilon),
         cell(r.variance), cell(r.tail_ratio), cell(r.max_abs_f), cell(r.corollary)});
  o.table = std::move(t);
  return o;
}

Json summary_json(const MomentSummary& s) {
  return {{"count", s.count}, {"mean", num(s.mean)}, {"sigma", num(s.sigma)},
          {"mu", nums(s.central_moments)}};
}

Output cmd_compare(const Context& c) {
  if (!c.fn2()) throw std::invalid_argument("compare needs --fn (f*) and --fn2 (f)");
  const auto n = c.limit();
  const unsigned umax = c.order(4);
  FunctionClass cls;
  if (c.opt().pair_class == "H") {
    cls = FunctionClass::H;
  } else if (c.opt().pair_class == "V") {
    cls = FunctionClass::V;
  } else {
    throw std::invalid_argument("--class must be H or V");
  }
  const FunctionPair pair{c.fn().fn, c.fn2()->fn, cls};
  const auto r = compare_pair(pair, c.prog(), n, umax, c.sieve());
  Output o;
  o.json["n"] = n;
  o.json["k"] = c.prog().modulus();
  o.json["l"] = c.prog().residue();
  o.json["class"] = c.opt().pair_class;
  o.json["f_star"] = summary_json(r.f_star);
  o.json["f"] = summary_json(r.f);
  o.json["difference"] = summary_json(r.difference);
  o.json["mean_difference"] = num(r.f.mean - r.f_star.mean);
  o.json["mu_difference"] = nums(r.mu_difference);
  o.json["predictions"] = {{"f_star", predictions_json(r.f_star_predictions)},
                           {"f", predictions_json(r.f_predictions)}};
  o.json["override_contribution"] =
      r.override_contribution ? num(*r.override_contribution) : Json(nullptr);
  Table t({"u", "mu_f_star", "mu_f", "mu_difference", "restricted_sum_f_star",
           "density_sum_f_star", "restricted_sum_f", "density_sum_f"});
  for (unsigned u = 1; u <= umax; ++u) {
    t.add({cell(std::uint64_t{u}), cell(r.f_star.central_moments[u]),
           cell(r.f.central_moments[u]), cell(r.mu_difference[u]),
           cell(r.f_star_predictions.restricted_sum[u]), cell(r.f_star_predictions.density_sum[u]),
           cell(r.f_predictions.restricted_sum[u]), cell(r.f_predictions.density_sum[u])});
  }
  o.table = std::move(t);
  return o;
}

Output cmd_ektest(const Context& c) {
  const auto n = c.limit();
  const auto norm = parse_normalization(c.opt().norm);
  std::vector<double> values;
  const auto r = erdos_kac_report(c.fn().fn, c.prog(), n, norm, c.sieve(),
                                  c.opt().spill.empty() ? nullptr : &values);
  if (!c.opt().spill.empty()) write_values(c.opt().spill, values);
  Output o;
  o.json["ks"] = num(r.ks);
  o.json["n"] = n;
  o.json["k"] = c.prog().modulus();
  o.json["l"] = c.prog().residue();
  o.json["normalization"] = to_string(norm);
  o.json["center"] = num(r.center);
  o.json["scale"] = num(r.scale);
  o.json["sample_size"] = r.sample_size;
  Json grid = Json::array();
  Table t({"x", "F_emp", "Phi", "|diff|"});
  for (const auto& p : r.grid) {
    grid.push_back({{"x", num(p.x)}, {"F_emp", num(p.empirical)}, {"Phi", num(p.phi)}});
    t.add({cell(p.x), cell(p.empirical), cell(p.phi), cell(std::abs(p.empirical - p.phi))});
  }
  o.json["grid"] = grid;
  o.table = std::move(t);
  return o;
}

std::string render(const Context& c, Output& body, double seconds) {
  const std::string fmt =
      c.opt().format.empty() ? (c.command() == "sieve" ? "text" : "json") : c.opt().format;
  if (fmt == "text") {
    if (c.command() != "sieve") throw std::invalid_argument("--format text is only for sieve");
    return body.text;
  }
  Json report;
  report["tool"] = "apm";
  report["version"] = APM_VERSION;
  report["command"] = c.command();
  report["config"] = c.config();
  if (fmt == "csv") {
    std::vector<std::string> pre{"apm " + std::string(APM_VERSION) + " " + c.command(),
                                 "config " + report["config"].dump()};
    if (!c.opt().deterministic) pre.push_back("duration_seconds " + format_number(seconds));
    return body.table->to_csv(pre);
  }
  for (auto& [key, value] : body.json.items()) report[key] = value;
  if (!c.opt().deterministic) report["duration_seconds"] = num(seconds);
  return report.dump(2) + "\n";
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Additive functions over arithmetic progressions: prime sums, moments, "
               "the independent model and normality checks.",
               "apm"};
  app.set_config("--config", "", "flat key=value file; command-line flags win");
  app.add_option("--mod", o.mod, "progression modulus k");
  app.add_option("--res", o.res, "progression residue l (default 1, or 0 when k = 1)");
  app.add_option("--n,--x,--limit", o.limit, "limit n / x (accepts 1e8 and 10^8)");
  app.add_option("--fn", o.fn, "function: omega|Omega|omega1|half_omega|const:C|one|invloglog|"
                               "invlog|sqrtloglog|oneminusinvp|oneminusinvlog|scaled:C:F|"
                               "table:p=v,...[,default=v]")
      ->capture_default_str();
  app.add_option("--fn2", o.fn2, "second function (compare)");
  app.add_option("--ext", o.ext, "extension to prime powers: strong|complete");
  app.add_option("--override", o.overrides, "prime-power override p^a=value (repeatable)");
  app.add_option("--p0", o.p0, "start prime");
  app.add_option("--u,--umax", o.u, "order u (sum, asymptotic) or highest order (moments)");
  app.add_option("--checkpoints", o.checkpoints, "comma-separated limits");
  app.add_option("--seed", o.seed, "random seed")->capture_default_str();
  app.add_option("--trials", o.trials, "Monte Carlo trials")->capture_default_str();
  app.add_option("--mode", o.mode, "restricted|density|both");
  app.add_option("--format", o.format, "json|csv|text (default json; text for sieve)")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  app.add_option("--out", o.out, "output file (written atomically); default stdout");
  app.add_option("--workers", o.workers, "worker threads")->capture_default_str();
  app.add_option("--spill", o.spill, "write raw values to this file");
  app.add_option("--b", o.b, "Chebyshev b values")->capture_default_str();
  app.add_option("--bofn", o.bofn, "b(n) for the law of large numbers: loglog_cbrt|loglog_sqrt|loglog");
  app.add_option("--eps", o.eps, "Lindeberg epsilon")->capture_default_str();
  app.add_option("--norm", o.norm, "sigma|sqrtmean")->capture_default_str();
  app.add_option("--series", o.series, "p2|plog2p|plogp|custom|divergence")
      ->capture_default_str();
  app.add_option("--class", o.pair_class, "H|V")->capture_default_str();
  app.add_flag("--deterministic,--no-timing", o.deterministic,
               "omit wall-clock duration so reruns are byte-identical");

  std::string command;
  auto sub = [&](const char* name, const char* help, CLI::App* parent = nullptr) {
    auto* s = (parent ? parent : &app)->add_subcommand(name, help);
    s->fallthrough();
    s->callback([&command, s, parent] {
      command = parent ? parent->get_name() + " " + s->get_name() : s->get_name();
    });
    return s;
  };
  sub("sieve", "list primes up to --limit");
  sub("sum", "exact prime sums");
  sub("asymptotic", "integral and closed-form estimates");
  sub("classify", "decay case of f");
  sub("probe", "convergence / divergence probes");
  sub("moments", "empirical moments over a progression");
  auto* model = app.add_subcommand("model", "the independent model");
  model->fallthrough();
  model->require_subcommand(1);
  sub("exact", "exact cumulants and central moments", model);
  sub("sample", "Monte Carlo realizations", model);
  sub("lindeberg", "Lindeberg tail ratio", model);
  sub("compare", "compare a function pair", model);
  sub("ektest", "normality of f(m) against the standard normal");
  sub("compare", "compare a function pair");
  app.require_subcommand(1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n"
        << app.get_formatter()->make_help(&app, "apm", CLI::AppFormatMode::Normal);
    return kUsageError;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    Context c(o, command);
    Output body;
    if (command == "sieve") {
      body = cmd_sieve(c);
    } else if (command == "sum") {
      body = cmd_sum(c);
    } else if (command == "asymptotic") {
      body = cmd_asymptotic(c);
    } else if (command == "classify") {
      body = cmd_classify(c);
    } else if (command == "probe") {
      body = cmd_probe(c);
    } else if (command == "moments") {
      body = cmd_moments(c);
    } else if (command == "model exact") {
      body = cmd_model_exact(c);
    } else if (command == "model sample") {
      body = cmd_model_sample(c);
    } else if (command == "model lindeberg") {
      body = cmd_model_lindeberg(c);
    } else if (command == "model compare" || command == "compare") {
      body = cmd_compare(c);
    } else if (command == "ektest") {
      body = cmd_ektest(c);
    } else {
      throw std::invalid_argument("unknown command '" + command + "'");
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto text = render(c, body, seconds);
    if (o.out.empty()) {
      out << text;
    } else {
      write_atomically(o.out, text);
    }
    return kOk;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n(run with --help for the flag synopsis)\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kComputationError;
  }
}

}  // namespace apm::cli
