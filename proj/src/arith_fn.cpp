#include "apm/arith_fn.hpp"

#include "apm/error.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace apm {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("bad number '" + s + "' in " + context);
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s, const std::string& context) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad integer '" + s + "' in " + context);
  }
  return v;
}

bool is_prime_small(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::uint64_t next_prime(std::uint64_t n) {
  while (!is_prime_small(n)) ++n;
  return n;
}

}  // namespace

std::uint64_t PrimeFunctionSpec::minimum_start(PrimeKind kind) noexcept {
  switch (kind) {
    case PrimeKind::InvLogLog:
      return 11;
    case PrimeKind::InvLog:
    case PrimeKind::SqrtLogLog:
      return 3;
    default:
      return 2;
  }
}

PrimeFunctionSpec PrimeFunctionSpec::constant(double c, std::uint64_t p0) {
  return PrimeFunctionSpec(PrimeKind::Constant, c, 2).with_start_prime(p0);
}
PrimeFunctionSpec PrimeFunctionSpec::indicator(std::uint64_t p0) {
  return PrimeFunctionSpec(PrimeKind::Indicator, 1.0, 2).with_start_prime(p0);
}
PrimeFunctionSpec PrimeFunctionSpec::inv_loglog(std::uint64_t p0) {
  return PrimeFunctionSpec(PrimeKind::InvLogLog, 1.0, 11).with_start_prime(p0);
}
PrimeFunctionSpec PrimeFunctionSpec::inv_log(std::uint64_t p0) {
  return PrimeFunctionSpec(PrimeKind::InvLog, 1.0, 3).with_start_prime(p0);
}
PrimeFunctionSpec PrimeFunctionSpec::sqrt_loglog(std::uint64_t p0) {
  return PrimeFunctionSpec(PrimeKind::SqrtLogLog, 1.0, 3).with_start_prime(p0);
}
PrimeFunctionSpec PrimeFunctionSpec::one_minus_inv_p(std::uint64_t p0) {
  return PrimeFunctionSpec(PrimeKind::OneMinusInvP, 1.0, 2).with_start_prime(p0);
}
PrimeFunctionSpec PrimeFunctionSpec::one_minus_inv_log(std::uint64_t p0) {
  return PrimeFunctionSpec(PrimeKind::OneMinusInvLog, 1.0, 2).with_start_prime(p0);
}

PrimeFunctionSpec PrimeFunctionSpec::scaled(const PrimeFunctionSpec& inner, double factor) {
  if (!std::isfinite(factor)) throw std::invalid_argument("scale factor must be finite");
  PrimeFunctionSpec s(PrimeKind::Scaled, factor, inner.p0_);
  s.inner_ = std::make_shared<const PrimeFunctionSpec>(inner);
  return s;
}

PrimeFunctionSpec PrimeFunctionSpec::tabulated(std::map<std::uint64_t, double> table,
                                               std::optional<double> fallback, std::uint64_t p0) {
  PrimeFunctionSpec s(PrimeKind::Tabulated, 1.0, 2);
  for (const auto& [p, v] : table) {
    if (!is_prime_small(p)) {
      throw std::invalid_argument("tabulated key " + std::to_string(p) + " is not prime");
    }
    if (!std::isfinite(v)) throw std::invalid_argument("tabulated values must be finite");
  }
  s.table_ = std::move(table);
  s.fallback_ = fallback;
  return s.with_start_prime(p0);
}

PrimeFunctionSpec PrimeFunctionSpec::with_start_prime(std::uint64_t p0) const {
  PrimeFunctionSpec s = *this;
  if (kind_ == PrimeKind::Scaled) {
    s.inner_ = std::make_shared<const PrimeFunctionSpec>(inner_->with_start_prime(p0));
  } else if (p0 < minimum_start(kind_)) {
    throw std::invalid_argument("start prime " + std::to_string(p0) + " is below the minimum " +
                                std::to_string(minimum_start(kind_)) + " for " + describe());
  }
  s.p0_ = p0;
  return s;
}

double PrimeFunctionSpec::raw(double t) const {
  switch (kind_) {
    case PrimeKind::Constant:
      return param_;
    case PrimeKind::Indicator:
      return 1.0;
    case PrimeKind::InvLogLog:
      return 1.0 / std::log(std::log(t));
    case PrimeKind::InvLog:
      return 1.0 / std::log(t);
    case PrimeKind::SqrtLogLog:
      return std::sqrt(std::log(std::log(t)));
    case PrimeKind::OneMinusInvP:
      return 1.0 - 1.0 / t;
    case PrimeKind::OneMinusInvLog:
      return 1.0 - 1.0 / std::log(t);
    case PrimeKind::Scaled:
      return param_ * inner_->raw(t);
    case PrimeKind::Tabulated:
      break;
  }
  throw std::invalid_argument("tabulated prime function has no continuous form");
}

double PrimeFunctionSpec::at(std::uint64_t p) const {
  if (p < p0_) return 0.0;
  if (kind_ == PrimeKind::Tabulated) {
    if (auto it = table_.find(p); it != table_.end()) return it->second;
    if (fallback_) return *fallback_;
    throw LookupError("tabulated prime function has no value for p = " + std::to_string(p));
  }
  if (kind_ == PrimeKind::Scaled) return param_ * inner_->at(p);
  return raw(static_cast<double>(p));
}

double eval_at_prime(const PrimeFunctionSpec& spec, std::uint64_t p) { return spec.at(p); }

bool PrimeFunctionSpec::has_continuous_form() const noexcept {
  if (kind_ == PrimeKind::Scaled) return inner_->has_continuous_form();
  return kind_ != PrimeKind::Tabulated;
}

double PrimeFunctionSpec::continuous(double t) const {
  if (!has_continuous_form()) {
    throw std::invalid_argument("tabulated prime function has no continuous form");
  }
  return t < static_cast<double>(p0_) ? 0.0 : raw(t);
}

double PrimeFunctionSpec::derivative(double t) const {
  const double lt = std::log(t);
  switch (kind_) {
    case PrimeKind::Constant:
    case PrimeKind::Indicator:
      return 0.0;
    case PrimeKind::InvLogLog: {
      const double y = std::log(lt);
      return -1.0 / (t * lt * y * y);
    }
    case PrimeKind::InvLog:
      return -1.0 / (t * lt * lt);
    case PrimeKind::SqrtLogLog:
      return 1.0 / (2.0 * t * lt * std::sqrt(std::log(lt)));
    case PrimeKind::OneMinusInvP:
      return 1.0 / (t * t);
    case PrimeKind::OneMinusInvLog:
      return 1.0 / (t * lt * lt);
    case PrimeKind::Scaled:
      return param_ * inner_->derivative(t);
    case PrimeKind::Tabulated:
      break;
  }
  throw std::invalid_argument("tabulated prime function has no continuous form");
}

double PrimeFunctionSpec::sup_abs() const {
  const std::uint64_t first = next_prime(p0_);
  switch (kind_) {
    case PrimeKind::Constant:
      return std::fabs(param_);
    case PrimeKind::Indicator:
      return 1.0;
    case PrimeKind::InvLogLog:
    case PrimeKind::InvLog:
      return std::fabs(at(first));  // decreasing
    case PrimeKind::SqrtLogLog:
      return std::numeric_limits<double>::infinity();
    case PrimeKind::OneMinusInvP:
    case PrimeKind::OneMinusInvLog:
      return std::max(std::fabs(at(first)), 1.0);  // increasing towards 1
    case PrimeKind::Scaled:
      return std::fabs(param_) * inner_->sup_abs();
    case PrimeKind::Tabulated: {
      double m = fallback_ ? std::fabs(*fallback_) : 0.0;
      for (const auto& [p, v] : table_) {
        if (p >= p0_) m = std::max(m, std::fabs(v));
      }
      return m;
    }
  }
  return 0.0;
}

bool PrimeFunctionSpec::may_be_negative() const {
  switch (kind_) {
    case PrimeKind::Constant:
      return param_ < 0.0;
    case PrimeKind::OneMinusInvLog:
      return p0_ < 3;  // 1 - 1/ln 2 < 0
    case PrimeKind::Scaled:
      return param_ < 0.0 ? true : inner_->may_be_negative();
    case PrimeKind::Tabulated: {
      if (fallback_ && *fallback_ < 0.0) return true;
      for (const auto& [p, v] : table_) {
        if (v < 0.0) return true;
      }
      return false;
    }
    default:
      return false;
  }
}

std::string PrimeFunctionSpec::describe() const {
  switch (kind_) {
    case PrimeKind::Constant:
      return "const:" + format_double(param_);
    case PrimeKind::Indicator:
      return "one";
    case PrimeKind::InvLogLog:
      return "invloglog";
    case PrimeKind::InvLog:
      return "invlog";
    case PrimeKind::SqrtLogLog:
      return "sqrtloglog";
    case PrimeKind::OneMinusInvP:
      return "oneminusinvp";
    case PrimeKind::OneMinusInvLog:
      return "oneminusinvlog";
    case PrimeKind::Scaled:
      return "scaled:" + format_double(param_) + ":" + inner_->describe();
    case PrimeKind::Tabulated: {
      std::string s = "table:";
      bool first = true;
      for (const auto& [p, v] : table_) {
        if (!first) s += ',';
        first = false;
        s += std::to_string(p) + "=" + format_double(v);
      }
      if (fallback_) s += std::string(first ? "" : ",") + "default=" + format_double(*fallback_);
      return s;
    }
  }
  return "?";
}

bool operator==(const PrimeFunctionSpec& a, const PrimeFunctionSpec& b) {
  if (a.kind_ != b.kind_ || a.param_ != b.param_ || a.p0_ != b.p0_) return false;
  if (a.kind_ == PrimeKind::Scaled) return *a.inner_ == *b.inner_;
  if (a.kind_ == PrimeKind::Tabulated) return a.table_ == b.table_ && a.fallback_ == b.fallback_;
  return true;
}

AdditiveExtension AdditiveExtension::with_override(std::uint64_t p, unsigned a,
                                                   double value) const {
  if (a == 0) throw std::invalid_argument("override exponent must be >= 1");
  if (!is_prime_small(p)) {
    throw std::invalid_argument("override base " + std::to_string(p) + " is not prime");
  }
  AdditiveExtension e = *this;
  e.overrides[{p, a}] = value;
  return e;
}

double AdditiveFunction::at_prime_power(std::uint64_t p, unsigned a) const {
  if (!ext.overrides.empty()) {
    if (auto it = ext.overrides.find({p, a}); it != ext.overrides.end()) return it->second;
  }
  return ext.base_value(spec.at(p), a);
}

double eval_additive(const PrimeFunctionSpec& spec, const AdditiveExtension& ext,
                     std::span<const PrimePower> factorization) {
  const AdditiveFunction fn{spec, ext};
  double v = 0.0;
  for (const auto& pp : factorization) v += fn.at_prime_power(pp.prime, pp.exponent);
  return v;
}

AdditiveEvaluator::AdditiveEvaluator(AdditiveFunction fn,
                                     const std::vector<std::uint64_t>& base_primes)
    : fn_(std::move(fn)) {
  base_values_.reserve(base_primes.size());
  for (std::uint64_t p : base_primes) base_values_.push_back(fn_.spec.at(p));
}

void AdditiveEvaluator::evaluate(const SpfBlock& block, std::vector<double>& out) const {
  const std::size_t n = block.size();
  out.resize(n);
  const auto& base = block.base_primes();
  const bool plain = fn_.ext.overrides.empty();
  const bool strong = fn_.ext.mode == ExtensionMode::Strong;
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    const std::size_t c = block.factor_count(i);
    for (std::size_t j = 0; j < c; ++j) {
      const std::uint32_t bi = block.factor_index(i, j);
      const unsigned a = block.factor_exponent(i, j);
      if (plain) {
        v += strong ? base_values_[bi] : a * base_values_[bi];
      } else {
        v += fn_.at_prime_power(base[bi], a);
      }
    }
    if (const std::uint64_t r = block.cofactor(i); r > 1) {
      v += plain ? fn_.spec.at(r) : fn_.at_prime_power(r, 1);
    }
    out[i] = v;
  }
}

void FunctionPair::validate() const {
  if (declared_class != FunctionClass::H) return;
  if (!(f.spec == f_star.spec)) {
    throw std::invalid_argument("class-H pair requires equal prime values: " + f.spec.describe() +
                                " vs " + f_star.spec.describe());
  }
}

BuiltinFunction builtin(Builtin which, std::optional<Progression> domain) {
  const auto one = PrimeFunctionSpec::indicator();
  switch (which) {
    case Builtin::Omega:
      return {"omega", {one, AdditiveExtension::strong()}, std::nullopt};
    case Builtin::BigOmega:
      return {"Omega", {one, AdditiveExtension::complete()}, std::nullopt};
    case Builtin::Omega1:
      return {"omega1", {one, AdditiveExtension::strong()}, domain.value_or(Progression{4, 1})};
    case Builtin::HalfOmega:
      return {"half_omega",
              {PrimeFunctionSpec::scaled(one, 0.5), AdditiveExtension::strong()},
              std::nullopt};
  }
  throw std::invalid_argument("unknown builtin");
}

BuiltinFunction builtin(const std::string& name, std::optional<Progression> domain) {
  if (name == "omega") return builtin(Builtin::Omega, domain);
  if (name == "Omega" || name == "bigomega") return builtin(Builtin::BigOmega, domain);
  if (name == "omega1") return builtin(Builtin::Omega1, domain);
  if (name == "half_omega") return builtin(Builtin::HalfOmega, domain);
  throw std::invalid_argument("unknown builtin function '" + name + "'");
}

PrimeFunctionSpec parse_prime_function(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  const bool has_arg = colon != std::string::npos;
  auto no_arg = [&](PrimeFunctionSpec s) {
    if (has_arg) throw std::invalid_argument("function '" + head + "' takes no parameter");
    return s;
  };
  if (head == "const") {
    if (!has_arg) throw std::invalid_argument("const requires a value, e.g. const:0.7");
    return PrimeFunctionSpec::constant(parse_double(rest, "const"));
  }
  if (head == "one") return no_arg(PrimeFunctionSpec::indicator());
  if (head == "invloglog") return no_arg(PrimeFunctionSpec::inv_loglog());
  if (head == "invlog") return no_arg(PrimeFunctionSpec::inv_log());
  if (head == "sqrtloglog") return no_arg(PrimeFunctionSpec::sqrt_loglog());
  if (head == "oneminusinvp") return no_arg(PrimeFunctionSpec::one_minus_inv_p());
  if (head == "oneminusinvlog") return no_arg(PrimeFunctionSpec::one_minus_inv_log());
  if (head == "scaled") {
    const auto c2 = rest.find(':');
    if (c2 == std::string::npos) {
      throw std::invalid_argument("scaled requires scaled:<factor>:<inner>");
    }
    return PrimeFunctionSpec::scaled(parse_prime_function(rest.substr(c2 + 1)),
                                     parse_double(rest.substr(0, c2), "scaled"));
  }
  if (head == "table") {
    std::map<std::uint64_t, double> table;
    std::optional<double> fallback;
    std::size_t pos = 0;
    while (pos < rest.size()) {
      auto comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      const std::string item = rest.substr(pos, comma - pos);
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("table entry '" + item + "'");
      const std::string key = item.substr(0, eq);
      const double v = parse_double(item.substr(eq + 1), "table");
      if (key == "default") {
        fallback = v;
      } else {
        table[parse_uint(key, "table")] = v;
      }
      pos = comma + 1;
    }
    return PrimeFunctionSpec::tabulated(std::move(table), fallback);
  }
  throw std::invalid_argument("unknown prime function '" + text + "'");
}

BuiltinFunction parse_function(const std::string& text) {
  if (text == "omega" || text == "Omega" || text == "bigomega" || text == "omega1" ||
      text == "half_omega") {
    return builtin(text);
  }
  return {text, {parse_prime_function(text), AdditiveExtension::strong()}, std::nullopt};
}

ExtensionMode parse_extension(const std::string& text) {
  if (text == "strong") return ExtensionMode::Strong;
  if (text == "complete") return ExtensionMode::Complete;
  throw std::invalid_argument("extension must be strong or complete, got '" + text + "'");
}

std::string to_string(ExtensionMode mode) {
  return mode == ExtensionMode::Strong ? "strong" : "complete";
}

}  // namespace apm
