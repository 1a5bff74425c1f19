#pragma once

#include "sirbal/error.hpp"

#include <cmath>
#include <string>

namespace sirbal {

/// QoS utility phi applied to SIR/target ratios, with its inverse g.
///
/// Two families are supported: phi(x) = log(x), and phi(x) = -1/x^n for
/// an integer n >= 1. Both are strictly increasing on the positive reals and
/// have a log-convex inverse. For NegPow the QoS values live in (-inf, 0).
class UtilitySpec {
 public:
  enum class Kind { Log, NegPow };

  static UtilitySpec log() { return UtilitySpec(Kind::Log, 0); }
  static UtilitySpec neg_pow(int n) {
    if (n < 1) throw DomainError("negpow exponent must be >= 1, got " + std::to_string(n));
    return UtilitySpec(Kind::NegPow, n);
  }

  Kind kind() const noexcept { return kind_; }
  int exponent() const noexcept { return n_; }

  std::string name() const {
    return kind_ == Kind::Log ? std::string("log") : "negpow:" + std::to_string(n_);
  }

  /// True if x lies in the codomain of phi (the QoS interval).
  bool in_qos_domain(double x) const noexcept {
    return kind_ == Kind::Log ? std::isfinite(x) : (x < 0.0 && std::isfinite(x));
  }

  double phi(double x) const {
    require_positive(x, "phi");
    if (kind_ == Kind::Log) return std::log(x);
    return -std::pow(x, -n_);
  }

  double dphi(double x) const {
    require_positive(x, "phi'");
    if (kind_ == Kind::Log) return 1.0 / x;
    return n_ * std::pow(x, -n_ - 1);
  }

  /// g = phi^{-1}.
  double g(double q) const {
    require_qos(q, "g");
    if (kind_ == Kind::Log) return std::exp(q);
    return std::pow(-q, -1.0 / n_);
  }

  double dg(double q) const {
    require_qos(q, "g'");
    if (kind_ == Kind::Log) return std::exp(q);
    return std::pow(-q, -1.0 / n_ - 1.0) / n_;
  }

  /// g'(q)/g(q); positive on the QoS interval.
  double dlog_g(double q) const {
    require_qos(q, "g'/g");
    if (kind_ == Kind::Log) return 1.0;
    return -1.0 / (n_ * q);
  }

  /// psi(x) = -phi(1/x).
  double psi(double x) const {
    require_positive(x, "psi");
    if (kind_ == Kind::Log) return std::log(x);
    return std::pow(x, n_);
  }

  double dpsi(double x) const {
    require_positive(x, "psi'");
    if (kind_ == Kind::Log) return 1.0 / x;
    return n_ * std::pow(x, n_ - 1);
  }

  bool operator==(const UtilitySpec&) const = default;

 private:
  UtilitySpec(Kind kind, int n) : kind_(kind), n_(n) {}

  static void require_positive(double x, const char* fn) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw DomainError(std::string(fn) + " requires a positive finite argument");
  }

  void require_qos(double q, const char* fn) const {
    if (!in_qos_domain(q))
      throw DomainError(std::string(fn) + " argument outside the QoS interval of " + name());
  }

  Kind kind_;
  int n_;
};

/// Parses "log" or "negpow:<n>".
inline UtilitySpec parse_utility(const std::string& text) {
  if (text == "log") return UtilitySpec::log();
  const std::string prefix = "negpow:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string digits = text.substr(prefix.size());
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw DomainError("bad negpow exponent in '" + text + "'");
    return UtilitySpec::neg_pow(std::stoi(digits));
  }
  throw DomainError("unknown utility '" + text + "' (expected log or negpow:<n>)");
}

}  // namespace sirbal
