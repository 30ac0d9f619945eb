#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aimd_market {

/// Utility families an agent may privately hold.
enum class UtilityKind {
  Quadratic,     ///< -(z - z*)^2 / h + 1.5 h, finite maximum at z*
  SqrtMonotone,  ///< l * sqrt(z), no finite maximum
};

inline std::string_view to_string(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::Quadratic: return "Quadratic";
    case UtilityKind::SqrtMonotone: return "SqrtMonotone";
  }
  return "?";
}

inline UtilityKind utility_kind_from_string(std::string_view name) {
  if (name == "Quadratic") return UtilityKind::Quadratic;
  if (name == "SqrtMonotone") return UtilityKind::SqrtMonotone;
  throw std::invalid_argument("unknown utility kind '" + std::string(name) + "'");
}

/// A private concave utility. Immutable once built; use the factories.
///
/// Only the fields relevant to `kind` are meaningful: `optimum` and
/// `curvature` for Quadratic, `scale` for SqrtMonotone.
struct UtilitySpec {
  UtilityKind kind = UtilityKind::Quadratic;
  std::optional<double> optimum;
  double curvature = 1.0;
  double scale = 1.0;

  static UtilitySpec quadratic(double optimum, double curvature) {
    return UtilitySpec{UtilityKind::Quadratic, optimum, curvature, 1.0};
  }

  static UtilitySpec sqrt_monotone(double scale) {
    return UtilitySpec{UtilityKind::SqrtMonotone, std::nullopt, 1.0, scale};
  }

  friend bool operator==(const UtilitySpec&, const UtilitySpec&) = default;
};

/// Invariant violations of a single spec; empty when well formed.
inline std::vector<std::string> utility_violations(const UtilitySpec& u) {
  std::vector<std::string> out;
  switch (u.kind) {
    case UtilityKind::Quadratic:
      if (!u.optimum) {
        out.emplace_back("Quadratic utility requires an optimum");
      } else if (!(std::isfinite(*u.optimum) && *u.optimum >= 0.0)) {
        out.emplace_back("Quadratic optimum must be finite and nonnegative");
      }
      if (!(std::isfinite(u.curvature) && u.curvature > 0.0)) {
        out.emplace_back("Quadratic curvature must be positive");
      }
      break;
    case UtilityKind::SqrtMonotone:
      if (u.optimum) {
        out.emplace_back("SqrtMonotone utility has no finite optimum");
      }
      if (!(std::isfinite(u.scale) && u.scale > 0.0)) {
        out.emplace_back("SqrtMonotone scale must be positive");
      }
      break;
  }
  return out;
}

namespace detail {

inline void require_nonnegative(double z) {
  if (!(z >= 0.0)) {
    throw std::domain_error("utility evaluated at negative quantity " + std::to_string(z));
  }
}

}  // namespace detail

inline double evaluate(const UtilitySpec& u, double z) {
  detail::require_nonnegative(z);
  switch (u.kind) {
    case UtilityKind::Quadratic: {
      const double d = z - u.optimum.value_or(0.0);
      return -(d * d) / u.curvature + 1.5 * u.curvature;
    }
    case UtilityKind::SqrtMonotone:
      return u.scale * std::sqrt(z);
  }
  return 0.0;
}

/// Marginal utility at z. Returns nullopt where the derivative diverges
/// (SqrtMonotone at z = 0); callers decide how to clamp.
inline std::optional<double> derivative(const UtilitySpec& u, double z) {
  detail::require_nonnegative(z);
  switch (u.kind) {
    case UtilityKind::Quadratic:
      return -2.0 * (z - u.optimum.value_or(0.0)) / u.curvature;
    case UtilityKind::SqrtMonotone:
      if (z == 0.0) return std::nullopt;
      return u.scale / (2.0 * std::sqrt(z));
  }
  return 0.0;
}

inline std::optional<double> argmax(const UtilitySpec& u) {
  return u.kind == UtilityKind::Quadratic ? u.optimum : std::nullopt;
}

/// |analytic derivative - central difference| at z with step h.
inline double check_derivative(const UtilitySpec& u, double z, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const double central = (evaluate(u, z + h) - evaluate(u, z - h)) / (2.0 * h);
  const auto analytic = derivative(u, z);
  if (!analytic) {
    throw std::domain_error("derivative is unbounded at " + std::to_string(z));
  }
  return std::abs(*analytic - central);
}

}  // namespace aimd_market
