#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace hopfmargin {

/// Model and control parameters, in nomenclature order.
enum class Param : std::size_t {
  p_star,
  q_star,
  omega0,
  V0,
  K_P,
  K_Q,
  omega_pc,
  omega_qc,
  omega_b,
  K_VC_P,
  K_VC_I,
  K_CC_F,
  K_CC_P,
  K_CC_I,
  K_VC_F,
  R_f,
  C_f,
  L_f,
  v_gD,
  v_gQ,
  R,
  X,
};

inline constexpr std::size_t kParamCount = 22;

constexpr std::size_t index(Param p) { return static_cast<std::size_t>(p); }

/// How a parameter is displayed in reports. Values are always stored in p.u.
enum class DisplayUnit { PerUnit, Percent, RadPerSecond };

struct ParamInfo {
  Param id;
  std::string_view name;
  DisplayUnit unit;
  bool controllable;
};

const std::array<ParamInfo, kParamCount>& param_table();
const ParamInfo& info(Param p);
std::string_view name(Param p);
std::optional<Param> param_from_name(std::string_view name);

/// Converts a p.u. value (or a difference of values) into display units.
double to_display(Param p, double value);
double from_display(Param p, double value);
std::string_view unit_label(Param p);

template <class T>
using ParamArray = std::array<T, kParamCount>;

class ParameterSet {
 public:
  /// Nominal operating point of the studied inverter.
  static ParameterSet nominal();

  ParameterSet() = default;
  explicit ParameterSet(const ParamArray<double>& values) : values_(values) {}

  double operator[](Param p) const { return values_[index(p)]; }
  double get(Param p) const { return values_[index(p)]; }
  void set(Param p, double value) { values_[index(p)] = value; }
  ParameterSet with(Param p, double value) const {
    ParameterSet copy = *this;
    copy.set(p, value);
    return copy;
  }

  const ParamArray<double>& values() const { return values_; }

  /// Derived line impedance magnitude squared, Z^2 = R^2 + X^2.
  double impedance_squared() const;
  double impedance() const;

  /// Throws Error(InvalidParameter) when a positivity or finiteness invariant fails.
  void validate() const;

  bool operator==(const ParameterSet&) const = default;

 private:
  ParamArray<double> values_{};
};

/// Reads `name = value` lines; '#' starts a comment, blank lines are ignored.
/// Keys not in the nomenclature raise ConfigError. Unlisted keys keep `base` values.
ParameterSet parse_parameter_file(std::istream& in, const ParameterSet& base = ParameterSet::nominal());
void write_parameter_file(std::ostream& out, const ParameterSet& params);

}  // namespace hopfmargin
