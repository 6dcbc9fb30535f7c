#pragma once

#include <string>
#include <string_view>

namespace liftcert {

/// Order q of an entrywise l^q norm, q in [1, inf].
class NormOrder {
 public:
  /// Throws std::invalid_argument unless q >= 1 (infinity allowed).
  explicit NormOrder(double q);

  static NormOrder inf();
  /// Accepts "inf", "infinity" or a decimal number >= 1.
  static NormOrder parse(std::string_view text);

  double value() const { return q_; }
  bool is_inf() const;
  /// 1/q, with 1/inf = 0.
  double reciprocal() const;
  std::string str() const;

 private:
  double q_;
};

}  // namespace liftcert
