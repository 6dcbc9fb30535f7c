#include "liftcert/norm_order.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace liftcert {

NormOrder::NormOrder(double q) : q_(q) {
  if (std::isnan(q) || q < 1.0) {
    throw std::invalid_argument("norm order must lie in [1, inf], got " + std::to_string(q));
  }
}

NormOrder NormOrder::inf() { return NormOrder(std::numeric_limits<double>::infinity()); }

NormOrder NormOrder::parse(std::string_view text) {
  if (text == "inf" || text == "infinity" || text == "Inf") return inf();
  double q = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), q);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("cannot parse norm order '" + std::string(text) + "'");
  }
  return NormOrder(q);
}

bool NormOrder::is_inf() const { return std::isinf(q_); }

double NormOrder::reciprocal() const { return is_inf() ? 0.0 : 1.0 / q_; }

std::string NormOrder::str() const {
  if (is_inf()) return "inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, q_);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace liftcert
