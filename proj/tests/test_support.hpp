#pragma once

#include <cmath>
#include <vector>

#include "ckn/extremals.hpp"
#include "ckn/params.hpp"

namespace ckn::testing {

inline const CknParams kStar{5, 2, 1, 2};

inline std::vector<CknParams> suite() {
  return {validate(5, 2, 1, 2), validate(5, 3, 0.5, 2), validate(4, 1.5, 0.5, 1),
          validate(4, 1.25, 0.5, 1.5)};
}

/// (1 + rho)^{-k} with its derivative.
inline RadialProfile power_bump(double k, double shift = 1.0) {
  return custom([k, shift](double r) { return std::pow(shift + r, -k); },
                [k, shift](double r) { return -k * std::pow(shift + r, -k - 1); }, "bump");
}

/// U(rho) * g(log rho) for a Gaussian g centered at log(center): decays like U at both ends.
inline RadialProfile modulated_bubble(const CknParams& P, double center, double width) {
  const BubbleShape U = bubble_shape(P);
  const double c = std::log(center);
  return custom(
      [U, c, width](double r) {
        const double z = (std::log(r) - c) / width;
        return U.value(r) * std::exp(-0.5 * z * z);
      },
      [U, c, width](double r) {
        const double z = (std::log(r) - c) / width;
        const double g = std::exp(-0.5 * z * z);
        return U.deriv(r) * g - U.value(r) * g * z / (width * r);
      },
      "modulated");
}

}  // namespace ckn::testing
