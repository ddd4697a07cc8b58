#pragma once

#include <string>

#include "grf/common.hpp"

namespace grf {

// Norm convention for mixed-degree forms.
//
// The component storage always uses increasing multi-indices with the
// orthonormal-monomial (1/k!) inner product; `normalized` applies the
// weighted-sum formulas (k-1)/k and 1/k directly to those norms. `full_sum`
// reproduces unnormalized full index contractions: |H_k|^2 picks up k!, the
// contraction H^2 picks up (k-1)!, and the degree-(k-1) codifferential terms
// pick up (k-1)!. Which convention makes the coupled flow identities close is
// decided at run time by the scalar-evolution adjudication check; every
// artifact records the tag it was produced under.
enum class FormNorm { normalized, full_sum };

inline const char* to_string(FormNorm c) {
  return c == FormNorm::normalized ? "normalized" : "full-sum";
}

inline FormNorm form_norm_from_string(const std::string& s) {
  if (s == "normalized") return FormNorm::normalized;
  if (s == "full-sum" || s == "full_sum") return FormNorm::full_sum;
  throw config_error("unknown form norm convention: " + s);
}

namespace conv {

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// weight of |H_k|^2 (increasing-index norm) inside the H^2 contraction
inline double h2_weight(FormNorm c, int k) {
  return c == FormNorm::normalized ? 1.0 : factorial(k - 1);
}
// weight of |H_k|^2 in the scalar-curvature sum
inline double scalar_weight(FormNorm c, int k) {
  return c == FormNorm::normalized ? 1.0 / k : factorial(k - 1);
}
// weight of |H_k|^2 in the dilaton-flow drive
inline double dilaton_weight(FormNorm c, int k) {
  return c == FormNorm::normalized ? static_cast<double>(k - 1) / k
                                   : static_cast<double>(k - 1) * factorial(k - 1);
}
// weight of the squared degree-(k-1) form part of the mixed Ricci tensor
inline double form_part_weight(FormNorm c, int k) {
  return c == FormNorm::normalized ? 1.0 : factorial(k - 1);
}

}  // namespace conv
}  // namespace grf
