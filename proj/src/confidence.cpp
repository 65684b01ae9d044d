#include "cryptomate/analysis.hpp"

namespace cryptomate {

// Calibration table. The ordering S0 < S1 < S2 and Possible < Definite is
// what the scheduler relies on; the absolute values are tunable.
double baseConfidence(Strategy s, Certainty c, FindingKind k) {
  if (k == FindingKind::ConstraintViolation) return c == Certainty::Definite ? 0.95 : 0.60;
  switch (s) {
    case Strategy::S0: return 0.50;
    case Strategy::S1: return c == Certainty::Definite ? 0.90 : 0.70;
    case Strategy::S2: return c == Certainty::Definite ? 0.95 : 0.85;
  }
  return 0.0;
}

double bestTypestateConfidence(Strategy s) {
  // S0 never proves anything, so its ceiling is its Possible value.
  return s == Strategy::S0 ? baseConfidence(s, Certainty::Possible, FindingKind::IncompleteLifecycle)
                           : baseConfidence(s, Certainty::Definite, FindingKind::IllegalTransition);
}

}  // namespace cryptomate
