#pragma once

// Binary classification metrics with degraded (label 1) as the positive class.

#include <cstddef>
#include <span>

#include "phmprep/core/error.hpp"

namespace phmprep {

/// Exact rate num / den. Rates sharing a denominator add exactly in integers.
struct Rate {
  std::size_t num = 0;
  std::size_t den = 1;

  double value() const noexcept { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
};

struct Confusion {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + tn + fp + fn; }
};

/// accuracy, false_healthy (FN / total) and false_degraded (FP / total) share
/// the denominator `total`, so their numerators always sum to it.
struct EvalReport {
  Confusion confusion;
  Rate accuracy;
  Rate false_healthy;
  Rate false_degraded;
  Rate recall;     // TP / (TP + FN); 0 when there are no degraded rows
  Rate precision;  // TP / (TP + FP); 0 when nothing is predicted degraded
  double f1 = 0.0;

  bool identity_holds() const noexcept {
    return accuracy.den == false_healthy.den && accuracy.den == false_degraded.den &&
           accuracy.num + false_healthy.num + false_degraded.num == accuracy.den;
  }
};

inline EvalReport report_from_confusion(const Confusion& c) {
  EvalReport r;
  r.confusion = c;
  const std::size_t n = c.total();
  r.accuracy = {c.tp + c.tn, n};
  r.false_healthy = {c.fn, n};
  r.false_degraded = {c.fp, n};
  r.recall = c.tp + c.fn == 0 ? Rate{0, 1} : Rate{c.tp, c.tp + c.fn};
  r.precision = c.tp + c.fp == 0 ? Rate{0, 1} : Rate{c.tp, c.tp + c.fp};
  const std::size_t f1_den = 2 * c.tp + c.fp + c.fn;
  r.f1 = f1_den == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(f1_den);
  return r;
}

inline EvalReport evaluate(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw Error(Errc::LengthMismatch, "prediction and truth lengths differ");
  if (truth.empty()) throw Error(Errc::EmptyInput, "evaluate on an empty set");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] != 0, t = truth[i] != 0;
    if (p && t) ++c.tp;
    else if (!p && !t) ++c.tn;
    else if (p) ++c.fp;
    else ++c.fn;
  }
  return report_from_confusion(c);
}

}  // namespace phmprep
