#pragma once

#include "mvlstm/cell.hpp"

namespace mvlstm {

// Gradients mirror the parameter container shape-for-shape; zeros() gives a
// zeroed accumulator and the span helpers iterate both in lockstep.
using ParamGrads = MvLstmParams;

struct BackwardResult {
  double loss = 0.0;
  ParamGrads grads;
};

// Exact reverse-mode gradients of the squared-error loss through the
// attention head and the unrolled recurrence recorded on the tape.
BackwardResult backward(const MvLstmParams& params, const ForwardTape& tape, double target);

// Max relative disagreement between `analytic` and central finite differences
// of the tape-free forward loss. Denominator is max(1, |analytic|, |numeric|).
double fd_max_rel_error(const MvLstmParams& params, const Matrix& window, double target,
                        double epsilon, const ParamGrads& analytic);

// Runs backward, then checks every parameter against finite differences.
double fd_check(const MvLstmParams& params, const Matrix& window, double target,
                double epsilon);

}  // namespace mvlstm
