#pragma once

#include "carsel/types.hpp"

namespace carsel {

// Local false discovery rates for one score vector, on z = |score|:
//   * null component: half-normal, scale fitted by truncated maximum
//     likelihood on the central 75% of z;
//   * eta0: observed mass below the truncation point over the null CDF
//     mass there, clipped to [0, 1];
//   * mixture density: Grenander (monotone non-increasing) estimate;
//   * fdr(z) = min(1, eta0 * f0(z) / f(z)), then forced non-increasing
//     in z.
// Needs d >= 50; below that the mixture fit is unreliable and callers
// should use select_top_k instead.
SelectionResult local_fdr(const ScoreVector& scores);

// Markers with local fdr below the cutoff (default 0.5).
SelectionResult select(const ScoreVector& scores, double cutoff = 0.5);

// Fixed-size selection: top k by |score|, ties to the lower marker index.
SelectionResult select_top_k(const ScoreVector& scores, int k);

}  // namespace carsel
