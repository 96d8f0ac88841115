#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dnerv/tensor.hpp"

namespace dnerv {

struct GradCheckResult {
    std::string name;
    double max_rel_err = 0;
    double tolerance = 0;
    bool pass = false;
};

// Compares reverse-mode gradients of a scalar loss against central finite
// differences (h = 1e-5, 64-bit) on up to max_per_leaf sampled entries per
// leaf. Relative error uses max(|analytic|, |numeric|, 1e-6) in the
// denominator so near-zero pairs do not blow up on FD noise.
double check_gradients(const std::function<Tensor<double>()>& loss_fn,
                       const std::vector<Tensor<double>>& leaves, int max_per_leaf, Rng& rng);

// Per-layer checks (tolerance 1e-4) plus the full tiny-preset model
// (tolerance 1e-3), all in 64-bit.
std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed);

bool all_passed(const std::vector<GradCheckResult>& results);

}  // namespace dnerv
