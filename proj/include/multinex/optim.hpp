#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "multinex/nn.hpp"
#include "multinex/tensor.hpp"

namespace multinex::optim {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second moment accumulators, keyed by parameter name, kept in double.
struct AdamState {
    int64_t t = 0;
    std::map<std::string, Tensor64> m, v;
};

// One bias-corrected update. grads must contain exactly the registry's
// parameter names; a missing or unexpected key is an error naming the key.
// Master weights stay float: the update is computed in double and rounded
// back once per parameter element.
void adam_step(nn::ModelParams& params, const std::map<std::string, Tensor64>& grads,
               AdamState& state, double lr, const AdamConfig& cfg = {});

// Cosine decay from lr_start to lr_end over total_iters; iter is clamped to
// [0, total_iters].
double cosine_lr(int iter, int total_iters, double lr_start, double lr_end);

} // namespace multinex::optim
