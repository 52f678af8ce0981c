#pragma once

// Independent brute-force reimplementations used as test oracles. These are
// written against the definitions directly (naive per-pixel loops, no shared
// code with the library implementations) and stay deliberately simple.

#include <functional>
#include <vector>

#include "wsseg/grid.hpp"
#include "wsseg/tensor.hpp"

namespace oracle {

double naive_dsc(const wsseg::Mask& pred, const wsseg::Mask& truth);

// Eq-style class weights: background weight N1/N0 counted over a batch.
double naive_background_weight(const std::vector<wsseg::Mask>& batch);

wsseg::WeightMap naive_moi1(const wsseg::Mask& mask, double epsilon);
wsseg::WeightMap naive_moi2(const wsseg::Mask& mask, double epsilon);

// Plain unweighted-positive-term BCE sum (the combined loss without
// confidence weights), normalized by pixel count; same summation order as a
// row-major scan.
double naive_bce(const std::vector<double>& p, const std::vector<double>& y, double w0);

// ---- finite differences ------------------------------------------------------

// Central difference d f / d xs[i] with step h, restoring xs afterwards.
double central_diff(std::vector<double>& xs, size_t i,
                    const std::function<double()>& eval, double h = 1e-5);

// Max-norm relative disagreement between two gradients.
double gradient_rel_error(const std::vector<double>& analytic, const std::vector<double>& fd);

// Gradient of eval() wrt every element of xs.
std::vector<double> fd_gradient(std::vector<double>& xs, const std::function<double()>& eval,
                                double h = 1e-5);

}  // namespace oracle
