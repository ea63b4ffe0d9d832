// Copyright 2026 The gaplab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal tour: build rho, sample GAP(rho), compare a reduced state with its
// reference, and run a small canonical-typicality experiment.

#include <cstdio>

#include "gaplab/experiments.hpp"

int main() {
    using namespace gaplab;

    const HilbertDim shape{2, 64};
    const DensityMatrix rho = DensityMatrix::maximally_mixed(shape);

    Stream rng(42, 0);
    const MeasureSpec mu = MeasureSpec::gap(rho);
    const Vector psi = mu.draw(rng);
    const double dev = trace_norm_hermitian(partial_trace_b(psi, shape) - partial_trace_b_matrix(rho));
    std::printf("one draw: ||rho_a^psi - tr_b rho||_tr = %.4f\n", dev);

    CanonicalOptions opt;
    opt.n = 2000;
    const ExperimentRecord rec = run_canonical_typicality(rho, opt, {42, 1});
    const auto& s = rec.summaries.at("deviation");
    std::printf("canonical typicality over %zu draws: median %.4f, q95 %.4f, soundness violations %zu\n", s.n,
                s.median, s.q95, rec.soundness_violations());

    const auto b = bound_value({.tag = BoundTag::ExpEps, .d_a = 2.0, .eps = 0.1, .norm_rho = rho.norm()});
    std::printf("exp-eps bound at eps=0.1: log value %.3g, clamped %.3g\n", b.log_value, b.clamped());
    return 0;
}
