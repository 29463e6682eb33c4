#pragma once

#include <vector>

#include "meshcorr/geodesics.hpp"
#include "meshcorr/model.hpp"
#include "meshcorr/tape.hpp"

namespace meshcorr::losses {

using autodiff::Tape;
using autodiff::Tensor;

struct LossWeights {
  double w_reg = 1.0;
  // Ten times the base ARAP weight of 10.
  double w_arap = 100.0;
  double w_geo = 1.0;
  double lambda_imaging = 1000.0;
};

struct LossBreakdown {
  double reg = 0.0;
  double arap = 0.0;
  double geo = 0.0;
  double imaging = 0.0;
  double total = 0.0;
  Tensor total_node;  // scalar on the tape, for backward
};

// (1/n) * sum_i || X(1)_i - (pi V_Y)_i ||^2   (mm^2)
Tensor registration_loss(Tape& tape, const Tensor& final_frame, const Tensor& pi,
                         const Tensor& vertices_y);

// Sum of one-ring ARAP energies over consecutive frame pairs, starting at
// (V_X, X(t_1)). Optimal per-vertex rotations come from a 3x3 SVD on the
// current values and are constants to the backward pass.
Tensor arap_loss(Tape& tape, const corrnet::MeshGraph& graph, const Tensor& vertices_x,
                 const corrnet::InterpolationSequence& sequence);

// Mean over sampled (i, j) of ((pi D_Y pi^T)_ij - D_X_ij)^2, evaluated
// row-wise so the full n x n product is never materialised.
Tensor geodesic_loss(Tape& tape, const Tensor& pi, const geodesics::GeodesicTable& d_x,
                     const geodesics::GeodesicTable& d_y,
                     const std::vector<std::pair<uint32_t, uint32_t>>& pairs);

// Mean squared error over all entries of (pi Y_patches - X_patches); the
// lambda_imaging factor is applied by total_loss.
Tensor imaging_loss(Tape& tape, const Tensor& pi, const Tensor& patches_x,
                    const Tensor& patches_y);

// Weighted sum on the tape. Pass a null imaging term when the imaging-loss
// extension is disabled; it then contributes exactly zero.
LossBreakdown total_loss(Tape& tape, const Tensor& reg, const Tensor& arap, const Tensor& geo,
                         const Tensor* imaging, const LossWeights& weights);

}  // namespace meshcorr::losses
