#pragma once

#include <map>
#include <string>

#include "wtomo/projector.hpp"
#include "wtomo/types.hpp"
#include "wtomo/weights.hpp"

namespace wtomo {

// Desk-scale guard: VΩ and total rows must stay below this before any
// matrix is densified.
inline constexpr int kDensifyCap = 4096;

/// SVD-based Moore-Penrose pseudoinverse, valid for any rank.
/// tolerance < 0 selects sigma_max * max(rows, cols) * eps.
DenseMatrix pinv(const DenseMatrix& m, double tolerance = -1.0);

/// Numerical rank by singular-value thresholding (same default tolerance).
int numerical_rank(const DenseMatrix& m, double tolerance = -1.0);

/// Dense realizations of B (block-diagonal), W (stacked diagonals) and
/// A~ = B * W. Guarded by kDensifyCap.
DenseMatrix densify_B(const BlockSystem& bs);
DenseMatrix densify_W(const WeightField& w);
DenseMatrix densify_weighted(const BlockSystem& bs, const WeightField& w);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

enum class PinvMethod { DirectWeighted, SplitWrong, ProductFormula };
std::string to_string(PinvMethod m);

struct PinvReport {
    PinvMethod method = PinvMethod::DirectWeighted;
    ImageGrid reconstruction;
    double l2_distance_to_ground_truth = -1.0;  // < 0 when no ground truth
    std::map<std::string, int> ranks;
    double condition_number = 0.0;
};

/// x = pinv(A~) p, the correct pseudoinverse of the weighted system.
PinvReport reconstruct_direct_pinv(const BlockSystem& bs, const WeightField& w,
                                   const Sinogram& p,
                                   const ImageGrid* ground_truth = nullptr);

/// x = W^ddagger B^dagger p: tall closed form for W, broad closed form for B.
/// Algebraically wrong (B^dagger B != I); kept to demonstrate the failure.
PinvReport reconstruct_split_pinv(const BlockSystem& bs, const WeightField& w,
                                  const Sinogram& p,
                                  const ImageGrid* ground_truth = nullptr);

/// x = pinv(B^T (B B^T)^-1 B W) * pinv(B W (W^T W)^-1 W^T) * p,
/// the product-formula pseudoinverse evaluated literally. The second factor
/// has rank at most V (rank deficiency of W W^T), making this pathway
/// ill-conditioned.
PinvReport reconstruct_product_formula_pinv(const BlockSystem& bs,
                                            const WeightField& w,
                                            const Sinogram& p,
                                            const ImageGrid* ground_truth = nullptr);

}  // namespace wtomo
