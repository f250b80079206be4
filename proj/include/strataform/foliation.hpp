#pragma once

#include <optional>
#include <string>
#include <vector>

#include "strataform/stratify.hpp"

namespace strataform {
namespace foliation {

struct RankJump : std::runtime_error {
  RatVec witness;
  RankJump(const std::string& msg, RatVec w) : std::runtime_error(msg), witness(std::move(w)) {}
};
struct NonPolynomialKernel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Distribution spanned by polynomial vector fields.
struct FrameDistribution {
  ChartPtr chart;
  std::vector<PolyMVec> frame;
  int rank = 0;

  RatMat eval(const RatVec& x) const;  // columns = frame values
};

FrameDistribution constant_frame(const ChartPtr& chart, const RatMat& columns);

// Frame of ker(omega) on a region where the nullity is constant. Verified at
// the box centre and at random rational samples; a nullity mismatch raises
// RankJump. Only constant kernels (in particular coordinate-aligned ones) are
// representable; otherwise NonPolynomialKernel.
FrameDistribution null_distribution(const stratify::FormField& w, const stratify::Box& box,
                                    unsigned seed = 1);

// Involutivity of the frame's span: pairwise brackets stay in the span at
// exact rational sample points (rank comparison).
bool frobenius_check(const FrameDistribution& D, unsigned seed = 1);

struct Polarization {
  stratify::FormField omega;
  FrameDistribution f_frame;  // spans ker omega
  FrameDistribution g_frame;  // complement, omega nondegenerate on it
  RatVec base_point;
  // Coordinate indices when the frames are coordinate-aligned.
  std::optional<std::vector<int>> f_coords;
  std::optional<std::vector<int>> g_coords;
};

// Completes F = ker(omega) to TY = G (+) F. Deterministic: the standard-inner
// -product complement of F at the base point, unless a hint frame is given.
Polarization polarization_complement(const stratify::FormField& w, const FrameDistribution& F,
                                     const RatVec& base_point,
                                     const std::optional<RatMat>& hint = std::nullopt);

struct GotayForm {
  stratify::FormField form;       // on the split chart (x..., p...)
  ChartPtr split_chart;
  std::vector<int> f_coords;      // base indices carrying fiber duals
  int fiber_order = 0;
  RatVec base_point;              // zero-section point (fiber entries zero)
};

// pi^* omega - d theta_G on the split chart, theta_G the fiberwise Liouville
// form written in the polarization-adapted coframe. Requires the F-frame to
// be a coordinate frame (adapted chart).
GotayForm gotay_form(const Polarization& P, int fiber_order);

// Model (Mather-style) tube: a coordinate projection with quadratic tubular
// function on the fiber block. In nested systems the tubular function of a
// deeper tube is taken relative to its parent (only the new fiber
// coordinates enter rho); this is the flat, exactly-checkable realization of
// the compatibility axioms, standing in for Mather's rescaled tubes.
struct TubeSystem {
  ChartPtr total;
  std::vector<int> fibers;      // ambient coordinate indices spanning the tube fibers
  std::vector<int> rho_fibers;  // fiber indices entering rho (defaults to all fibers)
  Rat scale = Rat(1);
  ChartPtr stratum;             // chart of the surviving coordinates (order kept)
  std::vector<int> base;        // ambient indices surviving, ascending

  static TubeSystem model(const ChartPtr& chart, std::vector<int> fiber_indices,
                          const Rat& scale = Rat(1));
  // Tubes for a filtration of fiber sets, deepest last; each tube's rho uses
  // only the fiber coordinates new at its level.
  static std::vector<TubeSystem> nested(const ChartPtr& chart,
                                        const std::vector<std::vector<int>>& filtration);

  PolyMap proj() const;  // total -> stratum
  PolyMap endo() const;  // total -> total with fiber coordinates zeroed
  Poly rho() const;      // scale * sum of squared rho-fiber coordinates
  RatMat dproj() const;  // constant Jacobian of proj()
};

// Mather identities pi_low o pi_high = pi_low and rho_low o pi_high =
// rho_low, symbolically; `lower` is the tube of the deeper stratum.
bool tubes_compatible(const TubeSystem& lower, const TubeSystem& higher);

struct CompatiblePolarization {
  std::vector<RatVec> g_frame;       // on the ambient chart
  std::vector<RatVec> f_frame;       // ker of the higher form (constant)
  bool inclusion_ok = false;         // (pi^*)G_a contains G' cap (pi^*)TM_a
  bool complete = false;             // |F| + |G| spans the ambient chart
  bool omega_nondeg_on_g = false;
  std::optional<RatVec> witness;     // kernel-inclusion failure point
};

// Polarization on the higher stratum from lower data through a model tube:
// G' = (pi^*)G_a (+) (ker omega' + ker dpi), per-frame, with the inclusion
// relation verified exactly at rational sample points.
CompatiblePolarization compatible_polarization(const stratify::FormField& omega_lower,
                                               const RatMat& g_lower,  // columns, stratum chart
                                               const TubeSystem& tube,
                                               const stratify::FormField& omega_higher,
                                               unsigned seed = 1);

struct TubeKernelCheck {
  bool ok = true;
  std::optional<RatVec> witness;
};

// d pi pushes the ambient kernel along the stratum into ker(omega_a):
// at stratum sample points x, d pi (ker omega|_x) inside ker omega_a(pi x).
TubeKernelCheck tube_kernel_check(const TubeSystem& tube, const stratify::FormField& omega_ambient,
                                  const stratify::FormField& omega_stratum, unsigned seed = 1);

struct CutoffSpec {
  Rat inner = Rat(1, 2);
  Rat outer = Rat(1);
};

struct ConnectionResult {
  RatMat basis;                      // kernel-adapted basis columns [K | C]
  std::vector<RatMat> correction;    // correction[k](l,i) = B^l_{ki}, original basis
  std::vector<RatMat> achieved;      // achieved[k](i,j) = (nabla omega)_{kij} at x
  // Residual entries in the adapted basis; i,j always lie in the kernel block.
  struct ResidualEntry {
    int k, i, j;
    Rat value;
    bool k_in_kernel;
  };
  std::vector<ResidualEntry> residual;
  bool flat_at_point = false;  // achieved nabla omega |_x == 0
  CutoffSpec cutoff;
};

// Solves nabla^g omega|_x = (correction terms) exactly for the correction
// tensor; the unreachable part (both form slots in ker omega_x) is returned
// as the obstruction residual, never hidden.
ConnectionResult special_connection(const stratify::FormField& w, const RatVec& x,
                                    const RatMat& metric, const CutoffSpec& cutoff = {});

struct VirtualDimRecord {
  int dim_before = 0;
  int rank_g_before = 0;
  int vd_before = 0;
  int dim_after = 0;
  int rank_count_after = 0;  // rank G + k, the thickened count
  int vd_after = 0;
};

struct StabilizeResult {
  Polarization thickened;
  VirtualDimRecord record;
};

// Presymplectic thickening (Y x R^k, pi_1^* omega) with F (+) R^k and G
// lifted; the virtual-dimension count (dim + k) - (rank G + k) is invariant.
StabilizeResult stabilize(const Polarization& P, int k);

}  // namespace foliation
}  // namespace strataform
