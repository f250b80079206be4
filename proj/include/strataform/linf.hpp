#pragma once

#include <optional>
#include <string>
#include <vector>

#include "strataform/foliation.hpp"

namespace strataform {
namespace linf {

// Leafwise differential form: a form on the base chart whose indices range
// over the foliation coordinates; coefficients may involve all coordinates.
struct FoliationForm {
  ChartPtr chart;
  std::vector<int> f_coords;
  PolyForm form;  // index sets inside f_coords

  int degree() const { return form.degree(); }
  bool is_zero() const { return form.is_zero(); }
};

FoliationForm foliation_zero(const ChartPtr& chart, const std::vector<int>& f_coords, int degree);
// Leafwise exterior differential: d followed by restriction to leaf indices.
FoliationForm foliation_d(const FoliationForm& a);

// The V-algebra data on the Gotay chart: truncation context, the Poisson
// element P (jet inverse of the Gotay form), and the abelian projection.
struct VData {
  foliation::GotayForm gotay;
  JetCtxPtr ctx;
  JetMVec poisson;  // P, multivector degree 2, shifted degree 1
  int fiber_count = 0;

  const ChartPtr& chart() const { return ctx->chart; }
};

struct NondegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Jet inverse of a 2-form on the given index block: the bivector B with
// matrix (W|_block)^{-1}, zero on all other components. Requires the block
// value at the base point to be nondegenerate (exact determinant).
JetMVec invert_two_form_jet(const JetForm& w, const std::vector<int>& block);

// VData from a Gotay normal form; verifies [P,P] = 0 to the tracked accuracy
// and pins the sign convention by checking l1 = d_F on coordinate functions.
VData build_vdata(const foliation::GotayForm& g, int d_base, int d_fiber);

// Abelian subalgebra: vertical multivectors with fiber-constant coefficients.
bool is_abelian(const VData& V, const JetMVec& a);
// Projection pi: restrict to the zero section, keep the purely vertical part.
JetMVec project_abelian(const VData& V, const JetMVec& a);

// Foliation forms <-> abelian elements (dy^a corresponds to the vertical
// direction dual to the a-th fiber coordinate).
JetMVec to_abelian(const VData& V, const FoliationForm& s);

// k-th higher derived bracket l_k(x_1,...,x_k) = pi[...[[P,x_1],x_2],...,x_k];
// k = 0 gives pi(P). Each nested bracket costs one accuracy order.
JetMVec derived_bracket(const VData& V, const std::vector<JetMVec>& args);
// Same brackets built from an arbitrary ambient element in place of P.
JetMVec derived_bracket_of(const VData& V, const JetMVec& generator,
                           const std::vector<JetMVec>& args);

struct LinfStructure {
  VData vdata;
  // Optional curved term replacing l0 = pi(P); built by curved_augmentation.
  std::optional<JetMVec> curved_l0;

  JetMVec l0() const;
};

LinfStructure make_structure(VData v);

struct VerifyReport {
  bool passed = true;
  bool l1_square_ok = true;
  int checked_arities = 0;
  int first_failure_arity = -1;
  std::string witness;
  bool jacobiator_matches = true;  // assembled defect == derived bracket of [P,P]/2
};

// Generalized Jacobi identities up to arity K_max on random abelian elements,
// each asserted modulo the tracked accuracy; the Jacobi defect is also
// compared against the independent route through [P,P]/2.
VerifyReport linf_verify(const LinfStructure& L, int K_max, int trials, unsigned seed);

// pi(P) = 0 within truncation and l1 = d_F on coordinate generators.
bool strictness_check(const LinfStructure& L);

struct Augmentation {
  FoliationForm eta;    // X contracted into omega_ref, restricted to the leaves
  bool closed = false;  // d_F eta = 0, symbolically
};

// l0^X = (X -| omega_ref)|_F for a coordinate foliation frame F. With
// omega_ref the structure's own form this is identically zero.
Augmentation curved_augmentation(const stratify::FormField& omega_ref,
                                 const std::vector<int>& f_coords, const PolyMVec& X);

struct McResult {
  JetMVec value;
  bool coisotropic_to_order = false;
};

// MC(sigma) = sum_k 1/k! l_k(sigma,...,sigma) truncated at arity K; sigma a
// foliation 1-form.
McResult mc_series(const LinfStructure& L, const JetMVec& sigma, int K);

struct TangentComplexReport {
  int dim_y = 0;
  int m = 0;
  std::vector<int> fiber_dims;   // binomial(m, k), k = 1..m
  int rank_d0 = 0;               // rank of (nabla l0)|_p
  std::vector<int> cohomology;   // H^0, H^1, ..., H^m of the finite model
  bool chi_includes_degree0 = false;
  int chi_fiber = 0;
  int vir_dim = 0;
  std::string convention;
};

// Finite stalk model of the tangent complex at a zero p of the augmentation:
// T_pY -> Lambda^1(R^m) -> ... -> Lambda^m(R^m) with the first arrow the
// exact Jacobian of l0 and zero maps beyond (stalk values carry no canonical
// pointwise differential). chi is the alternating fiber count; the convention
// flag states whether the degree-0 term enters.
TangentComplexReport tangent_complex(const FoliationForm& l0, const RatVec& p, int dim_y, int m,
                                     bool chi_includes_degree0 = false);

}  // namespace linf
}  // namespace strataform
