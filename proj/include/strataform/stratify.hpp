#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "strataform/exterior.hpp"
#include "strataform/skew.hpp"

namespace strataform {
namespace stratify {

struct IndeterminateRank : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Closed 2-form field with polynomial coefficients on a chart. Closedness is
// verified symbolically at construction.
class FormField {
 public:
  FormField() : form_(Chart::make({"x"}), 2), closed_(true) {}  // empty placeholder field
  explicit FormField(PolyForm form, bool require_closed = true);

  const ChartPtr& chart() const { return form_.chart(); }
  const PolyForm& form() const { return form_; }
  bool closed() const { return closed_; }
  int dim() const { return form_.chart()->dim(); }

  RatMat eval(const RatVec& x) const { return eval_two_form(form_, x); }
  Eigen::MatrixXd eval_d(const Eigen::VectorXd& x) const { return eval_two_form_d(form_, x); }
  // Matrix of coefficient derivatives (d/dx_k omega_ij)(x).
  RatMat eval_derivative(int k, const RatVec& x) const;
  Eigen::MatrixXd eval_derivative_d(int k, const Eigen::VectorXd& x) const;

 private:
  PolyForm form_;
  bool closed_;
};

// Singular-value rank decision with a relative gap criterion: the cut between
// retained and discarded singular values must exceed `gap_factor`.
struct RankDecision {
  int rank = 0;
  int nullity = 0;
  double gap = 0;          // smallest retained / largest discarded
  bool determinate = true;
};

RankDecision numeric_rank(const Eigen::MatrixXd& skew, double gap_factor = 1e6);

enum class NullityMode { Exact, Numeric };

int pointwise_nullity(const FormField& w, const RatVec& x, NullityMode mode = NullityMode::Exact,
                      double gap_factor = 1e6);
RankDecision pointwise_nullity_numeric(const FormField& w, const Eigen::VectorXd& x,
                                       double gap_factor = 1e6);

// Constant closed form with value Q at x0, built from the linear primitive
// alpha_i = -1/2 sum_k Q_ik (x_k - x0_k).
FormField realize_form_at_point(const skew::SkewForm& Q, const RatVec& x0);

struct TransversalityReport {
  int nullity = 0;
  int codim = 0;
  int rank = 0;             // rank of the kernel-pairing derivative
  int rank_corrected = 0;   // same, after an arbitrary connection correction
  bool transversal = false;
};

// Exact transversality of x -> omega_x against the nullity stratum at a
// rational point: defining functions are the kernel pairings v_i^T omega v_j.
TransversalityReport transversality_check(const FormField& w, const RatVec& x);

struct StratumSample {
  Eigen::VectorXd point;
  int nullity = 0;
  Eigen::MatrixXd kernel;  // numerical kernel basis (columns)
  double gap = 0;
  bool indeterminate = false;
};

struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  static Box cube(int dim, double a, double b);
  bool contains(const Eigen::VectorXd& x, double slack = 1e-9) const;
  Eigen::VectorXd sample(std::mt19937_64& rng) const;
};

struct SampleResult {
  std::vector<StratumSample> samples;
  bool shortfall = false;
  std::string notice;
};

// Random multistart + damped Gauss-Newton on the Pfaffian-minor system for
// nullity >= m, filtered by numeric nullity == m.
SampleResult stratum_sample(const FormField& w, int m, const Box& box, int count, unsigned seed,
                            double gap_factor = 1e6);

// Stratum descriptions for Whitney checks: implicit level sets of the
// nullity, or explicitly parametrized submanifolds (oracle inputs).
struct ImplicitStratum {
  const FormField* form;
  int m;
};
struct ExplicitStratum {
  PolyMap embedding;                       // parameter chart -> ambient chart
  Eigen::VectorXd base_param;              // parameters mapping to the base point
  std::vector<Eigen::VectorXd> directions; // parameter-space directions; empty = defaults
};
using StratumDesc = std::variant<ImplicitStratum, ExplicitStratum>;

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* verdict_str(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    default: return "INCONCLUSIVE";
  }
}

struct SequenceRecord {
  std::vector<double> cond_a_gaps;
  std::vector<double> cond_b_gaps;
  double cond_a_limit = 0;  // Richardson-style estimate from the last 3 iterates
  double cond_b_limit = 0;
  bool usable = false;
};

struct WhitneyConfig {
  int sequences = 6;
  int steps = 16;
  double initial_radius = 0.5;
  double tol = 1e-6;
  unsigned seed = 1;
};

struct WhitneyReport {
  std::vector<SequenceRecord> records;
  Verdict condition_a = Verdict::Inconclusive;
  Verdict condition_b = Verdict::Inconclusive;
  bool vacuous = false;  // single-stratum input
};

WhitneyReport whitney_check(const StratumDesc& lower, const StratumDesc& higher,
                            const Eigen::VectorXd& y, const WhitneyConfig& cfg = {});
WhitneyReport whitney_check_single(const StratumDesc& only);

struct StratumCensusEntry {
  int m = 0;
  int count = 0;
  bool admissible = true;
  int expected_dim = 0;          // N - m(m-1)/2
  int measured_local_dim = -1;   // -1: not enough samples
  int transversal_points = 0;
  int checked_points = 0;
  bool frontier_evidence = false;
  int indeterminate_samples = 0;
};

struct NicenessReport {
  std::vector<StratumCensusEntry> strata;
  std::vector<std::string> warnings;
  bool nice = false;
};

NicenessReport niceness_report(const FormField& w, const Box& box, int samples, unsigned seed,
                               double gap_factor = 1e6);

// Pfaffian of the principal submatrix of the coefficient matrix, as a
// polynomial; used to build defining systems for the nullity strata.
Poly pfaffian_minor(const FormField& w, const std::vector<int>& subset);

// All defining polynomials for {nullity >= m}: Pfaffians of principal
// submatrices of size r+2, r = largest even integer <= N - m.
std::vector<Poly> stratum_defining_polys(const FormField& w, int m);

}  // namespace stratify
}  // namespace strataform
