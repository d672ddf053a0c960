#pragma once

// Weight models for complex multiplicative cascades. A model is the joint
// law of a weight vector W in C^b together with a subdivision vector L in
// (0,1)^b, represented either as a finite mixture of deterministic atoms or
// as one of a small catalogue of parametric families. Validation classifies
// a model into the convergence regime its cascade falls under, or rejects
// it with a reason.

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascademf/numeric.hpp"
#include "cascademf/rng.hpp"

#include "json.hpp"

namespace cascademf {

struct Atom {
  double p = 1.0;                // mixture probability
  std::vector<complexd> W;      // length base
  std::vector<double> L;        // length base, entries in (0,1)
};

enum class Family {
  BetaSplit,     // W = (B, 1-B) with B ~ Beta(alpha, beta); L uniform
  UniformPhase,  // W_i = (1 + rho * e^{i theta_i}) / b, theta_i iid uniform
  HeavyLog,      // |W_0| = exp(-V), V ~ scale/v^2 on [scale, inf); W_1 fixed
};

struct GeneratorSpec {
  Family family = Family::BetaSplit;
  double alpha = 2.0;   // BetaSplit
  double beta = 2.0;    // BetaSplit
  double rho = 0.5;     // UniformPhase, in (0,1)
  double scale = 24.0;  // HeavyLog, >= 1
};

struct WeightModel {
  int base = 2;
  std::vector<Atom> atoms;                 // empty when generator is set
  std::optional<GeneratorSpec> generator;  // catalogue family
  std::string label;

  bool atoms_only() const { return !generator.has_value(); }
  bool deterministic() const { return atoms_only() && atoms.size() == 1; }
};

enum class Side { W, L };

// ---- catalogue ----------------------------------------------------------

WeightModel binomial_model(double w0, double w1);            // deterministic
WeightModel monofractal_model();                             // ((1+i)/2,(1-i)/2)
WeightModel critical_model();                                // base-3 mixture
WeightModel beta_split_model(double alpha = 2.0, double beta = 2.0);
WeightModel uniform_phase_model(int base = 2, double rho = 0.5);
WeightModel heavy_log_model(double scale = 24.0);

// Deterministic L vector of a generator family (all catalogue families use
// a fixed uniform subdivision).
std::vector<double> family_subdivision(const GeneratorSpec& g, int base);

// Expected value of 1{W_i != 0} |W_i|^q and of the same weighted by
// log|W_i|, for coordinate i of a generator family. Closed forms where
// available, spectrally accurate quadrature otherwise.
struct CoordMoment {
  double value = 0.0;
  double log_weighted = 0.0;
};
CoordMoment family_coord_moment(const GeneratorSpec& g, int base, int i,
                                double q);
// True when E|W_i|^q diverges (decided analytically per family).
bool family_moment_diverges(const GeneratorSpec& g, int i, double q);

// One joint draw of (W, L) from the model given a per-node stream.
void sample_weights(const WeightModel& model, rng::Stream& stream,
                    std::vector<complexd>& w, std::vector<double>& l);

// ---- scaling function ---------------------------------------------------

// phi_U(q) = -log_b E( sum_i 1{U_i != 0} |U_i|^q ). Returns -infinity when
// the expectation diverges; divergence is decided analytically for the
// catalogue families.
double phi(const WeightModel& model, Side side, double q);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  int samples = 0;
};
// Monte Carlo counterpart of phi (reported with a standard error obtained
// by the delta method on the mean inside the logarithm).
McEstimate phi_mc(const WeightModel& model, Side side, double q, int samples,
                  std::uint64_t seed);

// ---- validation ---------------------------------------------------------

enum class CascadeCase {
  NonConservativeA,
  ConservativeB1,
  CriticalB2,
  Rejected,
};

std::string to_string(CascadeCase c);

struct ValidationReport {
  CascadeCase regime = CascadeCase::Rejected;
  std::map<double, double> phi_checks;     // phi_W at probe orders
  bool has_p_gt1_positive = false;
  double witness_p = 0.0;                  // valid when has_p_gt1_positive
  bool critical_condition = false;
  double gamma_witness = 0.0;              // valid when critical_condition
  std::optional<double> monofractal_exponent;  // H with |W_i| = L_i^H
  bool left_sided = false;
  bool two_nonzero = false;                // P(#{i : W_i != 0} >= 2) = 1
  // P(sum_i W_i != 1) > 0: known yes/no for atoms and catalogue families,
  // unset when undecidable.
  std::optional<bool> sum_not_one_positive;
  std::vector<std::string> messages;

  bool rejected() const { return regime == CascadeCase::Rejected; }
};

ValidationReport validate(const WeightModel& model,
                          std::uint64_t mc_seed = 20240901ull);

// ---- serialization ------------------------------------------------------

nlohmann::ordered_json model_to_json(const WeightModel& model);
WeightModel model_from_json(const nlohmann::json& j);

}  // namespace cascademf
