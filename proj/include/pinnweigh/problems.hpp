#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pinnweigh/grid.hpp"

namespace pinnweigh {

enum class ProblemKind { Conduction, ConvDiff, Cavity };

std::string_view problem_name(ProblemKind kind);
ProblemKind parse_problem(std::string_view name);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Conduction;
  double pe = 0.0;  // cell Peclet number, ConvDiff only
  double re = 0.0;  // Reynolds number, Cavity only

  static ProblemSpec conduction() { return {ProblemKind::Conduction, 0.0, 0.0}; }
  static ProblemSpec convdiff(double pe) { return {ProblemKind::ConvDiff, pe, 0.0}; }
  static ProblemSpec cavity(double re) { return {ProblemKind::Cavity, 0.0, re}; }

  void validate() const;  // throws std::invalid_argument
  /// Number of network outputs: 1 (T) or 3 (u, v, p).
  int field_count() const noexcept { return kind == ProblemKind::Cavity ? 3 : 1; }
};

/// Boundary data on every node (only boundary entries are meaningful).
/// Conflicting corners take the hot-wall / lid value.
struct BoundarySpec {
  Field g;    // temperature Dirichlet data
  Field g_u;  // cavity velocity Dirichlet data
  Field g_v;
  Field g_p;  // pressure Neumann target, identically zero
};

BoundarySpec make_boundary(const ProblemSpec& spec, const Grid& grid);

enum class Component { DE, DBC, NSx, NSy, C, NBC };
std::string_view component_name(Component c);

/// Ordered (component, value) pairs; keys are unique.
class ComponentValues {
 public:
  ComponentValues() = default;
  ComponentValues(std::initializer_list<std::pair<Component, double>> init);

  void set(Component c, double value);
  double at(Component c) const;  // throws std::out_of_range
  bool contains(Component c) const noexcept;
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<std::pair<Component, double>>& entries() const noexcept { return entries_; }
  bool same_keys(const ComponentValues& other) const noexcept;

  friend bool operator==(const ComponentValues&, const ComponentValues&) = default;

 private:
  std::vector<std::pair<Component, double>> entries_;
};

using LossComponents = ComponentValues;

/// Component keys used by each problem, in reporting order.
std::vector<Component> components_for(ProblemKind kind);

enum class Scheme { Equal, NM, NM2 };
std::string_view scheme_name(Scheme s);  // "equal", "nm", "nm2"
Scheme parse_scheme(std::string_view name);

struct WeightVector {
  Scheme scheme = Scheme::Equal;
  ComponentValues lambdas;
};

LossComponents conduction_components(const Field& t, const Grid& g, const BoundarySpec& bc);
LossComponents convdiff_components(const Field& t, const Grid& g, const ProblemSpec& spec,
                                   const BoundarySpec& bc);
LossComponents cavity_components(const Field& u, const Field& v, const Field& p, const Grid& g,
                                 const ProblemSpec& spec, const BoundarySpec& bc);

/// Dimensional-analysis weights. Ratios are anchored on lambda_DBC = 1.
WeightVector compute_weights(const ProblemSpec& spec, Scheme scheme, const Grid& g);

/// sum_i lambda_i * L_i; throws std::invalid_argument if the key sets differ.
double total_loss(const LossComponents& c, const WeightVector& w);

/// Interior residuals of the governing equation(s), for diagnostics and tests.
/// Conduction/ConvDiff: one residual field; Cavity: {NSx, NSy, continuity}.
std::vector<InteriorField> interior_residuals(const std::vector<Field>& fields, const Grid& g,
                                              const ProblemSpec& spec);

/// Loss components together with the exact derivative of every component
/// with respect to every network output field.
struct FieldLoss {
  LossComponents components;
  // field_gradients[c][k] = d L_c / d field_k, in the order of components.entries().
  std::vector<std::vector<Field>> field_gradients;
};

/// fields: {T} or {u, v, p} according to spec.field_count().
FieldLoss evaluate_field_loss(const std::vector<Field>& fields, const Grid& g,
                              const ProblemSpec& spec, const BoundarySpec& bc);

}  // namespace pinnweigh
