#include "pinnweigh/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pinnweigh {

std::string_view problem_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Conduction:
      return "conduction";
    case ProblemKind::ConvDiff:
      return "convdiff";
    case ProblemKind::Cavity:
      return "cavity";
  }
  return "?";
}

ProblemKind parse_problem(std::string_view name) {
  if (name == "conduction") return ProblemKind::Conduction;
  if (name == "convdiff") return ProblemKind::ConvDiff;
  if (name == "cavity") return ProblemKind::Cavity;
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

void ProblemSpec::validate() const {
  if (kind == ProblemKind::ConvDiff && !(pe > 0.0))
    throw std::invalid_argument("convdiff needs Pe > 0");
  if (kind == ProblemKind::Cavity && !(re > 0.0)) throw std::invalid_argument("cavity needs Re > 0");
}

BoundarySpec make_boundary(const ProblemSpec& spec, const Grid& grid) {
  const int last = grid.n() - 1;
  BoundarySpec bc{Field(grid), Field(grid), Field(grid), Field(grid)};
  switch (spec.kind) {
    case ProblemKind::Conduction:
      for (int i = 0; i <= last; ++i) bc.g(i, last) = 1.0;
      break;
    case ProblemKind::ConvDiff:
      for (int k = 0; k <= last; ++k) {
        bc.g(last, k) = 1.0;
        bc.g(k, last) = 1.0;
      }
      break;
    case ProblemKind::Cavity:
      for (int i = 0; i <= last; ++i) bc.g_u(i, last) = 1.0;
      break;
  }
  return bc;
}

std::string_view component_name(Component c) {
  switch (c) {
    case Component::DE:
      return "L_DE";
    case Component::DBC:
      return "L_DBC";
    case Component::NSx:
      return "L_NSx";
    case Component::NSy:
      return "L_NSy";
    case Component::C:
      return "L_c";
    case Component::NBC:
      return "L_NBC";
  }
  return "?";
}

ComponentValues::ComponentValues(std::initializer_list<std::pair<Component, double>> init) {
  for (const auto& [c, v] : init) set(c, v);
}

void ComponentValues::set(Component c, double value) {
  for (auto& e : entries_)
    if (e.first == c) {
      e.second = value;
      return;
    }
  entries_.emplace_back(c, value);
}

double ComponentValues::at(Component c) const {
  for (const auto& e : entries_)
    if (e.first == c) return e.second;
  throw std::out_of_range("no loss component " + std::string(component_name(c)));
}

bool ComponentValues::contains(Component c) const noexcept {
  return std::any_of(entries_.begin(), entries_.end(), [c](const auto& e) { return e.first == c; });
}

bool ComponentValues::same_keys(const ComponentValues& other) const noexcept {
  if (size() != other.size()) return false;
  return std::all_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return other.contains(e.first); });
}

std::vector<Component> components_for(ProblemKind kind) {
  if (kind == ProblemKind::Cavity)
    return {Component::NSx, Component::NSy, Component::C, Component::DBC, Component::NBC};
  return {Component::DE, Component::DBC};
}

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Equal:
      return "equal";
    case Scheme::NM:
      return "nm";
    case Scheme::NM2:
      return "nm2";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "equal" || name == "0") return Scheme::Equal;
  if (name == "nm") return Scheme::NM;
  if (name == "nm2") return Scheme::NM2;
  throw std::invalid_argument("unknown weighting scheme '" + std::string(name) + "'");
}

namespace {

double mean_square(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return sum / static_cast<double>(v.size());
}

double dirichlet_mse(const Field& f, const Field& target, const Grid& g) {
  double sum = 0.0;
  for (const auto& b : g.boundary()) {
    const double d = f(b.i, b.j) - target(b.i, b.j);
    sum += d * d;
  }
  return sum / static_cast<double>(g.boundary().size());
}

InteriorField convdiff_residual(const Field& t, const Grid& g, double pe) {
  InteriorField r = laplacian_cds(t, g);
  const InteriorField tx = gradient_central(t, g, Axis::X);
  const InteriorField ty = gradient_central(t, g, Axis::Y);
  const double coef = pe / g.h();
  for (const auto& n : g.interior()) r(n.i, n.j) -= coef * (tx(n.i, n.j) + ty(n.i, n.j));
  return r;
}

struct CavityResiduals {
  InteriorField nsx, nsy, cont;
};

CavityResiduals cavity_residuals(const Field& u, const Field& v, const Field& p, const Grid& g,
                                 double re) {
  const InteriorField ux = gradient_central(u, g, Axis::X), uy = gradient_central(u, g, Axis::Y);
  const InteriorField vx = gradient_central(v, g, Axis::X), vy = gradient_central(v, g, Axis::Y);
  const InteriorField px = gradient_central(p, g, Axis::X), py = gradient_central(p, g, Axis::Y);
  const InteriorField lu = laplacian_cds(u, g), lv = laplacian_cds(v, g);
  CavityResiduals r{InteriorField(g.n()), InteriorField(g.n()), InteriorField(g.n())};
  const double nu = 1.0 / re;
  for (const auto& n : g.interior()) {
    const int i = n.i, j = n.j;
    r.nsx(i, j) = u(i, j) * ux(i, j) + v(i, j) * uy(i, j) + px(i, j) - nu * lu(i, j);
    r.nsy(i, j) = u(i, j) * vx(i, j) + v(i, j) * vy(i, j) + py(i, j) - nu * lv(i, j);
    r.cont(i, j) = ux(i, j) + vy(i, j);
  }
  return r;
}

void check_field(const Field& f, const Grid& g, const char* what) {
  if (f.n() != g.n()) throw std::invalid_argument(std::string(what) + ": field/grid size mismatch");
}

// Adjoint of the five-point Laplacian: scatter a * d(lap)/d(f) into out.
void scatter_laplacian(Field& out, int i, int j, double a, double inv_h2) {
  const double s = a * inv_h2;
  out(i + 1, j) += s;
  out(i - 1, j) += s;
  out(i, j + 1) += s;
  out(i, j - 1) += s;
  out(i, j) -= 4.0 * s;
}

}  // namespace

LossComponents conduction_components(const Field& t, const Grid& g, const BoundarySpec& bc) {
  check_field(t, g, "conduction_components");
  return {{Component::DE, mean_square(laplacian_cds(t, g).values())},
          {Component::DBC, dirichlet_mse(t, bc.g, g)}};
}

LossComponents convdiff_components(const Field& t, const Grid& g, const ProblemSpec& spec,
                                   const BoundarySpec& bc) {
  check_field(t, g, "convdiff_components");
  if (spec.kind != ProblemKind::ConvDiff)
    throw std::invalid_argument("convdiff_components: spec is not convdiff");
  return {{Component::DE, mean_square(convdiff_residual(t, g, spec.pe).values())},
          {Component::DBC, dirichlet_mse(t, bc.g, g)}};
}

LossComponents cavity_components(const Field& u, const Field& v, const Field& p, const Grid& g,
                                 const ProblemSpec& spec, const BoundarySpec& bc) {
  check_field(u, g, "cavity_components");
  check_field(v, g, "cavity_components");
  check_field(p, g, "cavity_components");
  if (spec.kind != ProblemKind::Cavity)
    throw std::invalid_argument("cavity_components: spec is not cavity");
  const CavityResiduals r = cavity_residuals(u, v, p, g, spec.re);

  double dbc = 0.0;
  for (const auto& b : g.boundary()) {
    const double du = u(b.i, b.j) - bc.g_u(b.i, b.j);
    const double dv = v(b.i, b.j) - bc.g_v(b.i, b.j);
    dbc += du * du + dv * dv;
  }
  dbc /= static_cast<double>(g.boundary().size());

  const std::vector<double> dpdn = boundary_normal_derivative(p, g);
  double nbc = 0.0;
  for (std::size_t k = 0; k < dpdn.size(); ++k) {
    const auto& node = g.edge_nodes()[k].node;
    const double d = dpdn[k] - bc.g_p(node.i, node.j);
    nbc += d * d;
  }
  nbc /= static_cast<double>(dpdn.size());

  return {{Component::NSx, mean_square(r.nsx.values())},
          {Component::NSy, mean_square(r.nsy.values())},
          {Component::C, mean_square(r.cont.values())},
          {Component::DBC, dbc},
          {Component::NBC, nbc}};
}

WeightVector compute_weights(const ProblemSpec& spec, Scheme scheme, const Grid& g) {
  spec.validate();
  const double h = g.h();
  const double h2 = h * h;
  const double h4 = h2 * h2;
  WeightVector w{scheme, {}};
  switch (spec.kind) {
    case ProblemKind::Conduction: {
      const double de = scheme == Scheme::Equal ? 1.0 : scheme == Scheme::NM ? h2 : h4;
      w.lambdas = {{Component::DE, de}, {Component::DBC, 1.0}};
      break;
    }
    case ProblemKind::ConvDiff: {
      const double pe = spec.pe;
      const double de = scheme == Scheme::Equal ? 1.0
                        : scheme == Scheme::NM  ? h2 / pe
                                                : h4 / (pe * pe);
      w.lambdas = {{Component::DE, de}, {Component::DBC, 1.0}};
      break;
    }
    case ProblemKind::Cavity: {
      const double re = spec.re;
      double ns = 1.0, c = 1.0;
      if (scheme == Scheme::NM) {
        ns = re * h2;
        c = h;
      } else if (scheme == Scheme::NM2) {
        ns = re * re * h4;
        c = h2;
      }
      w.lambdas = {{Component::NSx, ns},
                   {Component::NSy, ns},
                   {Component::C, c},
                   {Component::DBC, 1.0},
                   {Component::NBC, ns}};
      break;
    }
  }
  return w;
}

double total_loss(const LossComponents& c, const WeightVector& w) {
  if (!c.same_keys(w.lambdas))
    throw std::invalid_argument("total_loss: loss components and weights have different keys");
  double sum = 0.0;
  for (const auto& [key, value] : c.entries()) sum += w.lambdas.at(key) * value;
  return sum;
}

std::vector<InteriorField> interior_residuals(const std::vector<Field>& fields, const Grid& g,
                                              const ProblemSpec& spec) {
  if (static_cast<int>(fields.size()) != spec.field_count())
    throw std::invalid_argument("interior_residuals: wrong number of fields");
  switch (spec.kind) {
    case ProblemKind::Conduction:
      return {laplacian_cds(fields[0], g)};
    case ProblemKind::ConvDiff:
      return {convdiff_residual(fields[0], g, spec.pe)};
    case ProblemKind::Cavity: {
      auto r = cavity_residuals(fields[0], fields[1], fields[2], g, spec.re);
      return {std::move(r.nsx), std::move(r.nsy), std::move(r.cont)};
    }
  }
  return {};
}

FieldLoss evaluate_field_loss(const std::vector<Field>& fields, const Grid& g,
                              const ProblemSpec& spec, const BoundarySpec& bc) {
  spec.validate();
  if (static_cast<int>(fields.size()) != spec.field_count())
    throw std::invalid_argument("evaluate_field_loss: wrong number of fields");
  for (const auto& f : fields) check_field(f, g, "evaluate_field_loss");

  const double h = g.h();
  const double inv_h2 = 1.0 / (h * h);
  const double inv_2h = 1.0 / (2.0 * h);
  const double interior_count = static_cast<double>(g.interior().size());
  const double boundary_count = static_cast<double>(g.boundary().size());
  FieldLoss out;

  auto zero_fields = [&] { return std::vector<Field>(fields.size(), Field(g)); };

  if (spec.kind != ProblemKind::Cavity) {
    const Field& t = fields[0];
    const InteriorField r = spec.kind == ProblemKind::Conduction ? laplacian_cds(t, g)
                                                                 : convdiff_residual(t, g, spec.pe);
    std::vector<Field> d_de = zero_fields();
    const double conv = spec.kind == ProblemKind::ConvDiff ? spec.pe / h * inv_2h : 0.0;
    for (const auto& n : g.interior()) {
      const int i = n.i, j = n.j;
      const double a = 2.0 * r(i, j) / interior_count;
      scatter_laplacian(d_de[0], i, j, a, inv_h2);
      if (conv != 0.0) {
        // r -= (Pe/h) * ((t[i+1,j] - t[i-1,j]) + (t[i,j+1] - t[i,j-1])) / (2h)
        d_de[0](i + 1, j) -= a * conv;
        d_de[0](i - 1, j) += a * conv;
        d_de[0](i, j + 1) -= a * conv;
        d_de[0](i, j - 1) += a * conv;
      }
    }
    std::vector<Field> d_dbc = zero_fields();
    for (const auto& b : g.boundary())
      d_dbc[0](b.i, b.j) = 2.0 * (t(b.i, b.j) - bc.g(b.i, b.j)) / boundary_count;

    out.components = spec.kind == ProblemKind::Conduction ? conduction_components(t, g, bc)
                                                          : convdiff_components(t, g, spec, bc);
    out.field_gradients = {std::move(d_de), std::move(d_dbc)};
    return out;
  }

  const Field& u = fields[0];
  const Field& v = fields[1];
  const Field& p = fields[2];
  const CavityResiduals r = cavity_residuals(u, v, p, g, spec.re);
  const double nu = 1.0 / spec.re;

  std::vector<Field> d_nsx = zero_fields(), d_nsy = zero_fields(), d_c = zero_fields();
  for (const auto& n : g.interior()) {
    const int i = n.i, j = n.j;
    const double ux = (u(i + 1, j) - u(i - 1, j)) * inv_2h;
    const double uy = (u(i, j + 1) - u(i, j - 1)) * inv_2h;
    const double vx = (v(i + 1, j) - v(i - 1, j)) * inv_2h;
    const double vy = (v(i, j + 1) - v(i, j - 1)) * inv_2h;

    // x-momentum: u ux + v uy + px - nu lap(u)
    {
      const double a = 2.0 * r.nsx(i, j) / interior_count;
      Field& du = d_nsx[0];
      Field& dv = d_nsx[1];
      Field& dp = d_nsx[2];
      du(i, j) += a * ux;
      dv(i, j) += a * uy;
      du(i + 1, j) += a * u(i, j) * inv_2h;
      du(i - 1, j) -= a * u(i, j) * inv_2h;
      du(i, j + 1) += a * v(i, j) * inv_2h;
      du(i, j - 1) -= a * v(i, j) * inv_2h;
      dp(i + 1, j) += a * inv_2h;
      dp(i - 1, j) -= a * inv_2h;
      scatter_laplacian(du, i, j, -a * nu, inv_h2);
    }
    // y-momentum: u vx + v vy + py - nu lap(v)
    {
      const double a = 2.0 * r.nsy(i, j) / interior_count;
      Field& du = d_nsy[0];
      Field& dv = d_nsy[1];
      Field& dp = d_nsy[2];
      du(i, j) += a * vx;
      dv(i, j) += a * vy;
      dv(i + 1, j) += a * u(i, j) * inv_2h;
      dv(i - 1, j) -= a * u(i, j) * inv_2h;
      dv(i, j + 1) += a * v(i, j) * inv_2h;
      dv(i, j - 1) -= a * v(i, j) * inv_2h;
      dp(i, j + 1) += a * inv_2h;
      dp(i, j - 1) -= a * inv_2h;
      scatter_laplacian(dv, i, j, -a * nu, inv_h2);
    }
    // continuity: ux + vy
    {
      const double a = 2.0 * r.cont(i, j) / interior_count;
      d_c[0](i + 1, j) += a * inv_2h;
      d_c[0](i - 1, j) -= a * inv_2h;
      d_c[1](i, j + 1) += a * inv_2h;
      d_c[1](i, j - 1) -= a * inv_2h;
    }
  }

  std::vector<Field> d_dbc = zero_fields();
  for (const auto& b : g.boundary()) {
    d_dbc[0](b.i, b.j) = 2.0 * (u(b.i, b.j) - bc.g_u(b.i, b.j)) / boundary_count;
    d_dbc[1](b.i, b.j) = 2.0 * (v(b.i, b.j) - bc.g_v(b.i, b.j)) / boundary_count;
  }

  std::vector<Field> d_nbc = zero_fields();
  const std::vector<double> dpdn = boundary_normal_derivative(p, g);
  const double edge_count = static_cast<double>(dpdn.size());
  for (std::size_t k = 0; k < dpdn.size(); ++k) {
    const auto& e = g.edge_nodes()[k];
    const int i = e.node.i, j = e.node.j;
    const double a = 2.0 * (dpdn[k] - bc.g_p(i, j)) / edge_count * inv_2h;
    d_nbc[2](i, j) -= 3.0 * a;
    d_nbc[2](i + e.di, j + e.dj) += 4.0 * a;
    d_nbc[2](i + 2 * e.di, j + 2 * e.dj) -= a;
  }

  out.components = cavity_components(u, v, p, g, spec, bc);
  out.field_gradients = {std::move(d_nsx), std::move(d_nsy), std::move(d_c), std::move(d_dbc),
                         std::move(d_nbc)};
  return out;
}

}  // namespace pinnweigh
