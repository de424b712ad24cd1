#include "skewlab/group.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

double wrap01(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y = 0.0;  // guard the rounding case x = -epsilon
  return y;
}

double circle_dist(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

bool integral(double x) { return x == std::floor(x) && std::fabs(x) <= 9e15; }

[[noreturn]] void quotient_mismatch(const GroupInstance& G,
                                    const SubgroupSpec& H) {
  throw UnsupportedQuotientError("no canonical representative rule for " +
                                 G.tag() + " modulo " + H.tag());
}

using ConstRef = ConstElemRef;
using MutRef = MutElemRef;

}  // namespace

void compose_ref(const GroupInstance& G, ConstElemRef g, MutElemRef acc) {
  switch (G.kind()) {
    case GroupInstance::Kind::RealVector:
    case GroupInstance::Kind::IntegerLattice:
      acc += g;
      return;
    case GroupInstance::Kind::Torus:
      for (int i = 0; i < G.dim(); ++i) acc[i] = wrap01(acc[i] + g[i]);
      return;
    case GroupInstance::Kind::HeisenbergReal:
    case GroupInstance::Kind::HeisenbergDiscrete:
      acc[2] = g[2] + acc[2] + g[0] * acc[1];
      acc[0] += g[0];
      acc[1] += g[1];
      return;
    case GroupInstance::Kind::DirectProduct: {
      for (std::size_t i = 0; i < G.factors().size(); ++i) {
        const auto& f = G.factors()[i];
        const int off = G.factor_offset(i);
        compose_ref(f, g.segment(off, f.dim()), acc.segment(off, f.dim()));
      }
      return;
    }
  }
}

void invert_ref(const GroupInstance& G, ConstElemRef g, MutElemRef out) {
  switch (G.kind()) {
    case GroupInstance::Kind::RealVector:
    case GroupInstance::Kind::IntegerLattice:
      out = -g;
      return;
    case GroupInstance::Kind::Torus:
      for (int i = 0; i < G.dim(); ++i) out[i] = wrap01(-g[i]);
      return;
    case GroupInstance::Kind::HeisenbergReal:
    case GroupInstance::Kind::HeisenbergDiscrete:
      out[0] = -g[0];
      out[1] = -g[1];
      out[2] = -g[2] + g[0] * g[1];
      return;
    case GroupInstance::Kind::DirectProduct: {
      for (std::size_t i = 0; i < G.factors().size(); ++i) {
        const auto& f = G.factors()[i];
        const int off = G.factor_offset(i);
        invert_ref(f, g.segment(off, f.dim()), out.segment(off, f.dim()));
      }
      return;
    }
  }
}

namespace {

double distance_ref(const GroupInstance& G, ConstRef g, ConstRef h) {
  switch (G.kind()) {
    case GroupInstance::Kind::RealVector:
    case GroupInstance::Kind::IntegerLattice:
      return (h - g).norm();
    case GroupInstance::Kind::Torus: {
      double worst = 0.0;
      for (int i = 0; i < G.dim(); ++i)
        worst = std::max(worst, circle_dist(g[i], h[i]));
      return worst;
    }
    case GroupInstance::Kind::HeisenbergReal:
    case GroupInstance::Kind::HeisenbergDiscrete: {
      // N(g^{-1} h) for the homogeneous gauge.
      const double a = h[0] - g[0];
      const double b = h[1] - g[1];
      const double c = h[2] - g[2] - g[0] * (h[1] - g[1]);
      const double s = a * a + b * b;
      return std::pow(s * s + c * c, 0.25);
    }
    case GroupInstance::Kind::DirectProduct: {
      double worst = 0.0;
      for (std::size_t i = 0; i < G.factors().size(); ++i) {
        const auto& f = G.factors()[i];
        const int off = G.factor_offset(i);
        worst = std::max(worst, distance_ref(f, g.segment(off, f.dim()),
                                             h.segment(off, f.dim())));
      }
      return worst;
    }
  }
  return 0.0;
}

int product_depth(const GroupInstance& G) {
  if (G.kind() != GroupInstance::Kind::DirectProduct) return 0;
  int deepest = 0;
  for (const auto& f : G.factors())
    deepest = std::max(deepest, product_depth(f));
  return deepest + 1;
}

// Splits "a,b,c" at top-level commas (parentheses balanced).
std::vector<std::string> split_factors(const std::string& body) {
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char ch : body) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

int parse_dim(const std::string& tag, const std::string& text) {
  try {
    const int d = std::stoi(text);
    if (d < 1 || d > 16) throw std::out_of_range("");
    return d;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    throw ConfigError("group", "bad dimension in group tag '" + tag + "'");
  }
}

}  // namespace

GroupInstance GroupInstance::real_vector(int d) {
  if (d < 1 || d > 16) throw DimensionError("real vector dimension " +
                                            std::to_string(d));
  return GroupInstance(Kind::RealVector, d);
}

GroupInstance GroupInstance::integer_lattice(int d) {
  if (d < 1 || d > 16)
    throw DimensionError("integer lattice dimension " + std::to_string(d));
  return GroupInstance(Kind::IntegerLattice, d);
}

GroupInstance GroupInstance::torus(int d) {
  if (d < 1 || d > 16) throw DimensionError("torus dimension " +
                                            std::to_string(d));
  return GroupInstance(Kind::Torus, d);
}

GroupInstance GroupInstance::heisenberg_real() {
  return GroupInstance(Kind::HeisenbergReal, 3);
}

GroupInstance GroupInstance::heisenberg_discrete() {
  return GroupInstance(Kind::HeisenbergDiscrete, 3);
}

GroupInstance GroupInstance::direct_product(
    std::vector<GroupInstance> factors) {
  if (factors.size() < 2)
    throw DimensionError("direct product needs at least two factors");
  int total = 0;
  std::vector<int> offsets;
  for (const auto& f : factors) {
    offsets.push_back(total);
    total += f.dim();
  }
  GroupInstance G(Kind::DirectProduct, total);
  G.factors_ = std::move(factors);
  G.offsets_ = std::move(offsets);
  if (product_depth(G) > 3)
    throw DimensionError("direct products nest at most 3 deep");
  return G;
}

int GroupInstance::factor_offset(std::size_t i) const {
  return offsets_.at(i);
}

bool GroupInstance::abelian() const {
  switch (kind_) {
    case Kind::RealVector:
    case Kind::IntegerLattice:
    case Kind::Torus:
      return true;
    case Kind::HeisenbergReal:
    case Kind::HeisenbergDiscrete:
      return false;
    case Kind::DirectProduct:
      return std::all_of(factors_.begin(), factors_.end(),
                         [](const GroupInstance& f) { return f.abelian(); });
  }
  return false;
}

bool GroupInstance::discrete() const {
  switch (kind_) {
    case Kind::IntegerLattice:
    case Kind::HeisenbergDiscrete:
      return true;
    case Kind::DirectProduct:
      return std::all_of(factors_.begin(), factors_.end(),
                         [](const GroupInstance& f) { return f.discrete(); });
    default:
      return false;
  }
}

bool GroupInstance::compact() const {
  switch (kind_) {
    case Kind::Torus:
      return true;
    case Kind::DirectProduct:
      return std::all_of(factors_.begin(), factors_.end(),
                         [](const GroupInstance& f) { return f.compact(); });
    default:
      return false;
  }
}

std::string GroupInstance::tag() const {
  switch (kind_) {
    case Kind::RealVector:
      return "real:" + std::to_string(dim_);
    case Kind::IntegerLattice:
      return "lattice:" + std::to_string(dim_);
    case Kind::Torus:
      return "torus:" + std::to_string(dim_);
    case Kind::HeisenbergReal:
      return "heisenberg-real";
    case Kind::HeisenbergDiscrete:
      return "heisenberg-discrete";
    case Kind::DirectProduct: {
      std::string out = "product(";
      for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (i) out += ",";
        out += factors_[i].tag();
      }
      return out + ")";
    }
  }
  return "?";
}

GroupInstance GroupInstance::from_tag(const std::string& tag) {
  if (tag == "heisenberg-real") return heisenberg_real();
  if (tag == "heisenberg-discrete") return heisenberg_discrete();
  if (tag.rfind("real:", 0) == 0)
    return real_vector(parse_dim(tag, tag.substr(5)));
  if (tag.rfind("lattice:", 0) == 0)
    return integer_lattice(parse_dim(tag, tag.substr(8)));
  if (tag.rfind("torus:", 0) == 0)
    return torus(parse_dim(tag, tag.substr(6)));
  if (tag.rfind("product(", 0) == 0 && tag.back() == ')') {
    const std::string body = tag.substr(8, tag.size() - 9);
    std::vector<GroupInstance> factors;
    for (const auto& part : split_factors(body))
      factors.push_back(from_tag(part));
    return direct_product(std::move(factors));
  }
  throw ConfigError("group",
                    "unknown group tag '" + tag +
                        "' (known: real:d, lattice:d, torus:d, heisenberg-real, "
                        "heisenberg-discrete, product(...))");
}

GroupElement identity(const GroupInstance& G) {
  return GroupElement::Zero(G.dim());
}

void check_element(const GroupInstance& G, const GroupElement& g) {
  if (g.size() != G.dim())
    throw DimensionError("element has " + std::to_string(g.size()) +
                         " coordinates, group " + G.tag() + " expects " +
                         std::to_string(G.dim()));
  if (!g.allFinite())
    throw DimensionError("element has non-finite coordinates");
  switch (G.kind()) {
    case GroupInstance::Kind::Torus:
      for (int i = 0; i < G.dim(); ++i)
        if (g[i] < 0.0 || g[i] >= 1.0)
          throw DimensionError("torus coordinate out of [0,1): " +
                               std::to_string(g[i]));
      break;
    case GroupInstance::Kind::IntegerLattice:
    case GroupInstance::Kind::HeisenbergDiscrete:
      for (int i = 0; i < G.dim(); ++i)
        if (!integral(g[i]))
          throw DimensionError("lattice coordinate is not an integer: " +
                               std::to_string(g[i]));
      break;
    case GroupInstance::Kind::DirectProduct:
      for (std::size_t i = 0; i < G.factors().size(); ++i) {
        const auto& f = G.factors()[i];
        check_element(f, g.segment(G.factor_offset(i), f.dim()));
      }
      break;
    default:
      break;
  }
}

GroupElement compose(const GroupInstance& G, const GroupElement& g,
                     const GroupElement& h) {
  check_element(G, g);
  check_element(G, h);
  GroupElement acc = h;
  compose_ref(G, g, acc);
  return acc;
}

void compose_into(const GroupInstance& G, const GroupElement& g,
                  GroupElement& acc) {
  if (g.size() != G.dim() || acc.size() != G.dim())
    throw DimensionError("compose_into: element layout mismatch for " +
                         G.tag());
  compose_ref(G, g, acc);
}

GroupElement invert(const GroupInstance& G, const GroupElement& g) {
  check_element(G, g);
  GroupElement out(G.dim());
  invert_ref(G, g, out);
  return out;
}

void invert_into(const GroupInstance& G, const GroupElement& g,
                 GroupElement& out) {
  if (g.size() != G.dim())
    throw DimensionError("invert_into: element layout mismatch for " +
                         G.tag());
  out.resize(G.dim());
  invert_ref(G, g, out);
}

namespace {

// Closed forms: conjugation is the identity on the abelian kinds and only
// twists the Heisenberg center, so the cancellations are carried out
// symbolically instead of through compose/invert round-off.
void conjugate_ref(const GroupInstance& G, ConstElemRef g, ConstElemRef h,
                   MutElemRef out) {
  switch (G.kind()) {
    case GroupInstance::Kind::RealVector:
    case GroupInstance::Kind::IntegerLattice:
    case GroupInstance::Kind::Torus:
      out = h;
      return;
    case GroupInstance::Kind::HeisenbergReal:
    case GroupInstance::Kind::HeisenbergDiscrete:
      out[0] = h[0];
      out[1] = h[1];
      out[2] = h[2] + g[0] * h[1] - g[1] * h[0];
      return;
    case GroupInstance::Kind::DirectProduct: {
      for (std::size_t i = 0; i < G.factors().size(); ++i) {
        const auto& f = G.factors()[i];
        const int off = G.factor_offset(i);
        conjugate_ref(f, g.segment(off, f.dim()), h.segment(off, f.dim()),
                      out.segment(off, f.dim()));
      }
      return;
    }
  }
}

}  // namespace

GroupElement conjugate(const GroupInstance& G, const GroupElement& g,
                       const GroupElement& h) {
  check_element(G, g);
  check_element(G, h);
  GroupElement out(G.dim());
  conjugate_ref(G, g, h, out);
  return out;
}

double group_distance(const GroupInstance& G, const GroupElement& g,
                      const GroupElement& h) {
  check_element(G, g);
  check_element(G, h);
  return distance_ref(G, g, h);
}

double group_norm(const GroupInstance& G, const GroupElement& g) {
  static thread_local GroupElement zero;
  if (zero.size() != G.dim()) zero = GroupElement::Zero(G.dim());
  if (g.size() != G.dim())
    throw DimensionError("group_norm: element layout mismatch");
  return distance_ref(G, zero, g);
}

SubgroupSpec SubgroupSpec::trivial() { return SubgroupSpec(Kind::Trivial); }

SubgroupSpec SubgroupSpec::full() { return SubgroupSpec(Kind::Full); }

SubgroupSpec SubgroupSpec::center_of_heisenberg() {
  return SubgroupSpec(Kind::CenterOfHeisenberg);
}

SubgroupSpec SubgroupSpec::lattice_zd(int d) {
  if (d < 1 || d > 16)
    throw DimensionError("lattice subgroup dimension " + std::to_string(d));
  SubgroupSpec s(Kind::LatticeZd);
  s.lattice_dim_ = d;
  return s;
}

SubgroupSpec SubgroupSpec::torus_cyclic(std::vector<std::int64_t> num,
                                        std::vector<std::int64_t> den) {
  if (num.empty() || num.size() != den.size())
    throw DimensionError("cyclic subgroup generator layout mismatch");
  std::int64_t order = 1;
  for (std::size_t i = 0; i < num.size(); ++i) {
    if (den[i] < 1 || den[i] > 1'000'000)
      throw DimensionError("cyclic subgroup denominator out of [1, 10^6]");
    std::int64_t n = ((num[i] % den[i]) + den[i]) % den[i];
    const std::int64_t g = std::gcd(n, den[i]);
    const std::int64_t ord_i = den[i] / (g == 0 ? den[i] : g);
    order = std::lcm(order, ord_i);
    if (order > 1'000'000)
      throw DimensionError("cyclic subgroup order exceeds 10^6");
  }
  SubgroupSpec s(Kind::TorusCyclic);
  s.num_ = std::move(num);
  s.den_ = std::move(den);
  return s;
}

SubgroupSpec SubgroupSpec::vector_subspace(Eigen::MatrixXd basis) {
  if (basis.rows() < 1 || basis.cols() < 1 || basis.cols() > basis.rows())
    throw DimensionError("subspace basis must be a tall d x k matrix");
  SubgroupSpec s(Kind::VectorSubspace);
  // Orthonormalize once; thin QR keeps the span.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  Eigen::MatrixXd q = qr.householderQ() *
                      Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
  s.basis_ = std::move(q);
  return s;
}

SubgroupSpec SubgroupSpec::product(std::vector<SubgroupSpec> parts) {
  if (parts.size() < 2)
    throw DimensionError("subgroup product needs at least two parts");
  SubgroupSpec s(Kind::ProductOfSpecs);
  s.parts_ = std::move(parts);
  return s;
}

SubgroupSpec SubgroupSpec::conjugated_by(GroupElement c) const {
  SubgroupSpec s = *this;
  s.conjugator_ = std::move(c);
  return s;
}

std::string SubgroupSpec::tag() const {
  std::string base;
  switch (kind_) {
    case Kind::Trivial: base = "trivial"; break;
    case Kind::Full: base = "full"; break;
    case Kind::CenterOfHeisenberg: base = "center"; break;
    case Kind::LatticeZd:
      base = "lattice:" + std::to_string(lattice_dim_);
      break;
    case Kind::TorusCyclic: {
      base = "cyclic:";
      for (std::size_t i = 0; i < num_.size(); ++i) {
        if (i) base += ",";
        base += std::to_string(num_[i]) + "/" + std::to_string(den_[i]);
      }
      break;
    }
    case Kind::VectorSubspace:
      base = "subspace:" + std::to_string(basis_.cols());
      break;
    case Kind::ProductOfSpecs: {
      base = "product(";
      for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (i) base += ",";
        base += parts_[i].tag();
      }
      base += ")";
      break;
    }
  }
  if (has_conjugator()) base += "^conj";
  return base;
}

namespace {

GroupElement project_base(const GroupInstance& G, const SubgroupSpec& H,
                          const GroupElement& g) {
  switch (H.kind()) {
    case SubgroupSpec::Kind::Trivial:
      return g;
    case SubgroupSpec::Kind::Full:
      return identity(G);
    case SubgroupSpec::Kind::CenterOfHeisenberg: {
      if (G.kind() != GroupInstance::Kind::HeisenbergReal &&
          G.kind() != GroupInstance::Kind::HeisenbergDiscrete)
        quotient_mismatch(G, H);
      GroupElement out = g;
      out[2] = 0.0;
      return out;
    }
    case SubgroupSpec::Kind::LatticeZd: {
      if (G.kind() != GroupInstance::Kind::RealVector ||
          G.dim() != H.lattice_dim())
        quotient_mismatch(G, H);
      GroupElement out(G.dim());
      for (int i = 0; i < G.dim(); ++i) out[i] = wrap01(g[i]);
      return out;
    }
    case SubgroupSpec::Kind::VectorSubspace: {
      if (G.kind() != GroupInstance::Kind::RealVector ||
          G.dim() != H.basis().rows())
        quotient_mismatch(G, H);
      return g - H.basis() * (H.basis().transpose() * g);
    }
    case SubgroupSpec::Kind::TorusCyclic: {
      if (G.kind() != GroupInstance::Kind::Torus ||
          G.dim() != static_cast<int>(H.num().size()))
        quotient_mismatch(G, H);
      std::int64_t order = 1;
      for (std::size_t i = 0; i < H.num().size(); ++i) {
        const std::int64_t den = H.den()[i];
        std::int64_t n = ((H.num()[i] % den) + den) % den;
        const std::int64_t gg = std::gcd(n, den);
        order = std::lcm(order, den / (gg == 0 ? den : gg));
      }
      // Representative: lexicographically smallest translate g + k t.
      GroupElement best;
      for (std::int64_t k = 0; k < order; ++k) {
        GroupElement cand(G.dim());
        for (int i = 0; i < G.dim(); ++i) {
          const std::int64_t den = H.den()[static_cast<std::size_t>(i)];
          const std::int64_t num = H.num()[static_cast<std::size_t>(i)];
          const std::int64_t kn = (((k * num) % den) + den) % den;
          cand[i] = wrap01(g[i] + static_cast<double>(kn) /
                                      static_cast<double>(den));
        }
        if (best.size() == 0 ||
            std::lexicographical_compare(cand.data(), cand.data() + cand.size(),
                                         best.data(),
                                         best.data() + best.size()))
          best = cand;
      }
      return best;
    }
    case SubgroupSpec::Kind::ProductOfSpecs: {
      if (G.kind() != GroupInstance::Kind::DirectProduct ||
          G.factors().size() != H.parts().size())
        quotient_mismatch(G, H);
      GroupElement out(G.dim());
      for (std::size_t i = 0; i < G.factors().size(); ++i) {
        const auto& f = G.factors()[i];
        out.segment(G.factor_offset(i), f.dim()) = project_base(
            f, H.parts()[i], g.segment(G.factor_offset(i), f.dim()));
      }
      return out;
    }
  }
  quotient_mismatch(G, H);
}

}  // namespace

GroupElement quotient_project(const GroupInstance& G, const SubgroupSpec& H,
                              const GroupElement& g) {
  check_element(G, g);
  if (!H.has_conjugator()) return project_base(G, H, g);
  // Spec c H0 c^{-1}: representative c proj0(c^{-1} g c) c^{-1}.
  const GroupElement& c = H.conjugator();
  check_element(G, c);
  const GroupElement inner = conjugate(G, invert(G, c), g);
  return conjugate(G, c, project_base(G, H, inner));
}

double quotient_distance(const GroupInstance& G, const SubgroupSpec& H,
                         const GroupElement& g, const GroupElement& h) {
  const GroupElement diff = compose(G, invert(G, g), h);
  return group_norm(G, quotient_project(G, H, diff));
}

namespace {

std::vector<double> real_axis(double range, double step) {
  std::vector<double> vals;
  for (double v = -range; v <= range + 1e-12; v += step)
    vals.push_back(std::fabs(v) < 1e-15 ? 0.0 : v);
  return vals;
}

std::vector<double> integer_axis(double range) {
  std::vector<double> vals;
  const auto r = static_cast<std::int64_t>(std::floor(range));
  for (std::int64_t v = -r; v <= r; ++v)
    vals.push_back(static_cast<double>(v));
  return vals;
}

std::vector<double> torus_axis(double step) {
  std::vector<double> vals;
  const auto count = static_cast<std::int64_t>(std::ceil(1.0 / step));
  for (std::int64_t k = 0; k < count; ++k)
    vals.push_back(wrap01(static_cast<double>(k) * step));
  return vals;
}

// All coordinate combinations of per-axis value lists, written into
// `slots`-wide elements through `emit`.
void cartesian(const std::vector<std::vector<double>>& axes,
               const std::function<void(const std::vector<double>&)>& emit) {
  std::vector<double> cur(axes.size(), 0.0);
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == axes.size()) {
      emit(cur);
      return;
    }
    for (double v : axes[k]) {
      cur[k] = v;
      rec(k + 1);
    }
  };
  rec(0);
}

std::size_t grid_count(const std::vector<std::vector<double>>& axes) {
  std::size_t n = 1;
  for (const auto& a : axes) {
    if (a.empty()) return 0;
    if (n > std::size_t(1) << 40) return n;  // already far beyond any cap
    n *= a.size();
  }
  return n;
}

std::vector<GroupElement> grid_base(const GroupInstance& G,
                                    const SubgroupSpec& H,
                                    const SearchGrid& grid) {
  double step = grid.step;
  if (!(step > 0.0) || !(grid.range >= 0.0))
    throw Error("search grid needs positive step and nonnegative range");

  for (int attempt = 0; attempt < 60; ++attempt, step *= 2.0) {
    std::vector<std::vector<double>> axes;
    bool integer_axes_only = false;
    switch (H.kind()) {
      case SubgroupSpec::Kind::Trivial:
        return {identity(G)};
      case SubgroupSpec::Kind::Full: {
        for (int i = 0; i < G.dim(); ++i) {
          if (G.discrete())
            axes.push_back(integer_axis(grid.range));
          else if (G.kind() == GroupInstance::Kind::Torus)
            axes.push_back(torus_axis(step));
          else
            axes.push_back(real_axis(grid.range, step));
        }
        integer_axes_only = G.discrete();
        break;
      }
      case SubgroupSpec::Kind::CenterOfHeisenberg: {
        if (G.kind() != GroupInstance::Kind::HeisenbergReal &&
            G.kind() != GroupInstance::Kind::HeisenbergDiscrete)
          quotient_mismatch(G, H);
        if (G.discrete()) {
          integer_axes_only = true;
          axes.push_back(integer_axis(grid.range));
        } else {
          axes.push_back(real_axis(grid.range, step));
        }
        std::vector<GroupElement> out;
        if (grid_count(axes) > grid.max_points) continue;
        for (double t : axes[0]) {
          GroupElement e = identity(G);
          e[2] = t;
          out.push_back(std::move(e));
        }
        return out;
      }
      case SubgroupSpec::Kind::LatticeZd: {
        if (G.kind() != GroupInstance::Kind::RealVector ||
            G.dim() != H.lattice_dim())
          quotient_mismatch(G, H);
        integer_axes_only = true;
        for (int i = 0; i < G.dim(); ++i)
          axes.push_back(integer_axis(grid.range));
        break;
      }
      case SubgroupSpec::Kind::TorusCyclic: {
        if (G.kind() != GroupInstance::Kind::Torus ||
            G.dim() != static_cast<int>(H.num().size()))
          quotient_mismatch(G, H);
        std::int64_t order = 1;
        for (std::size_t i = 0; i < H.num().size(); ++i) {
          const std::int64_t den = H.den()[i];
          std::int64_t n = ((H.num()[i] % den) + den) % den;
          const std::int64_t gg = std::gcd(n, den);
          order = std::lcm(order, den / (gg == 0 ? den : gg));
        }
        std::vector<GroupElement> out;
        for (std::int64_t k = 0; k < order; ++k) {
          GroupElement e(G.dim());
          for (int i = 0; i < G.dim(); ++i) {
            const std::int64_t den = H.den()[static_cast<std::size_t>(i)];
            const std::int64_t num = H.num()[static_cast<std::size_t>(i)];
            const std::int64_t kn = (((k * num) % den) + den) % den;
            e[i] = static_cast<double>(kn) / static_cast<double>(den);
          }
          out.push_back(std::move(e));
        }
        return out;
      }
      case SubgroupSpec::Kind::VectorSubspace: {
        if (G.kind() != GroupInstance::Kind::RealVector ||
            G.dim() != H.basis().rows())
          quotient_mismatch(G, H);
        for (int i = 0; i < H.basis().cols(); ++i)
          axes.push_back(real_axis(grid.range, step));
        if (grid_count(axes) > grid.max_points) continue;
        std::vector<GroupElement> out;
        cartesian(axes, [&](const std::vector<double>& coeff) {
          Eigen::VectorXd c(H.basis().cols());
          for (int i = 0; i < c.size(); ++i)
            c[i] = coeff[static_cast<std::size_t>(i)];
          out.push_back(H.basis() * c);
        });
        return out;
      }
      case SubgroupSpec::Kind::ProductOfSpecs: {
        if (G.kind() != GroupInstance::Kind::DirectProduct ||
            G.factors().size() != H.parts().size())
          quotient_mismatch(G, H);
        // Per-factor grids, then cartesian across factors.
        SearchGrid sub = grid;
        sub.step = step;
        sub.max_points =
            std::max<std::size_t>(2, static_cast<std::size_t>(std::pow(
                                         static_cast<double>(grid.max_points),
                                         1.0 / static_cast<double>(
                                                   H.parts().size()))));
        std::vector<std::vector<GroupElement>> per;
        std::size_t total = 1;
        for (std::size_t i = 0; i < H.parts().size(); ++i) {
          per.push_back(subgroup_grid(G.factors()[i], H.parts()[i], sub));
          total *= std::max<std::size_t>(per.back().size(), 1);
        }
        if (total > grid.max_points) continue;
        std::vector<GroupElement> out;
        std::vector<std::size_t> idx(per.size(), 0);
        while (true) {
          GroupElement e(G.dim());
          for (std::size_t i = 0; i < per.size(); ++i)
            e.segment(G.factor_offset(i), G.factors()[i].dim()) =
                per[i][idx[i]];
          out.push_back(std::move(e));
          std::size_t k = per.size();
          while (k > 0) {
            --k;
            if (++idx[k] < per[k].size()) break;
            idx[k] = 0;
            if (k == 0) return out;
          }
        }
      }
    }
    if (grid_count(axes) > grid.max_points) {
      if (integer_axes_only)
        throw Error("integer grid exceeds the point cap; shrink the range");
      continue;
    }
    std::vector<GroupElement> out;
    cartesian(axes, [&](const std::vector<double>& coords) {
      GroupElement e(G.dim());
      for (int i = 0; i < G.dim(); ++i)
        e[i] = coords[static_cast<std::size_t>(i)];
      out.push_back(std::move(e));
    });
    return out;
  }
  throw Error("search grid does not fit the point cap");
}

}  // namespace

std::vector<GroupElement> subgroup_grid(const GroupInstance& G,
                                        const SubgroupSpec& H,
                                        const SearchGrid& grid) {
  std::vector<GroupElement> pts = grid_base(G, H, grid);
  if (H.has_conjugator()) {
    const GroupElement& c = H.conjugator();
    check_element(G, c);
    for (auto& p : pts) p = conjugate(G, c, p);
  }
  return pts;
}

double double_coset_infimum(const GroupInstance& G, const SubgroupSpec& H,
                            const GroupElement& g, const SearchGrid& grid) {
  check_element(G, g);
  if (H.kind() == SubgroupSpec::Kind::Full) return 0.0;
  SearchGrid side = grid;
  side.max_points = std::min<std::size_t>(grid.max_points, 5000);
  const std::vector<GroupElement> pts = subgroup_grid(G, H, side);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& h1 : pts) {
    const GroupElement left = compose(G, h1, g);
    for (const auto& h2 : pts)
      best = std::min(best, group_norm(G, compose(G, left, h2)));
  }
  return best;
}

namespace {

double conj_infimum_impl(const GroupInstance& G, const GroupElement& g,
                         const SearchGrid& grid) {
  switch (G.kind()) {
    case GroupInstance::Kind::RealVector:
    case GroupInstance::Kind::IntegerLattice:
    case GroupInstance::Kind::Torus:
      return group_norm(G, g);  // conjugation is trivial
    case GroupInstance::Kind::HeisenbergReal:
    case GroupInstance::Kind::HeisenbergDiscrete: {
      // h g h^{-1} = (a, b, c + x b - y a) depends on (x, y) only.
      const bool integers = G.discrete();
      const std::vector<double> axis =
          integers ? integer_axis(grid.range)
                   : real_axis(grid.range, grid.step);
      double best = std::numeric_limits<double>::infinity();
      GroupElement cand = g;
      for (double x : axis) {
        for (double y : axis) {
          cand[2] = g[2] + x * g[1] - y * g[0];
          best = std::min(best, group_norm(G, cand));
        }
      }
      return best;
    }
    case GroupInstance::Kind::DirectProduct: {
      // Factors conjugate independently and the metric is the max, so the
      // infimum splits.
      double worst = 0.0;
      for (std::size_t i = 0; i < G.factors().size(); ++i) {
        const auto& f = G.factors()[i];
        const GroupElement gi = g.segment(G.factor_offset(i), f.dim());
        worst = std::max(worst, conj_infimum_impl(f, gi, grid));
      }
      return worst;
    }
  }
  return 0.0;
}

}  // namespace

double conjugacy_class_infimum(const GroupInstance& G, const GroupElement& g,
                               const SearchGrid& grid) {
  check_element(G, g);
  if (group_norm(G, g) == 0.0)
    throw DegenerateInputError(
        "conjugacy class of the identity is degenerate");
  return conj_infimum_impl(G, g, grid);
}

}  // namespace skewlab
