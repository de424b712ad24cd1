#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "skewlab/group.hpp"
#include "skewlab/rotation.hpp"

namespace skewlab {

/// One term amp * cos(2*pi*(<freq, x> + phase)). The inner product <freq, x>
/// is reduced mod 1 in fixed point before any float conversion, so the
/// argument keeps full precision arbitrarily far along an orbit. A sine is a
/// cosine with phase shifted by -1/4.
struct TrigTerm {
  std::vector<std::int64_t> freq;  // one entry per base coordinate
  double amp = 1.0;
  double phase = 0.0;
};

/// Finite trig sum plus a constant offset: one real observable on the base.
struct TrigSum {
  std::vector<TrigTerm> terms;
  double offset = 0.0;
};

double eval_trig(const TrigSum& s, const TorusPoint& x);

struct ConstantGen {
  GroupElement value;
};
/// One trig sum per target coordinate (continuous target kinds only).
struct TrigMapGen {
  std::vector<TrigSum> coord;
};
/// Transfer function b, one sum per target coordinate; the generator is
/// b(Tx) . b(x)^{-1}, so every n-step product telescopes.
struct CoboundaryGen {
  std::vector<TrigSum> transfer;
};
/// Base dim 1, target Torus(1), f(x) = x.
struct AnzaiGen {};
/// f(x) = (a(x), b(x), 0) into HeisenbergReal.
struct HeisenbergLiftGen {
  TrigSum a;
  TrigSum b;
};

class Cocycle;

struct ProductGen {
  std::vector<Cocycle> factors;
};

using GeneratorSpec = std::variant<ConstantGen, TrigMapGen, CoboundaryGen,
                                   AnzaiGen, HeisenbergLiftGen, ProductGen>;

/// A continuous map from the base torus into the value group, bundled with
/// the rotation it sits over. Everything downstream (n-step products, skew
/// iteration, range estimates) is derived from this pair.
class Cocycle {
 public:
  Cocycle(RotationSystem base, GroupInstance target, GeneratorSpec gen);

  const RotationSystem& base() const { return base_; }
  const GroupInstance& target() const { return target_; }
  const GeneratorSpec& generator() const { return gen_; }
  /// Registry tag of the generator variant ("constant", "trig", ...).
  const std::string& tag() const { return tag_; }

  /// Exact per-term shifts <freq, alpha> for the coboundary transfer, filled
  /// at construction so b(Tx) never needs a rotated point.
  const std::vector<std::vector<Frac128>>& transfer_shifts() const {
    return shifts_;
  }

 private:
  RotationSystem base_;
  GroupInstance target_;
  GeneratorSpec gen_;
  std::string tag_;
  std::vector<std::vector<Frac128>> shifts_;
};

struct SkewState {
  TorusPoint x;
  GroupElement g;
};

GroupElement evaluate_generator(const Cocycle& f, const TorusPoint& x);
void evaluate_generator_into(const Cocycle& f, const TorusPoint& x,
                             GroupElement& out);

/// f(n, x): the ordered product f(T^{n-1}x) ... f(Tx) f(x) for n >= 1 with
/// the newest factor composed on the left, the identity for n = 0, and
/// invert(f(-n, T^n x)) for n < 0. Long products are accumulated as a
/// balanced tree so the Heisenberg central coordinate does not pick up O(n)
/// rounding. `max_steps` bounds |n|; exceeding it raises BudgetError with
/// progress and the partial product.
GroupElement evaluate_cocycle(const Cocycle& f, std::int64_t n,
                              const TorusPoint& x);
GroupElement evaluate_cocycle(const Cocycle& f, std::int64_t n,
                              const TorusPoint& x, std::int64_t max_steps);

/// (x, g) -> (T^n x, f(n,x) . g).
SkewState skew_iterate(const Cocycle& f, const SkewState& s, std::int64_t n);

/// distance(f(k, T^l x) . f(l, x), f(k+l, x)); the core self-test.
double verify_cocycle_identity(const Cocycle& f, std::int64_t k,
                               std::int64_t l, const TorusPoint& x);

/// Streaming evaluator of f(n, x) along n = dir, 2 dir, 3 dir, ...; O(1)
/// group operations per step. Factors are folded into a fixed-size block and
/// a completed-blocks accumulator, which keeps the float error of very long
/// products near the balanced-tree rate.
class CocycleWalker {
 public:
  CocycleWalker(const Cocycle& f, TorusPoint start, int direction);

  void step();
  void advance(std::int64_t count);

  std::int64_t n() const { return dir_ > 0 ? steps_ : -steps_; }
  /// T^n x.
  const TorusPoint& point() const { return pt_; }
  /// Current f(n, x).
  GroupElement value() const;
  void value_into(GroupElement& out) const;

 private:
  const Cocycle* f_;
  TorusPoint pt_;
  GroupElement block_;
  GroupElement done_;
  GroupElement g_;
  GroupElement ginv_;
  std::int64_t steps_ = 0;
  int dir_;
  int fill_ = 0;
  static constexpr int kBlock = 4096;
};

/// Scenario-facing registry. Valid tags: anzai, coboundary, constant,
/// heisenberg-lift, product, trig. Malformed or unknown input raises
/// ConfigError with the offending key path.
Cocycle make_named_cocycle(const std::string& tag, const RotationSystem& base,
                           const GroupInstance& target,
                           const nlohmann::json& params);

}  // namespace skewlab
