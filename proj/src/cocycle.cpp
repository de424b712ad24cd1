#include "skewlab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;
constexpr std::int64_t kLeaf = 2048;

double wrap01(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y = 0.0;
  return y;
}

double eval_term(const TrigTerm& t, const TorusPoint& x,
                 const Frac128* shift) {
  Frac128 acc;
  for (std::size_t i = 0; i < t.freq.size(); ++i)
    acc = acc + x.coords[i].times(t.freq[i]);
  if (shift != nullptr) acc = acc + *shift;
  return t.amp * std::cos(kTau * (acc.to_double() + t.phase));
}

double eval_sum(const TrigSum& s, const TorusPoint& x,
                const std::vector<Frac128>* shifts) {
  double v = s.offset;
  for (std::size_t i = 0; i < s.terms.size(); ++i)
    v += eval_term(s.terms[i], x, shifts ? &(*shifts)[i] : nullptr);
  return v;
}

void check_sum(const TrigSum& s, int base_dim, const std::string& what) {
  if (!std::isfinite(s.offset)) throw Error(what + ": non-finite offset");
  for (const auto& t : s.terms) {
    if (static_cast<int>(t.freq.size()) != base_dim)
      throw DimensionError(what + ": frequency vector length " +
                           std::to_string(t.freq.size()) +
                           " does not match base dimension " +
                           std::to_string(base_dim));
    if (!std::isfinite(t.amp) || !std::isfinite(t.phase))
      throw Error(what + ": non-finite amplitude or phase");
  }
}

bool continuous_kind(const GroupInstance& G) {
  switch (G.kind()) {
    case GroupInstance::Kind::RealVector:
    case GroupInstance::Kind::Torus:
    case GroupInstance::Kind::HeisenbergReal:
      return true;
    default:
      return false;
  }
}

bool same_base(const RotationSystem& a, const RotationSystem& b) {
  if (a.dim() != b.dim()) return false;
  for (int i = 0; i < a.dim(); ++i)
    if (a.alpha()[i].raw() != b.alpha()[i].raw()) return false;
  return true;
}

void eval_gen(const Cocycle& f, const TorusPoint& x, MutElemRef out);

void eval_coboundary(const Cocycle& f, const CoboundaryGen& gen,
                     const TorusPoint& x, MutElemRef out) {
  const GroupInstance& G = f.target();
  const bool torus = G.kind() == GroupInstance::Kind::Torus;
  static thread_local GroupElement bx, btx, binv;
  bx.resize(G.dim());
  btx.resize(G.dim());
  binv.resize(G.dim());
  for (int j = 0; j < G.dim(); ++j) {
    bx[j] = eval_sum(gen.transfer[j], x, nullptr);
    btx[j] = eval_sum(gen.transfer[j], x, &f.transfer_shifts()[j]);
    if (torus) {
      bx[j] = wrap01(bx[j]);
      btx[j] = wrap01(btx[j]);
    }
  }
  invert_ref(G, bx, binv);
  out = binv;
  compose_ref(G, btx, out);  // out <- b(Tx) . b(x)^{-1}
}

void eval_gen(const Cocycle& f, const TorusPoint& x, MutElemRef out) {
  const GroupInstance& G = f.target();
  if (const auto* c = std::get_if<ConstantGen>(&f.generator())) {
    out = c->value;
  } else if (const auto* t = std::get_if<TrigMapGen>(&f.generator())) {
    const bool torus = G.kind() == GroupInstance::Kind::Torus;
    for (int j = 0; j < G.dim(); ++j) {
      out[j] = eval_sum(t->coord[j], x, nullptr);
      if (torus) out[j] = wrap01(out[j]);
    }
  } else if (const auto* cb = std::get_if<CoboundaryGen>(&f.generator())) {
    eval_coboundary(f, *cb, x, out);
  } else if (std::get_if<AnzaiGen>(&f.generator())) {
    out[0] = x.coords[0].to_double();
  } else if (const auto* h = std::get_if<HeisenbergLiftGen>(&f.generator())) {
    out[0] = eval_sum(h->a, x, nullptr);
    out[1] = eval_sum(h->b, x, nullptr);
    out[2] = 0.0;
  } else if (const auto* p = std::get_if<ProductGen>(&f.generator())) {
    for (std::size_t i = 0; i < p->factors.size(); ++i) {
      const auto& sub = G.factors()[i];
      eval_gen(p->factors[i], x, out.segment(G.factor_offset(i), sub.dim()));
    }
  }
}

GroupElement product_forward(const Cocycle& f, std::int64_t n,
                             const TorusPoint& x) {
  const GroupInstance& G = f.target();
  if (n <= kLeaf) {
    GroupElement acc = identity(G);
    GroupElement g(G.dim());
    TorusPoint p = x;
    for (std::int64_t j = 0; j < n; ++j) {
      eval_gen(f, p, g);
      compose_ref(G, g, acc);
      rotate_inplace(f.base(), p, 1);
    }
    return acc;
  }
  const std::int64_t h = n / 2;
  GroupElement low = product_forward(f, h, x);
  const GroupElement high = product_forward(f, n - h, rotate(f.base(), x, h));
  compose_ref(G, high, low);
  return low;
}

}  // namespace

Cocycle::Cocycle(RotationSystem base, GroupInstance target, GeneratorSpec gen)
    : base_(std::move(base)),
      target_(std::move(target)),
      gen_(std::move(gen)) {
  if (const auto* c = std::get_if<ConstantGen>(&gen_)) {
    check_element(target_, c->value);
    tag_ = "constant";
  } else if (const auto* t = std::get_if<TrigMapGen>(&gen_)) {
    if (!continuous_kind(target_))
      throw Error("trig generator requires a continuous target group, got " +
                  target_.tag());
    if (static_cast<int>(t->coord.size()) != target_.dim())
      throw DimensionError("trig generator: " +
                           std::to_string(t->coord.size()) +
                           " coordinate sums for a " +
                           std::to_string(target_.dim()) + "-d target");
    for (const auto& s : t->coord) check_sum(s, base_.dim(), "trig generator");
    tag_ = "trig";
  } else if (const auto* cb = std::get_if<CoboundaryGen>(&gen_)) {
    if (!continuous_kind(target_))
      throw Error("coboundary transfer requires a continuous target group, "
                  "got " +
                  target_.tag());
    if (static_cast<int>(cb->transfer.size()) != target_.dim())
      throw DimensionError("coboundary transfer: " +
                           std::to_string(cb->transfer.size()) +
                           " coordinate sums for a " +
                           std::to_string(target_.dim()) + "-d target");
    shifts_.resize(cb->transfer.size());
    for (std::size_t j = 0; j < cb->transfer.size(); ++j) {
      check_sum(cb->transfer[j], base_.dim(), "coboundary transfer");
      for (const auto& term : cb->transfer[j].terms) {
        Frac128 sh;
        for (int i = 0; i < base_.dim(); ++i)
          sh = sh + base_.alpha()[i].times(term.freq[i]);
        shifts_[j].push_back(sh);
      }
    }
    tag_ = "coboundary";
  } else if (std::get_if<AnzaiGen>(&gen_)) {
    if (base_.dim() != 1)
      throw DimensionError("anzai generator needs a 1-d base, got dimension " +
                           std::to_string(base_.dim()));
    if (target_.kind() != GroupInstance::Kind::Torus || target_.dim() != 1)
      throw Error("anzai generator targets torus:1, got " + target_.tag());
    tag_ = "anzai";
  } else if (const auto* h = std::get_if<HeisenbergLiftGen>(&gen_)) {
    if (target_.kind() != GroupInstance::Kind::HeisenbergReal)
      throw Error("heisenberg lift targets heisenberg-real, got " +
                  target_.tag());
    check_sum(h->a, base_.dim(), "heisenberg lift a");
    check_sum(h->b, base_.dim(), "heisenberg lift b");
    tag_ = "heisenberg-lift";
  } else if (const auto* p = std::get_if<ProductGen>(&gen_)) {
    if (target_.kind() != GroupInstance::Kind::DirectProduct)
      throw Error("product cocycle requires a product target group, got " +
                  target_.tag());
    if (p->factors.size() != target_.factors().size())
      throw DimensionError("product cocycle: " +
                           std::to_string(p->factors.size()) +
                           " factors for " +
                           std::to_string(target_.factors().size()) +
                           " target factors");
    for (std::size_t i = 0; i < p->factors.size(); ++i) {
      if (!(p->factors[i].target() == target_.factors()[i]))
        throw Error("product cocycle factor " + std::to_string(i) +
                    " targets " + p->factors[i].target().tag() +
                    ", expected " + target_.factors()[i].tag());
      if (!same_base(p->factors[i].base(), base_))
        throw Error("product cocycle factor " + std::to_string(i) +
                    " sits over a different base rotation");
    }
    tag_ = "product";
  }
}

double eval_trig(const TrigSum& s, const TorusPoint& x) {
  return eval_sum(s, x, nullptr);
}

GroupElement evaluate_generator(const Cocycle& f, const TorusPoint& x) {
  GroupElement out(f.target().dim());
  evaluate_generator_into(f, x, out);
  return out;
}

void evaluate_generator_into(const Cocycle& f, const TorusPoint& x,
                             GroupElement& out) {
  check_point(f.base(), x);
  out.resize(f.target().dim());
  eval_gen(f, x, out);
}

GroupElement evaluate_cocycle(const Cocycle& f, std::int64_t n,
                              const TorusPoint& x) {
  return evaluate_cocycle(f, n, x, kMaxIterate);
}

GroupElement evaluate_cocycle(const Cocycle& f, std::int64_t n,
                              const TorusPoint& x, std::int64_t max_steps) {
  check_point(f.base(), x);
  if (n == 0) return identity(f.target());
  if (n < 0)
    return invert(f.target(),
                  evaluate_cocycle(f, -n, rotate(f.base(), x, n), max_steps));
  if (n > max_steps) {
    CocycleWalker w(f, x, 1);
    w.advance(std::max<std::int64_t>(max_steps, 0));
    const GroupElement part = w.value();
    throw BudgetError(
        "cocycle evaluation stopped at step " + std::to_string(w.n()) +
            " of " + std::to_string(n),
        w.n(), std::vector<double>(part.data(), part.data() + part.size()));
  }
  return product_forward(f, n, x);
}

SkewState skew_iterate(const Cocycle& f, const SkewState& s, std::int64_t n) {
  check_element(f.target(), s.g);
  const GroupElement v = evaluate_cocycle(f, n, s.x);
  GroupElement g = s.g;
  compose_ref(f.target(), v, g);
  return SkewState{rotate(f.base(), s.x, n), std::move(g)};
}

double verify_cocycle_identity(const Cocycle& f, std::int64_t k,
                               std::int64_t l, const TorusPoint& x) {
  const __int128 sum = static_cast<__int128>(k) + static_cast<__int128>(l);
  if (sum > kMaxIterate || sum < -static_cast<__int128>(kMaxIterate))
    throw Error("cocycle identity check: k + l out of iterate range");
  GroupElement lhs = evaluate_cocycle(f, l, x);
  const GroupElement fk = evaluate_cocycle(f, k, rotate(f.base(), x, l));
  compose_ref(f.target(), fk, lhs);
  const GroupElement rhs =
      evaluate_cocycle(f, static_cast<std::int64_t>(sum), x);
  return group_distance(f.target(), lhs, rhs);
}

CocycleWalker::CocycleWalker(const Cocycle& f, TorusPoint start, int direction)
    : f_(&f), pt_(std::move(start)), dir_(direction) {
  if (direction != 1 && direction != -1)
    throw Error("cocycle walker direction must be +1 or -1");
  check_point(f.base(), pt_);
  block_ = identity(f.target());
  done_ = block_;
  g_ = block_;
  ginv_ = block_;
}

void CocycleWalker::step() {
  const GroupInstance& G = f_->target();
  if (dir_ > 0) {
    eval_gen(*f_, pt_, g_);
    compose_ref(G, g_, block_);
    rotate_inplace(f_->base(), pt_, 1);
  } else {
    rotate_inplace(f_->base(), pt_, -1);
    eval_gen(*f_, pt_, g_);
    invert_ref(G, g_, ginv_);
    compose_ref(G, ginv_, block_);
  }
  ++steps_;
  if (++fill_ == kBlock) {
    compose_ref(G, block_, done_);
    block_.setZero();
    fill_ = 0;
  }
}

void CocycleWalker::advance(std::int64_t count) {
  for (std::int64_t i = 0; i < count; ++i) step();
}

void CocycleWalker::value_into(GroupElement& out) const {
  out = done_;
  compose_ref(f_->target(), block_, out);
}

GroupElement CocycleWalker::value() const {
  GroupElement out;
  value_into(out);
  return out;
}

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw ConfigError(path, msg);
}

double get_num(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok) bad(path + "." + it.key(), "unknown key");
  }
}

std::vector<std::int64_t> parse_freq(const json& j, const std::string& path,
                                     int base_dim) {
  std::vector<std::int64_t> freq;
  if (j.is_number_integer()) {
    freq.assign(static_cast<std::size_t>(base_dim), 0);
    freq[0] = j.get<std::int64_t>();
  } else if (j.is_array()) {
    if (static_cast<int>(j.size()) != base_dim)
      bad(path, "frequency vector length must equal the base dimension");
    for (const auto& e : j) {
      if (!e.is_number_integer()) bad(path, "frequencies must be integers");
      freq.push_back(e.get<std::int64_t>());
    }
  } else {
    bad(path, "expected an integer or an integer array");
  }
  return freq;
}

TrigTerm parse_term(const json& j, const std::string& path, int base_dim) {
  if (!j.is_object()) bad(path, "expected a term object");
  check_keys(j, path, {"freq", "amp", "phase", "sin"});
  if (!j.contains("freq")) bad(path + ".freq", "required");
  TrigTerm t;
  t.freq = parse_freq(j.at("freq"), path + ".freq", base_dim);
  if (j.contains("amp")) t.amp = get_num(j.at("amp"), path + ".amp");
  if (j.contains("phase")) t.phase = get_num(j.at("phase"), path + ".phase");
  if (j.contains("sin")) {
    if (!j.at("sin").is_boolean()) bad(path + ".sin", "expected a boolean");
    if (j.at("sin").get<bool>()) t.phase -= 0.25;
  }
  return t;
}

TrigSum parse_sum(const json& j, const std::string& path, int base_dim) {
  TrigSum s;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      s.terms.push_back(
          parse_term(j[i], path + "[" + std::to_string(i) + "]", base_dim));
  } else if (j.is_object() && j.contains("terms")) {
    check_keys(j, path, {"terms", "offset"});
    const json& terms = j.at("terms");
    if (!terms.is_array()) bad(path + ".terms", "expected an array");
    for (std::size_t i = 0; i < terms.size(); ++i)
      s.terms.push_back(parse_term(
          terms[i], path + ".terms[" + std::to_string(i) + "]", base_dim));
    if (j.contains("offset")) s.offset = get_num(j.at("offset"), path + ".offset");
  } else if (j.is_object()) {
    s.terms.push_back(parse_term(j, path, base_dim));
  } else {
    bad(path,
        "expected a trig sum (term object, term array, or {terms, offset})");
  }
  return s;
}

std::vector<TrigSum> parse_coord_sums(const json& j, const std::string& path,
                                      int base_dim, int want) {
  std::vector<TrigSum> out;
  if (want == 1) {
    out.push_back(parse_sum(j, path, base_dim));
    return out;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != want)
    bad(path, "expected one trig sum per target coordinate (" +
                  std::to_string(want) + " entries)");
  for (int i = 0; i < want; ++i)
    out.push_back(
        parse_sum(j[i], path + "[" + std::to_string(i) + "]", base_dim));
  return out;
}

TrigSum default_cos(int base_dim) {
  TrigTerm t;
  t.freq.assign(static_cast<std::size_t>(base_dim), 0);
  t.freq[0] = 1;
  return TrigSum{{t}, 0.0};
}

TrigSum default_sin(int base_dim) {
  TrigSum s = default_cos(base_dim);
  s.terms[0].phase = -0.25;
  return s;
}

}  // namespace

Cocycle make_named_cocycle(const std::string& tag, const RotationSystem& base,
                           const GroupInstance& target,
                           const nlohmann::json& params) {
  const std::string P = "cocycle.params";
  if (!params.is_object() && !params.is_null())
    throw ConfigError(P, "expected an object");
  const json obj = params.is_null() ? json::object() : params;

  if (tag == "constant") {
    check_keys(obj, P, {"value"});
    if (!obj.contains("value"))
      bad(P + ".value", "required for the constant cocycle");
    const json& v = obj.at("value");
    GroupElement g(target.dim());
    if (v.is_number() && target.dim() == 1) {
      g[0] = v.get<double>();
    } else if (v.is_array() && static_cast<int>(v.size()) == target.dim()) {
      for (int i = 0; i < target.dim(); ++i)
        g[i] = get_num(v[i], P + ".value[" + std::to_string(i) + "]");
    } else {
      bad(P + ".value", "expected " + std::to_string(target.dim()) +
                            " coordinates for " + target.tag());
    }
    return Cocycle(base, target, ConstantGen{std::move(g)});
  }
  if (tag == "trig") {
    check_keys(obj, P, {"coords"});
    if (!obj.contains("coords"))
      bad(P + ".coords", "required for the trig cocycle");
    return Cocycle(base, target,
                   TrigMapGen{parse_coord_sums(obj.at("coords"), P + ".coords",
                                               base.dim(), target.dim())});
  }
  if (tag == "coboundary") {
    check_keys(obj, P, {"transfer"});
    if (!obj.contains("transfer"))
      bad(P + ".transfer", "required for the coboundary cocycle");
    return Cocycle(
        base, target,
        CoboundaryGen{parse_coord_sums(obj.at("transfer"), P + ".transfer",
                                       base.dim(), target.dim())});
  }
  if (tag == "anzai") {
    check_keys(obj, P, {});
    return Cocycle(base, target, AnzaiGen{});
  }
  if (tag == "heisenberg-lift") {
    check_keys(obj, P, {"a", "b"});
    TrigSum a = obj.contains("a") ? parse_sum(obj.at("a"), P + ".a", base.dim())
                                  : default_cos(base.dim());
    TrigSum b = obj.contains("b") ? parse_sum(obj.at("b"), P + ".b", base.dim())
                                  : default_sin(base.dim());
    return Cocycle(base, target,
                   HeisenbergLiftGen{std::move(a), std::move(b)});
  }
  if (tag == "product") {
    check_keys(obj, P, {"factors"});
    if (target.kind() != GroupInstance::Kind::DirectProduct)
      bad(P, "product cocycle requires a product target group, got " +
                 target.tag());
    if (!obj.contains("factors") || !obj.at("factors").is_array())
      bad(P + ".factors", "expected an array of {tag, params} entries");
    const json& factors = obj.at("factors");
    if (factors.size() != target.factors().size())
      bad(P + ".factors", "expected " +
                              std::to_string(target.factors().size()) +
                              " entries to match " + target.tag());
    std::vector<Cocycle> parts;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      const std::string fp = P + ".factors[" + std::to_string(i) + "]";
      const json& fj = factors[i];
      if (!fj.is_object()) bad(fp, "expected an object");
      check_keys(fj, fp, {"tag", "params"});
      if (!fj.contains("tag") || !fj.at("tag").is_string())
        bad(fp + ".tag", "required string");
      parts.push_back(make_named_cocycle(
          fj.at("tag").get<std::string>(), base, target.factors()[i],
          fj.contains("params") ? fj.at("params") : json()));
    }
    return Cocycle(base, target, ProductGen{std::move(parts)});
  }
  throw ConfigError("cocycle.tag",
                    "unknown cocycle tag '" + tag +
                        "'; valid tags: anzai, coboundary, constant, "
                        "heisenberg-lift, product, trig");
}

}  // namespace skewlab
