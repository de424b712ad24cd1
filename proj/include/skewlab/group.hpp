#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace skewlab {

/// Group elements are flat coordinate vectors; the paired GroupInstance
/// interprets them. Heisenberg elements are (a, b, c), matching the upper
/// unitriangular matrix [[1,a,c],[0,1,b],[0,0,1]].
using GroupElement = Eigen::VectorXd;

/// A concrete locally compact group from the supported catalogue. Value
/// type; direct products hold their factors and lay elements out as the
/// concatenation of factor blocks.
class GroupInstance {
 public:
  enum class Kind {
    RealVector,
    IntegerLattice,
    Torus,
    HeisenbergReal,
    HeisenbergDiscrete,
    DirectProduct,
  };

  static GroupInstance real_vector(int d);
  static GroupInstance integer_lattice(int d);
  static GroupInstance torus(int d);
  static GroupInstance heisenberg_real();
  static GroupInstance heisenberg_discrete();
  static GroupInstance direct_product(std::vector<GroupInstance> factors);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }  // flattened coordinate count
  const std::vector<GroupInstance>& factors() const { return factors_; }
  int factor_offset(std::size_t i) const;

  bool abelian() const;
  /// Every supported kind is nilpotent (abelian or 2-step Heisenberg);
  /// products of nilpotent factors stay nilpotent.
  bool nilpotent() const { return true; }
  /// Coordinates restricted to integers (lattice kinds).
  bool discrete() const;
  bool compact() const;

  /// Stable tag, e.g. "real:2", "torus:1", "heisenberg-real",
  /// "product(torus:1,real:1)". Round-trips through from_tag.
  std::string tag() const;
  static GroupInstance from_tag(const std::string& tag);

  friend bool operator==(const GroupInstance& a, const GroupInstance& b) {
    return a.tag() == b.tag();
  }

 private:
  GroupInstance(Kind kind, int dim) : kind_(kind), dim_(dim) {}
  Kind kind_;
  int dim_;
  std::vector<GroupInstance> factors_;
  std::vector<int> offsets_;
};

GroupElement identity(const GroupInstance& G);
void check_element(const GroupInstance& G, const GroupElement& g);

using ConstElemRef = Eigen::Ref<const Eigen::VectorXd>;
using MutElemRef = Eigen::Ref<Eigen::VectorXd>;

/// acc <- g . acc on raw coordinate refs (segment-friendly, no checks).
void compose_ref(const GroupInstance& G, ConstElemRef g, MutElemRef acc);
/// out <- g^{-1} on raw refs (no checks; out may not alias g).
void invert_ref(const GroupInstance& G, ConstElemRef g, MutElemRef out);

/// Group law. Torus coordinates are wrapped back into [0,1); Heisenberg uses
/// (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a b').
GroupElement compose(const GroupInstance& G, const GroupElement& g,
                     const GroupElement& h);
/// acc <- g . acc without allocating (hot-loop form).
void compose_into(const GroupInstance& G, const GroupElement& g,
                  GroupElement& acc);

GroupElement invert(const GroupInstance& G, const GroupElement& g);
/// out <- g^{-1} without allocating (out may not alias g).
void invert_into(const GroupInstance& G, const GroupElement& g,
                 GroupElement& out);

/// g h g^{-1}.
GroupElement conjugate(const GroupInstance& G, const GroupElement& g,
                       const GroupElement& h);

/// Left-invariant distance: Euclidean on g^{-1}h for vector kinds, max
/// circle distance on tori, the homogeneous gauge
/// N(a,b,c) = ((a^2+b^2)^2 + c^2)^(1/4) on Heisenberg, max over factors on
/// products. On Heisenberg N(g) and N(g^{-1}) differ by a bounded factor;
/// neighbourhood logic treats the gauge as symmetric and lets tolerances
/// absorb the constant.
double group_distance(const GroupInstance& G, const GroupElement& g,
                      const GroupElement& h);
/// group_distance from the identity.
double group_norm(const GroupInstance& G, const GroupElement& g);

/// Closed subgroup selection for quotient bookkeeping. A spec is a base kind
/// plus an optional conjugator c, denoting c H c^{-1}.
class SubgroupSpec {
 public:
  enum class Kind {
    Trivial,
    Full,
    CenterOfHeisenberg,
    LatticeZd,
    TorusCyclic,
    VectorSubspace,
    ProductOfSpecs,
  };

  static SubgroupSpec trivial();
  static SubgroupSpec full();
  static SubgroupSpec center_of_heisenberg();
  static SubgroupSpec lattice_zd(int d);
  /// Finite cyclic subgroup of Torus(d) generated by the rational point
  /// (num[i]/den[i])_i; den entries in [1, 10^6], subgroup order capped at
  /// 10^6.
  static SubgroupSpec torus_cyclic(std::vector<std::int64_t> num,
                                   std::vector<std::int64_t> den);
  /// Linear subspace of RealVector(d); basis columns need not be
  /// orthonormal.
  static SubgroupSpec vector_subspace(Eigen::MatrixXd basis);
  static SubgroupSpec product(std::vector<SubgroupSpec> parts);

  SubgroupSpec conjugated_by(GroupElement c) const;

  Kind kind() const { return kind_; }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const std::vector<std::int64_t>& num() const { return num_; }
  const std::vector<std::int64_t>& den() const { return den_; }
  int lattice_dim() const { return lattice_dim_; }
  const std::vector<SubgroupSpec>& parts() const { return parts_; }
  bool has_conjugator() const { return conjugator_.size() > 0; }
  const GroupElement& conjugator() const { return conjugator_; }

  std::string tag() const;

 private:
  explicit SubgroupSpec(Kind kind) : kind_(kind) {}
  Kind kind_;
  Eigen::MatrixXd basis_;   // VectorSubspace
  std::vector<std::int64_t> num_, den_;  // TorusCyclic
  int lattice_dim_ = 0;
  std::vector<SubgroupSpec> parts_;
  GroupElement conjugator_;
};

/// Canonical coset representative of gH. Idempotent; two elements share a
/// representative iff g^{-1}g' lies in H (exactly for lattice / center /
/// cyclic kinds, to 1e-9 for subspace kinds). Throws
/// UnsupportedQuotientError for pairs without a representative rule.
GroupElement quotient_project(const GroupInstance& G, const SubgroupSpec& H,
                              const GroupElement& g);

/// Distance between cosets measured through canonical representatives:
/// group_distance(1, project(g^{-1} h)).
double quotient_distance(const GroupInstance& G, const SubgroupSpec& H,
                         const GroupElement& g, const GroupElement& h);

/// Finite sampling grid for infimum searches: parameter box [-range, range]
/// with the given step per axis, total point count capped (the step is
/// widened if the cap would be exceeded).
struct SearchGrid {
  double range = 2.0;
  double step = 0.01;
  std::size_t max_points = 400'000;
};

/// Deterministic finite sample of H intersected with the grid box.
std::vector<GroupElement> subgroup_grid(const GroupInstance& G,
                                        const SubgroupSpec& H,
                                        const SearchGrid& grid);

/// Upper bound for inf over h1, h2 in H of distance(1, h1 g h2), by direct
/// search over the sampled grid. For g in H this comes out at grid
/// resolution; bounded away from 0 for g whose double coset misses the
/// identity.
double double_coset_infimum(const GroupInstance& G, const SubgroupSpec& H,
                            const GroupElement& g, const SearchGrid& grid);

/// Upper bound for inf over h in G of distance(1, h g h^{-1}) by grid
/// search. Throws DegenerateInputError for g = 1.
double conjugacy_class_infimum(const GroupInstance& G, const GroupElement& g,
                               const SearchGrid& grid);

}  // namespace skewlab
