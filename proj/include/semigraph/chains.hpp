#pragma once

// Chains of ball unions: formal chain validation, mesh, refinement.

#include "semigraph/formal.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace semigraph {

/// The links (J_{j_0}, ..., J_{j_m}) of a chain of unions.
using ChainCode = FamilyCode;

/// Raised when an operation is called outside its documented preconditions.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

/// Nonadjacent links are formally disjoint.
inline bool is_formal_chain(const ChainCode& c) {
  if (c.size() <= 2) return true;
  if (c.ball_count() <= 256) {
    for (std::size_t u = 0; u < c.size(); ++u)
      for (std::size_t v = u + 2; v < c.size(); ++v)
        if (!f_disjoint_unions(c.links[u], c.links[v])) return false;
    return true;
  }
  // Two balls that are not formally disjoint have centers within the sum of
  // their radii.
  BallIndex idx(c.links);
  for (const auto& e : idx.entries()) {
    bool bad = false;
    idx.near(e.ball->center_d, e.ball->radius_d * (1 + 1e-9), [&](const BallIndex::Entry& o) {
      if (bad) return;
      std::uint32_t gap = e.owner > o.owner ? e.owner - o.owner : o.owner - e.owner;
      if (gap > 1 && !f_disjoint_balls(*e.ball, *o.ball)) bad = true;
    });
    if (bad) return false;
  }
  return true;
}

/// LESS iff max_u fdiam(j_u) < bound; an upper bound for the mesh of the
/// closed links.
inline Bound mesh_cmp(const ChainCode& c, const Rational& bound) { return fmesh_cmp(c, bound); }

/// For each link of `fine`, the index of a coarse link containing it formally.
struct RefinementWitness {
  std::vector<std::size_t> map;

  std::size_t operator[](std::size_t i) const { return map.at(i); }
  std::size_t size() const { return map.size(); }
};

/// The least-index witness of fine <=_forall coarse, if there is one.
inline std::optional<RefinementWitness> refinement_witness(const ChainCode& fine, const ChainCode& coarse) {
  RefinementWitness w;
  for (const auto& u : fine.links) {
    std::optional<std::size_t> hit;
    for (std::size_t v = 0; v < coarse.size() && !hit; ++v)
      if (f_contained_unions(u, coarse.links[v])) hit = v;
    if (!hit) return std::nullopt;
    w.map.push_back(*hit);
  }
  return w;
}

/// Every fine link is formally inside some coarse link, the first inside the
/// first and the last inside the last.
inline bool strongly_refines(const ChainCode& fine, const ChainCode& coarse) {
  if (fine.size() == 0 || coarse.size() == 0) return false;
  return f_contained_unions(fine.first(), coarse.first()) && f_contained_unions(fine.last(), coarse.last()) &&
         f_contained_families(fine, coarse);
}

/// The least r with p < r < q and witness(r) = k, for a witness mapping
/// p to i and q to j with i < k < j.
inline std::size_t find_intermediate_link(const RefinementWitness& w, std::size_t p, std::size_t q, std::size_t i,
                                          std::size_t k, std::size_t j) {
  if (!(i < k && k < j) || !(p < q) || q >= w.size() || w[p] != i || w[q] != j)
    throw ContractViolation("find_intermediate_link: preconditions do not hold");
  for (std::size_t r = p + 1; r < q; ++r)
    if (w[r] == k) return r;
  throw ContractViolation("find_intermediate_link: no link maps to k between p and q");
}

}  // namespace semigraph
