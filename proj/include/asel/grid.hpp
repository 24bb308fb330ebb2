#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "asel/geometry.hpp"

namespace asel {

enum class NodeType : std::uint8_t { Exterior = 0, Interior = 1, BoundaryAdjacent = 2 };

/// Uniform tensor grid over [-1,1]^N masked to the open unit ball.
///
/// Nodes per axis M is odd so the origin is a node and the node set is
/// symmetric under every axis reflection.  Non-exterior nodes are numbered
/// compactly in lexicographic order (axis 0 slowest).  A node is boundary-
/// adjacent when some axis neighbor falls outside; the signed distance to
/// the sphere along that arm (<= h) is stored for the unequal-arm stencil.
template <int N>
class Grid {
 public:
  using Multi = std::array<int, N>;

  explicit Grid(int nodes_per_axis) : m_(nodes_per_axis) {
    detail::require(m_ >= 5 && m_ % 2 == 1, "Grid: nodes_per_axis must be odd and >= 5");
    h_ = 2.0 / (m_ - 1);
    std::int64_t total = 1;
    for (int a = 0; a < N; ++a) total *= m_;
    type_.assign(total, NodeType::Exterior);
    compact_.assign(total, -1);

    for (std::int64_t f = 0; f < total; ++f) {
      if (norm2<N>(coords(f)) < 1.0 - kRim) type_[f] = NodeType::Interior;
    }
    for (std::int64_t f = 0; f < total; ++f) {
      if (type_[f] == NodeType::Exterior) continue;
      const Multi mi = unpack(f);
      for (int a = 0; a < N; ++a) {
        for (int s = -1; s <= 1; s += 2) {
          Multi nb = mi;
          nb[a] += s;
          if (!contains(nb) || type_[pack(nb)] == NodeType::Exterior)
            type_[f] = NodeType::BoundaryAdjacent;
        }
      }
    }
    for (std::int64_t f = 0; f < total; ++f) {
      if (type_[f] == NodeType::Exterior) continue;
      compact_[f] = static_cast<std::int64_t>(nodes_.size());
      nodes_.push_back(f);
    }

    arms_.assign(nodes_.size(), {});
    for (std::size_t c = 0; c < nodes_.size(); ++c) {
      const Multi mi = unpack(nodes_[c]);
      const Vec<N> x = coords(nodes_[c]);
      for (int a = 0; a < N; ++a) {
        for (int s = -1; s <= 1; s += 2) {
          const int slot = 2 * a + (s > 0 ? 0 : 1);
          Multi nb = mi;
          nb[a] += s;
          if (contains(nb) && type_[pack(nb)] != NodeType::Exterior) {
            arms_[c][slot] = h_;
          } else {
            arms_[c][slot] = boundary_arm(x, a, s);
          }
        }
      }
    }

    reflect_.resize(nodes_.size());
    for (std::size_t c = 0; c < nodes_.size(); ++c) {
      Multi mi = unpack(nodes_[c]);
      mi[N - 1] = m_ - 1 - mi[N - 1];
      reflect_[c] = compact_[pack(mi)];
    }
  }

  int nodes_per_axis() const { return m_; }
  double h() const { return h_; }
  std::int64_t size() const { return static_cast<std::int64_t>(nodes_.size()); }

  NodeType type(std::int64_t full) const { return type_[full]; }
  NodeType type_of(std::int64_t compact) const { return type_[nodes_[compact]]; }
  std::int64_t compact_index(std::int64_t full) const { return compact_[full]; }
  std::int64_t full_index(std::int64_t compact) const { return nodes_[compact]; }

  bool contains(const Multi& mi) const {
    for (int a = 0; a < N; ++a)
      if (mi[a] < 0 || mi[a] >= m_) return false;
    return true;
  }

  std::int64_t pack(const Multi& mi) const {
    std::int64_t f = 0;
    for (int a = 0; a < N; ++a) f = f * m_ + mi[a];
    return f;
  }

  Multi unpack(std::int64_t f) const {
    Multi mi{};
    for (int a = N - 1; a >= 0; --a) {
      mi[a] = static_cast<int>(f % m_);
      f /= m_;
    }
    return mi;
  }

  Vec<N> coords(std::int64_t full) const {
    const Multi mi = unpack(full);
    Vec<N> x{};
    for (int a = 0; a < N; ++a) x[a] = -1.0 + mi[a] * h_;
    return x;
  }

  Vec<N> coords_compact(std::int64_t compact) const { return coords(nodes_[compact]); }

  /// Arm length toward (axis, sign); equals h unless the arm is cut by the sphere.
  double arm(std::int64_t compact, int axis, int sign) const {
    return arms_[compact][2 * axis + (sign > 0 ? 0 : 1)];
  }

  /// Compact index of the (axis, sign) neighbor, or -1 when it lies outside.
  std::int64_t neighbor(std::int64_t compact, int axis, int sign) const {
    Multi mi = unpack(nodes_[compact]);
    mi[axis] += sign;
    if (!contains(mi)) return -1;
    return compact_[pack(mi)];
  }

  /// Compact index of the x_N-mirror node (always non-exterior by symmetry).
  std::int64_t reflected(std::int64_t compact) const { return reflect_[compact]; }

  /// Cell volume h^N used by all grid quadrature.
  double cell_volume() const { return std::pow(h_, N); }

 private:
  static constexpr double kRim = 1e-14;

  double boundary_arm(const Vec<N>& x, int axis, int sign) const {
    // |x + s e_axis|^2 = 1 with s in (0, h]
    const double b = 2.0 * sign * x[axis];
    const double c = norm2<N>(x) - 1.0;
    const double s = 0.5 * (-b + std::sqrt(b * b - 4.0 * c));
    return std::min(s, h_);
  }

  int m_;
  double h_;
  std::vector<NodeType> type_;
  std::vector<std::int64_t> compact_;
  std::vector<std::int64_t> nodes_;
  std::vector<std::array<double, 2 * N>> arms_;
  std::vector<std::int64_t> reflect_;
};

}  // namespace asel
