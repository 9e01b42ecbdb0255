#ifndef AOS_BVH_H_
#define AOS_BVH_H_

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "aos/geometry.h"

namespace aos {

// Bounding volume hierarchy over primitive boxes, built by binned SAH.
// Immutable after construction; queries are thread-safe.
class Bvh {
 public:
  Bvh() = default;
  explicit Bvh(std::span<const Aabb> boxes, int max_leaf_size = 4);

  bool empty() const { return nodes_.empty(); }
  std::size_t node_count() const { return nodes_.size(); }

  // Visits primitives whose boxes the ray may hit within (t_min, t_max).
  // `visit(prim, t_max)` tests one primitive, may shrink t_max, and returns
  // true to stop the traversal (any-hit queries).
  template <typename Visit>
  void traverse(const Ray& ray, double t_min, double& t_max, Visit&& visit) const;

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // child index for inner nodes, prim offset for leaves
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  static bool slab_test(const Aabb& b, const Vec3& origin, const Vec3& inv,
                        double t_min, double t_max, double& t_enter);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> prims_;
};

inline bool Bvh::slab_test(const Aabb& b, const Vec3& o, const Vec3& inv,
                           double t_min, double t_max, double& t_enter) {
  // NaN from 0 * inf is dropped by the min/max argument order.
  for (int axis = 0; axis < 3; ++axis) {
    const double t1 = (b.lo[axis] - o[axis]) * inv[axis];
    const double t2 = (b.hi[axis] - o[axis]) * inv[axis];
    t_min = std::max(t_min, std::min(t1, t2));
    t_max = std::min(t_max, std::max(t1, t2));
  }
  t_enter = t_min;
  return t_min <= t_max;
}

template <typename Visit>
void Bvh::traverse(const Ray& ray, double t_min, double& t_max,
                   Visit&& visit) const {
  if (nodes_.empty()) return;
  const Vec3 inv{1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z};
  std::array<std::uint32_t, 128> stack;
  int top = 0;
  double t_enter = 0.0;
  if (!slab_test(nodes_[0].box, ray.origin, inv, t_min, t_max, t_enter)) return;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!slab_test(node.box, ray.origin, inv, t_min, t_max, t_enter)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = 0; i < node.count; ++i) {
        if (visit(prims_[node.first + i], t_max)) return;
      }
      continue;
    }
    const std::uint32_t left = node.first;
    const std::uint32_t right = node.first + 1;
    double t_left = 0.0;
    double t_right = 0.0;
    const bool hit_left =
        slab_test(nodes_[left].box, ray.origin, inv, t_min, t_max, t_left);
    const bool hit_right =
        slab_test(nodes_[right].box, ray.origin, inv, t_min, t_max, t_right);
    if (hit_left && hit_right) {
      // Push the far child first so the near one is visited next.
      if (t_left <= t_right) {
        stack[top++] = right;
        stack[top++] = left;
      } else {
        stack[top++] = left;
        stack[top++] = right;
      }
    } else if (hit_left) {
      stack[top++] = left;
    } else if (hit_right) {
      stack[top++] = right;
    }
  }
}

}  // namespace aos

#endif  // AOS_BVH_H_
