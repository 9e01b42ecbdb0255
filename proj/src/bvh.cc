#include "aos/bvh.h"

#include <algorithm>
#include <numeric>

namespace aos {
namespace {

constexpr int kBins = 16;

}  // namespace

Bvh::Bvh(std::span<const Aabb> boxes, int max_leaf_size) {
  if (boxes.empty()) return;
  prims_.resize(boxes.size());
  std::iota(prims_.begin(), prims_.end(), 0u);
  std::vector<Vec3> centers(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) centers[i] = boxes[i].center();
  nodes_.reserve(2 * boxes.size() / std::max(1, max_leaf_size) + 1);
  nodes_.emplace_back();
  // Iterative build keeps the native stack shallow for large scenes.
  struct Task {
    std::uint32_t node, begin, end, depth;
  };
  std::vector<Task> tasks{{0, 0, static_cast<std::uint32_t>(boxes.size()), 0}};
  while (!tasks.empty()) {
    const Task task = tasks.back();
    tasks.pop_back();
    Aabb bounds;
    Aabb centroid_bounds;
    for (std::uint32_t i = task.begin; i < task.end; ++i) {
      bounds.extend(boxes[prims_[i]]);
      centroid_bounds.extend(centers[prims_[i]]);
    }
    nodes_[task.node].box = bounds;
    const std::uint32_t n = task.end - task.begin;
    auto make_leaf = [&] {
      nodes_[task.node].first = task.begin;
      nodes_[task.node].count = n;
    };
    if (n <= static_cast<std::uint32_t>(max_leaf_size)) {
      make_leaf();
      continue;
    }
    const Vec3 extent = centroid_bounds.hi - centroid_bounds.lo;
    int axis = 0;
    if (extent.y > extent[axis]) axis = 1;
    if (extent.z > extent[axis]) axis = 2;
    if (extent[axis] <= 0.0) {
      make_leaf();
      continue;
    }

    std::uint32_t mid = task.begin + n / 2;
    auto first = prims_.begin() + task.begin;
    auto last = prims_.begin() + task.end;
    const double lo = centroid_bounds.lo[axis];
    const double scale = kBins / extent[axis];
    auto bin_of = [&](std::uint32_t prim) {
      return std::min(kBins - 1,
                      static_cast<int>((centers[prim][axis] - lo) * scale));
    };

    bool split_found = false;
    if (task.depth < 48) {
      std::array<Aabb, kBins> bin_box;
      std::array<std::uint32_t, kBins> bin_count{};
      for (auto it = first; it != last; ++it) {
        const int b = bin_of(*it);
        bin_box[b].extend(boxes[*it]);
        ++bin_count[b];
      }
      std::array<double, kBins> right_cost{};
      Aabb acc;
      std::uint32_t acc_n = 0;
      for (int b = kBins - 1; b > 0; --b) {
        acc.extend(bin_box[b]);
        acc_n += bin_count[b];
        right_cost[b] = acc.surface_area() * acc_n;
      }
      double best = std::numeric_limits<double>::infinity();
      int best_split = -1;
      acc = Aabb{};
      acc_n = 0;
      for (int b = 0; b < kBins - 1; ++b) {
        acc.extend(bin_box[b]);
        acc_n += bin_count[b];
        if (acc_n == 0 || acc_n == n) continue;
        const double cost = acc.surface_area() * acc_n + right_cost[b + 1];
        if (cost < best) {
          best = cost;
          best_split = b;
        }
      }
      const double leaf_cost = bounds.surface_area() * n;
      if (best_split >= 0) {
        if (n <= 16 && best >= leaf_cost) {
          make_leaf();
          continue;
        }
        auto pivot = std::stable_partition(
            first, last, [&](std::uint32_t p) { return bin_of(p) <= best_split; });
        mid = static_cast<std::uint32_t>(pivot - prims_.begin());
        split_found = mid > task.begin && mid < task.end;
      }
    }
    if (!split_found) {
      // Median split, ties broken by primitive index for determinism.
      mid = task.begin + n / 2;
      std::nth_element(first, prims_.begin() + mid, last,
                       [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = centers[a][axis];
                         const double cb = centers[b][axis];
                         return ca < cb || (ca == cb && a < b);
                       });
    }

    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    nodes_[task.node].first = left;
    nodes_[task.node].count = 0;
    tasks.push_back({left + 1, mid, task.end, task.depth + 1});
    tasks.push_back({left, task.begin, mid, task.depth + 1});
  }
}

}  // namespace aos
