#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <vector>

#include "subsplat/splat/types.hpp"

namespace subsplat::pipeline {

/// Ordered store of registered views shared by tracker, mapper, and loop
/// closure. Writers replace a whole view and bump its generation; readers
/// take copies under the lock, so a snapshot is never a mix of generations.
class KeyframeBuffer {
 public:
  int append(splat::RegisteredView view);

  /// Consistent copy of one view (with the generation it had).
  splat::RegisteredView snapshot(int keyframe_id, uint64_t* generation = nullptr) const;
  std::vector<splat::RegisteredView> snapshot_all() const;

  /// Applies `update` to the stored view and increments its generation.
  void update(int keyframe_id, const std::function<void(splat::RegisteredView&)>& update);

  uint64_t generation(int keyframe_id) const;
  size_t size() const;

  /// Direct access for the single-threaded deterministic pipeline (no other
  /// reader or writer may be active). Mutations through this reference do not
  /// bump generations; use update() when sharing the buffer across threads.
  splat::RegisteredView& unsafe_view(int keyframe_id) { return views_.at(size_t(keyframe_id)); }
  const splat::RegisteredView& unsafe_view(int keyframe_id) const {
    return views_.at(size_t(keyframe_id));
  }

 private:
  mutable std::mutex mutex_;
  std::vector<splat::RegisteredView> views_;
  std::vector<uint64_t> generations_;
};

}  // namespace subsplat::pipeline
