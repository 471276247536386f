#include "subsplat/pipeline/buffer.hpp"

#include <stdexcept>

namespace subsplat::pipeline {

int KeyframeBuffer::append(splat::RegisteredView view) {
  std::lock_guard<std::mutex> lock(mutex_);
  const int id = int(views_.size());
  if (view.keyframe_id != id)
    throw std::invalid_argument("KeyframeBuffer: keyframe ids must be appended in order");
  views_.push_back(std::move(view));
  generations_.push_back(0);
  return id;
}

splat::RegisteredView KeyframeBuffer::snapshot(int keyframe_id, uint64_t* generation) const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (generation) *generation = generations_.at(size_t(keyframe_id));
  return views_.at(size_t(keyframe_id));
}

std::vector<splat::RegisteredView> KeyframeBuffer::snapshot_all() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return views_;
}

void KeyframeBuffer::update(int keyframe_id,
                            const std::function<void(splat::RegisteredView&)>& update) {
  std::lock_guard<std::mutex> lock(mutex_);
  update(views_.at(size_t(keyframe_id)));
  ++generations_.at(size_t(keyframe_id));
}

uint64_t KeyframeBuffer::generation(int keyframe_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return generations_.at(size_t(keyframe_id));
}

size_t KeyframeBuffer::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return views_.size();
}

}  // namespace subsplat::pipeline
