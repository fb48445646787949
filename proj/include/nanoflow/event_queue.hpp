#pragma once

#include <cstdint>
#include <queue>
#include <vector>

namespace nanoflow::simcore {

/// Kinds in tie-break priority order.
enum class EventKind : int { Beacon = 0, Sense = 1, Reception = 2, Timeline = 3 };

struct SimEvent {
  double time_s = 0.0;
  EventKind kind = EventKind::Beacon;
  std::uint64_t subject = 0;
  /// Kind-specific sequence number (beacon index, sense tick, ...).
  std::uint64_t seq = 0;
};

/// Earliest first; equal times ordered by kind, then subject id.
bool fires_before(const SimEvent& a, const SimEvent& b);

class SimEventQueue {
 public:
  void push(const SimEvent& e) { heap_.push(e); }
  SimEvent pop();
  const SimEvent& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      return fires_before(b, a);
    }
  };
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
};

}  // namespace nanoflow::simcore
