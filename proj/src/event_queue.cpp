#include "nanoflow/event_queue.hpp"

#include <tuple>

namespace nanoflow::simcore {

bool fires_before(const SimEvent& a, const SimEvent& b) {
  return std::tuple(a.time_s, static_cast<int>(a.kind), a.subject, a.seq) <
         std::tuple(b.time_s, static_cast<int>(b.kind), b.subject, b.seq);
}

SimEvent SimEventQueue::pop() {
  SimEvent e = heap_.top();
  heap_.pop();
  return e;
}

}  // namespace nanoflow::simcore
