#pragma once

namespace sep {

enum class Event { Start, NewMax, NewMin, Interior };

// Snapshot of (B_t, max, min) as tracked on the critical grid.
struct ExtremaState {
  double pos;
  double max;
  double min;
  Event event = Event::Start;
};

}  // namespace sep
