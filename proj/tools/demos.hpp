#ifndef KINESIM_TOOLS_DEMOS_HPP_
#define KINESIM_TOOLS_DEMOS_HPP_

#include <cstdint>

#include "kinesim/scene.hpp"

namespace kinesim::demos {

/// Keyframe rate of the demo tracks.
inline constexpr double kKeyRate = 20.0;
/// Time given to each motion segment.
inline constexpr double kSegment = 2.0;

/// generic6r sweeping one joint at a time, with a frame object riding on
/// every link ("frame1" .. "frame6").
SceneDocument dh_walkthrough();

/// generic6r reaching four seeded targets in turn.
SceneDocument ik_sequence(std::uint64_t seed);

/// generic6r picks up "crate", carries it and puts it down. The carry phase
/// spans [kCarryStart, kCarryEnd].
SceneDocument pick_and_place();
inline constexpr double kCarryStart = kSegment;
inline constexpr double kCarryEnd = 2 * kSegment;

}  // namespace kinesim::demos

#endif  // KINESIM_TOOLS_DEMOS_HPP_
