#pragma once

#include <cstdint>

#include "egtw/kin/skeleton.hpp"
#include "egtw/synth/text_grammar.hpp"

namespace egtw::synth {

// Procedural motion from an action template. Deterministic given (template,
// seed); smooth (per-frame joint displacement stays below 0.2 m); the head
// trajectory obeys the template (e.g. turn-left yields the requested net yaw).
// The root stays upright (yaw-only rotation), which keeps the root-centric
// codec exact on generated data.
kin::MotionSequence generate_motion(const MotionTemplate& tmpl, const kin::Skeleton& skeleton,
                                    int frame_count, double fps, std::uint64_t seed);

// Seeded template parameters (walk distance, turn angle) for dataset
// generation; text stays magnitude-free, so prompts are deliberately
// ambiguous about them.
MotionTemplate randomized_template(TemplateKind kind, std::uint64_t seed);

} // namespace egtw::synth
