#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace egtw::synth {

enum class TemplateKind {
    StandStill,
    WalkForward,
    TurnLeft,
    TurnRight,
    LookUp,
    LookDown,
    Crouch,
    RaiseLeftHand,
    RaiseRightHand,
    WalkRaiseRight, // composite
};

constexpr int kTemplateKindCount = 10;

// A fully parameterized action request. Template text deliberately omits the
// magnitudes, so identical prompts can correspond to different motions.
struct MotionTemplate {
    TemplateKind kind = TemplateKind::StandStill;
    double walk_distance = 1.6;     // meters, walk templates
    double turn_angle_deg = 90;     // turn templates
    double action_start_frac = 0.0; // fraction of the clip before the action begins
    double action_duration_frac = 1.0;
};

// Template names accepted on the CLI: stand-still, walk-forward, turn-left,
// turn-right, look-up, look-down, crouch, raise-left-hand, raise-right-hand,
// walk-raise-right. Throws ValidationError for unknown names.
TemplateKind template_kind_from_name(const std::string& name);
std::string template_name(TemplateKind kind);

// Deterministic action string from the fixed grammar (seed picks phrasing).
std::string template_text(TemplateKind kind, std::uint64_t seed);

// Best-effort inverse used by the toy feature providers; throws if no known
// phrasing matches.
TemplateKind template_from_text(const std::string& text);

// Whitespace tokenizer over the fixed vocabulary (<= 64 words, pad id 0).
class TextVocabulary {
public:
    TextVocabulary();
    int size() const { return static_cast<int>(words_.size()); }
    int pad_id() const { return 0; }
    int id(const std::string& word) const; // throws on unknown word
    const std::string& word(int id) const;

    // Fixed-length token ids: truncation or padding to `length`.
    std::vector<int> encode(const std::string& text, int length) const;

private:
    std::vector<std::string> words_;
};

const TextVocabulary& vocabulary();

} // namespace egtw::synth
