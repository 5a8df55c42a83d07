#include "egtw/synth/text_grammar.hpp"

#include <map>
#include <sstream>

#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"

namespace egtw::synth {

namespace {

struct TemplateNames {
    TemplateKind kind;
    const char* name;
    std::vector<const char*> phrasings;
};

const std::vector<TemplateNames>& table() {
    static const std::vector<TemplateNames> t = {
        {TemplateKind::StandStill, "stand-still", {"stand still", "hold the pose"}},
        {TemplateKind::WalkForward, "walk-forward", {"walk forward", "walk straight ahead"}},
        {TemplateKind::TurnLeft, "turn-left", {"turn left", "turn to the left"}},
        {TemplateKind::TurnRight, "turn-right", {"turn right", "turn to the right"}},
        {TemplateKind::LookUp, "look-up", {"look up", "tilt the head up"}},
        {TemplateKind::LookDown, "look-down", {"look down", "tilt the head down"}},
        {TemplateKind::Crouch, "crouch", {"crouch down", "bend the knees low"}},
        {TemplateKind::RaiseLeftHand, "raise-left-hand", {"raise the left hand", "lift the left hand up"}},
        {TemplateKind::RaiseRightHand, "raise-right-hand", {"raise the right hand", "lift the right hand up"}},
        {TemplateKind::WalkRaiseRight, "walk-raise-right", {"walk forward and raise the right hand"}},
    };
    return t;
}

} // namespace

TemplateKind template_kind_from_name(const std::string& name) {
    for (const auto& e : table())
        if (name == e.name) return e.kind;
    throw ValidationError("unknown motion template: " + name);
}

std::string template_name(TemplateKind kind) {
    for (const auto& e : table())
        if (kind == e.kind) return e.name;
    throw ValidationError("unknown template kind");
}

std::string template_text(TemplateKind kind, std::uint64_t seed) {
    for (const auto& e : table()) {
        if (kind != e.kind) continue;
        Rng rng(seed ^ fnv1a64("text"));
        return e.phrasings[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(e.phrasings.size()) - 1))];
    }
    throw ValidationError("unknown template kind");
}

TemplateKind template_from_text(const std::string& text) {
    for (const auto& e : table())
        for (const auto* p : e.phrasings)
            if (text == p) return e.kind;
    throw ValidationError("text does not match the grammar: " + text);
}

TextVocabulary::TextVocabulary() {
    words_.push_back("<pad>");
    std::map<std::string, bool> seen;
    for (const auto& e : table()) {
        for (const auto* p : e.phrasings) {
            std::istringstream is(p);
            std::string w;
            while (is >> w) {
                if (!seen.count(w)) {
                    seen[w] = true;
                    words_.push_back(w);
                }
            }
        }
    }
    if (size() > 64) throw ValidationError("vocabulary exceeds 64 words");
}

int TextVocabulary::id(const std::string& word) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (words_[i] == word) return static_cast<int>(i);
    throw ValidationError("word not in vocabulary: " + word);
}

const std::string& TextVocabulary::word(int id) const {
    if (id < 0 || id >= size()) throw ValidationError("token id out of range");
    return words_[static_cast<std::size_t>(id)];
}

std::vector<int> TextVocabulary::encode(const std::string& text, int length) const {
    std::vector<int> ids;
    std::istringstream is(text);
    std::string w;
    while (is >> w && static_cast<int>(ids.size()) < length) ids.push_back(id(w));
    while (static_cast<int>(ids.size()) < length) ids.push_back(pad_id());
    return ids;
}

const TextVocabulary& vocabulary() {
    static const TextVocabulary v;
    return v;
}

} // namespace egtw::synth
