#pragma once

#include <optional>
#include <string>

#include "voxagent/world.hpp"

namespace voxagent::instruction {

/// A decomposed low-level step: "<verb> [<count>] <object>".
struct ActionStep {
    std::string verb;
    std::string object;
    std::optional<int> quantity;
    std::string raw_text;

    bool operator==(const ActionStep&) const = default;
};

inline const char* const kStepVerbs[] = {"collect", "mine",  "craft",   "smelt",
                                         "place",   "equip", "explore", "locate"};

// Tolerant step-grammar parser: finds the verb, an optional count, and the
// object in free text, resolving config aliases and plural forms. Throws
// Error(ParseFailure) when no verb/object can be extracted or when an
// item-verb names an unknown object.
ActionStep parse_action_step(const world::WorldConfig& cfg, const std::string& text);

}  // namespace voxagent::instruction
