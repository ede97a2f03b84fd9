#pragma once

#include <string>
#include <vector>

#include "farrkit/corpus.hpp"

namespace farrkit {

inline constexpr const char* kDefaultSystemPrompt =
    "You are a helpful penetration testing assistant.";

enum class Speaker { Novice, Expert };

std::string to_string(Speaker s);

struct ConversationTurn {
    Speaker role = Speaker::Novice;
    std::string content;

    bool operator==(const ConversationTurn&) const = default;
};

struct ConversationSession {
    std::string machine;
    std::vector<ConversationTurn> turns;
    std::string system_prompt;  // empty = default prompt at emission
};

std::string build_conversation_prompt(const Chunk& chunk);

// Recognizes NP:/EP:/Newbie:/Novice:/Expert: speaker labels (an optional
// "pentester" suffix tolerated); consecutive same-speaker blocks are merged.
// Throws NoTurnsFound.
std::vector<ConversationTurn> parse_conversation(const std::string& llm_output);

// Concatenates per-chunk turn lists in order, merging same-speaker turns at
// the joins. Throws EmptySession.
ConversationSession assemble_session(
    const std::string& machine,
    const std::vector<std::vector<ConversationTurn>>& per_chunk_turns,
    std::string system_prompt = "");

// <|im_start|>{role}\n{content}<|im_end|> blocks: system first,
// novice -> user, expert -> assistant.
std::string emit_chatml(const ConversationSession& session);

// Inverse of emit_chatml for our own output; the system block is skipped.
std::vector<ConversationTurn> parse_chatml(const std::string& chatml);

}  // namespace farrkit
