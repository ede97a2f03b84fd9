#include "farrkit/convgen.hpp"

#include <cctype>
#include <cstring>
#include <optional>

#include "farrkit/errors.hpp"

#include "internal_util.hpp"

namespace farrkit {

std::string to_string(Speaker s) {
    return s == Speaker::Novice ? "novice" : "expert";
}

std::string build_conversation_prompt(const Chunk& chunk) {
    return chunk.payload +
           "\n\n----\n\n"
           "Convert the write-up above into a self-sufficient generalized "
           "conversation without referring to this context.\n\n"
           "The conversation is a question from a novice pentester and a "
           "helpful answer from an expert pentester.\n\n"
           "The newbie always asking what to do next.\n\n"
           "The experts always provide reasoning explanations, then followed "
           "by examples.\n\n"
           "The conversation is multiple turns, step by step.";
}

namespace {

bool ci_match_at(const std::string& s, size_t pos, const char* word) {
    size_t len = std::strlen(word);
    if (pos + len > s.size()) return false;
    for (size_t k = 0; k < len; ++k)
        if (std::tolower((unsigned char)s[pos + k]) != word[k]) return false;
    return true;
}

// "NP: ...", "**Expert Pentester:** ..." and friends.
bool parse_label(const std::string& line, Speaker& speaker, std::string& rest) {
    static const std::pair<const char*, Speaker> kLabels[] = {
        {"newbie pentester", Speaker::Novice},
        {"novice pentester", Speaker::Novice},
        {"expert pentester", Speaker::Expert},
        {"newbie", Speaker::Novice},
        {"novice", Speaker::Novice},
        {"expert", Speaker::Expert},
        {"np", Speaker::Novice},
        {"ep", Speaker::Expert},
    };
    size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '*' || line[i] == '_' ||
                               line[i] == '>' || line[i] == '-'))
        ++i;
    for (const auto& [label, who] : kLabels) {
        if (!ci_match_at(line, i, label)) continue;
        size_t j = i + std::strlen(label);
        while (j < line.size() && (line[j] == '*' || line[j] == '_')) ++j;
        if (j >= line.size() || line[j] != ':') continue;
        speaker = who;
        rest = detail::trim(line.substr(j + 1));
        return true;
    }
    return false;
}

void append_turn(std::vector<ConversationTurn>& turns, Speaker speaker,
                 const std::string& content) {
    if (content.empty()) return;
    if (!turns.empty() && turns.back().role == speaker) {
        turns.back().content += "\n" + content;  // merge same-speaker blocks
    } else {
        turns.push_back({speaker, content});
    }
}

}  // namespace

std::vector<ConversationTurn> parse_conversation(const std::string& llm_output) {
    std::vector<ConversationTurn> turns;
    std::optional<Speaker> current;
    std::vector<std::string> lines;

    auto flush = [&]() {
        if (!current) return;
        append_turn(turns, *current, detail::trim(detail::join_lines(lines, "\n")));
        lines.clear();
    };

    for (const auto& line : detail::split_lines(llm_output)) {
        Speaker speaker;
        std::string rest;
        if (parse_label(line, speaker, rest)) {
            flush();
            current = speaker;
            lines.push_back(rest);
        } else if (current) {
            lines.push_back(line);
        }
        // prose before the first label is ignored
    }
    flush();
    if (turns.empty())
        throw NoTurnsFound("no speaker-labeled turns in model output");
    return turns;
}

ConversationSession assemble_session(
    const std::string& machine,
    const std::vector<std::vector<ConversationTurn>>& per_chunk_turns,
    std::string system_prompt) {
    ConversationSession session;
    session.machine = machine;
    session.system_prompt = std::move(system_prompt);
    for (const auto& chunk_turns : per_chunk_turns)
        for (const auto& t : chunk_turns)
            append_turn(session.turns, t.role, t.content);
    if (session.turns.empty())
        throw EmptySession("no conversation turns for machine " + machine);
    return session;
}

namespace {

std::string chatml_block(const char* role, const std::string& content) {
    return std::string("<|im_start|>") + role + "\n" + content + "<|im_end|>\n";
}

}  // namespace

std::string emit_chatml(const ConversationSession& session) {
    const std::string& sys = session.system_prompt.empty()
                                 ? kDefaultSystemPrompt
                                 : session.system_prompt;
    std::string out = chatml_block("system", sys);
    for (const auto& t : session.turns)
        out += chatml_block(t.role == Speaker::Novice ? "user" : "assistant",
                            t.content);
    return out;
}

std::vector<ConversationTurn> parse_chatml(const std::string& chatml) {
    static const std::string kStart = "<|im_start|>";
    static const std::string kEnd = "<|im_end|>";
    std::vector<ConversationTurn> turns;
    size_t pos = 0;
    for (;;) {
        size_t start = chatml.find(kStart, pos);
        if (start == std::string::npos) break;
        size_t nl = chatml.find('\n', start);
        if (nl == std::string::npos) break;
        std::string role = chatml.substr(start + kStart.size(),
                                         nl - start - kStart.size());
        size_t end = chatml.find(kEnd, nl + 1);
        if (end == std::string::npos) break;
        std::string content = chatml.substr(nl + 1, end - nl - 1);
        pos = end + kEnd.size();
        if (role == "user") turns.push_back({Speaker::Novice, content});
        else if (role == "assistant") turns.push_back({Speaker::Expert, content});
        // system block carries no turn
    }
    return turns;
}

}  // namespace farrkit
