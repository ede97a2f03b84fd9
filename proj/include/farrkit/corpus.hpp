#pragma once

#include <string>
#include <vector>

#include "farrkit/errors.hpp"

namespace farrkit {

enum class Difficulty { Easy, Medium, Hard, Insane };

std::string to_string(Difficulty d);
Difficulty difficulty_from_string(const std::string& s);  // throws SchemaViolation

struct WriteupDocument {
    std::string machine_name;
    Difficulty difficulty = Difficulty::Easy;
    std::string source_path;
    std::string body;
};

struct HeaderRef {
    int level = 1;  // 1..6
    std::string title;

    bool operator==(const HeaderRef&) const = default;
};

// Body text under one header, excluding child sections. Root text (before any
// header) gets an empty header_path.
struct Section {
    std::vector<HeaderRef> header_path;  // ancestry, root -> leaf
    std::string text;
    int order_index = 0;
};

struct Chunk {
    int index = 0;
    std::vector<HeaderRef> header_path;  // leading section's ancestry
    std::string payload;
    int token_estimate = 0;
};

// `![alt](url)` -> alt. Applied at ingestion, before parsing.
std::string strip_images(const std::string& body);

std::vector<Section> parse_markdown(const std::string& body);

int estimate_tokens(const std::string& text, int chars_per_token = 4);

// Greedy packing of whole sections up to target_tokens; oversized sections are
// split at paragraph boundaries (fenced code blocks are never split). Every
// payload starts with the leading section's ancestry as markdown header lines.
std::vector<Chunk> chunk_document(const WriteupDocument& doc, int target_tokens,
                                  int chars_per_token = 4);

std::string render_header_line(const HeaderRef& h);

// True when the line opens/closes a ``` or ~~~ fence.
bool is_fence_line(const std::string& line);

}  // namespace farrkit
