#include "farrkit/corpus.hpp"

#include <algorithm>
#include <cctype>

namespace farrkit {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return (char)std::tolower(c); });
    return s;
}

std::string rstrip(std::string s) {
    while (!s.empty() && std::isspace((unsigned char)s.back())) s.pop_back();
    return s;
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    lines.push_back(cur);
    return lines;
}

std::string join(const std::vector<std::string>& lines, const char* sep) {
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (i) out += sep;
        out += lines[i];
    }
    return out;
}

// "# Title" -> (1, "Title"); exactly one separator space is consumed so the
// line reconstructs byte-exactly from level + title.
bool parse_header_line(const std::string& line, int& level, std::string& title) {
    size_t n = 0;
    while (n < line.size() && line[n] == '#') ++n;
    if (n == 0 || n > 6) return false;
    if (n < line.size() && line[n] != ' ') return false;
    size_t start = n < line.size() ? n + 1 : n;
    level = (int)n;
    title = rstrip(line.substr(std::min(start, line.size())));
    return true;
}

}  // namespace

std::string to_string(Difficulty d) {
    switch (d) {
        case Difficulty::Easy: return "Easy";
        case Difficulty::Medium: return "Medium";
        case Difficulty::Hard: return "Hard";
        case Difficulty::Insane: return "Insane";
    }
    return "Easy";
}

Difficulty difficulty_from_string(const std::string& s) {
    std::string t = lower(s);
    if (t == "easy") return Difficulty::Easy;
    if (t == "medium") return Difficulty::Medium;
    if (t == "hard") return Difficulty::Hard;
    if (t == "insane") return Difficulty::Insane;
    throw SchemaViolation("unknown difficulty: " + s);
}

std::string render_header_line(const HeaderRef& h) {
    std::string line(std::max(1, h.level), '#');
    if (!h.title.empty()) {
        line += ' ';
        line += h.title;
    }
    return line;
}

bool is_fence_line(const std::string& line) {
    size_t i = 0;
    while (i < line.size() && line[i] == ' ') ++i;
    if (i > 3) return false;
    if (line.size() - i < 3) return false;
    return line.compare(i, 3, "```") == 0 || line.compare(i, 3, "~~~") == 0;
}

std::string strip_images(const std::string& body) {
    std::string out;
    out.reserve(body.size());
    size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '!' && i + 1 < body.size() && body[i + 1] == '[') {
            size_t close = body.find(']', i + 2);
            if (close != std::string::npos && close + 1 < body.size() &&
                (body[close + 1] == '(' || body[close + 1] == '[')) {
                char end = body[close + 1] == '(' ? ')' : ']';
                size_t stop = body.find(end, close + 2);
                if (stop != std::string::npos) {
                    out += body.substr(i + 2, close - (i + 2));  // keep alt text
                    i = stop + 1;
                    continue;
                }
            }
        }
        out += body[i++];
    }
    return out;
}

std::vector<Section> parse_markdown(const std::string& body) {
    auto lines = split_lines(body);
    std::vector<Section> sections;
    std::vector<HeaderRef> stack;
    std::vector<std::string> cur;
    bool in_fence = false;
    bool any_header = false;
    int order = 0;

    auto flush_text = [&]() { return rstrip(join(cur, "\n")); };

    for (const auto& line : lines) {
        int level = 0;
        std::string title;
        if (!in_fence && parse_header_line(line, level, title)) {
            std::string text = flush_text();
            if (any_header) {
                sections.push_back({stack, text, order++});
            } else if (!text.empty()) {
                sections.push_back({{}, text, order++});  // root preamble
            }
            cur.clear();
            any_header = true;
            while (!stack.empty() && stack.back().level >= level) stack.pop_back();
            stack.push_back({level, title});
            continue;
        }
        if (is_fence_line(line)) in_fence = !in_fence;
        cur.push_back(line);
    }
    if (any_header) {
        sections.push_back({stack, flush_text(), order++});
    } else {
        sections.push_back({{}, flush_text(), order++});
    }
    return sections;
}

int estimate_tokens(const std::string& text, int chars_per_token) {
    if (chars_per_token < 1)
        throw std::invalid_argument("chars_per_token must be >= 1");
    return (int)((text.size() + (size_t)chars_per_token - 1) /
                 (size_t)chars_per_token);
}

namespace {

std::string render_ancestry(const std::vector<HeaderRef>& path) {
    std::string out;
    for (const auto& h : path) {
        out += render_header_line(h);
        out += '\n';
    }
    return out;
}

// First section carries its full ancestry; followers contribute their own
// header line before their text.
std::string render_run(const std::vector<const Section*>& run) {
    std::string out;
    for (size_t k = 0; k < run.size(); ++k) {
        const Section& s = *run[k];
        if (k == 0) {
            out += render_ancestry(s.header_path);
        } else if (!s.header_path.empty()) {
            out += render_header_line(s.header_path.back());
            out += '\n';
        }
        if (!s.text.empty()) {
            out += s.text;
            out += '\n';
        }
    }
    return rstrip(out);
}

// Blank-line paragraph units; blank lines inside code fences do not split.
std::vector<std::string> split_paragraphs(const std::string& text) {
    auto lines = split_lines(text);
    std::vector<std::string> paras;
    std::vector<std::string> cur;
    bool in_fence = false;
    for (const auto& line : lines) {
        if (!in_fence && is_blank(line)) {
            if (!cur.empty()) {
                paras.push_back(join(cur, "\n"));
                cur.clear();
            }
            continue;
        }
        if (is_fence_line(line)) in_fence = !in_fence;
        cur.push_back(line);
    }
    if (!cur.empty()) paras.push_back(join(cur, "\n"));
    return paras;
}

void push_chunk(std::vector<Chunk>& chunks, const std::vector<HeaderRef>& path,
                std::string payload, int cpt) {
    int estimate = estimate_tokens(payload, cpt);
    chunks.push_back({(int)chunks.size(), path, std::move(payload), estimate});
}

void pack_oversized(const Section& s, int target, int cpt,
                    std::vector<Chunk>& chunks) {
    std::string prefix = render_ancestry(s.header_path);
    auto paras = split_paragraphs(s.text);
    if (paras.empty()) {  // oversized ancestry alone; keep the headers
        push_chunk(chunks, s.header_path, rstrip(prefix), cpt);
        return;
    }
    std::vector<std::string> cur;
    auto flush = [&]() {
        if (cur.empty()) return;
        push_chunk(chunks, s.header_path, rstrip(prefix + join(cur, "\n\n")), cpt);
        cur.clear();
    };
    for (const auto& p : paras) {
        cur.push_back(p);
        if (estimate_tokens(rstrip(prefix + join(cur, "\n\n")), cpt) <= target)
            continue;
        cur.pop_back();
        flush();
        cur.push_back(p);
        if (estimate_tokens(rstrip(prefix + p), cpt) > target)
            flush();  // indivisible paragraph: its own oversized chunk
    }
    flush();
}

}  // namespace

std::vector<Chunk> chunk_document(const WriteupDocument& doc, int target_tokens,
                                  int chars_per_token) {
    if (target_tokens < 32)
        throw BudgetTooSmall("target_tokens must be >= 32, got " +
                             std::to_string(target_tokens));
    auto sections = parse_markdown(doc.body);
    std::vector<Chunk> chunks;
    std::vector<const Section*> run;

    auto flush_run = [&]() {
        if (run.empty()) return;
        std::string payload = render_run(run);
        if (!payload.empty())
            push_chunk(chunks, run.front()->header_path, std::move(payload),
                       chars_per_token);
        run.clear();
    };

    for (const auto& s : sections) {
        run.push_back(&s);
        if (estimate_tokens(render_run(run), chars_per_token) <= target_tokens)
            continue;
        run.pop_back();
        bool fits_alone =
            estimate_tokens(render_run({&s}), chars_per_token) <= target_tokens;
        flush_run();
        if (fits_alone) {
            run.push_back(&s);
        } else {
            pack_oversized(s, target_tokens, chars_per_token, chunks);
        }
    }
    flush_run();
    return chunks;
}

}  // namespace farrkit
