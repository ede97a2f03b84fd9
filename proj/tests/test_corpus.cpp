#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "farrkit/corpus.hpp"

using namespace farrkit;

namespace {

std::string read_fixture(const std::string& rel) {
    std::ifstream in(std::string(FARRKIT_FIXTURES) + "/" + rel,
                     std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing fixture " << rel);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string rstrip(std::string s) {
    while (!s.empty() && std::isspace((unsigned char)s.back())) s.pop_back();
    return s;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// Non-blank lines, each right-stripped, as a count multiset.
std::map<std::string, int> line_multiset(const std::string& text) {
    std::map<std::string, int> counts;
    for (const auto& line : lines_of(text)) {
        std::string s = rstrip(line);
        if (!s.empty()) counts[s]++;
    }
    return counts;
}

// Paragraph count of the payload after its ancestry prefix, fence-aware.
int paragraphs_after_prefix(const Chunk& c) {
    std::string prefix;
    for (const auto& h : c.header_path) prefix += render_header_line(h) + "\n";
    std::string rest = c.payload.size() > prefix.size() && prefix.size() > 0 &&
                               c.payload.compare(0, prefix.size(), prefix) == 0
                           ? c.payload.substr(prefix.size())
                           : (prefix.empty() ? c.payload : std::string());
    int paras = 0;
    bool in_para = false, in_fence = false;
    for (const auto& line : lines_of(rest)) {
        bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
        if (!in_fence && blank) {
            in_para = false;
            continue;
        }
        if (is_fence_line(line)) in_fence = !in_fence;
        if (!in_para) {
            ++paras;
            in_para = true;
        }
    }
    return paras;
}

void check_chunk_invariants(const std::string& body,
                            const std::vector<Chunk>& chunks, int target) {
    std::string concat;
    for (size_t i = 0; i < chunks.size(); ++i) {
        const Chunk& c = chunks[i];
        CHECK(c.index == (int)i);
        CHECK(!c.payload.empty());
        CHECK(c.token_estimate == estimate_tokens(c.payload));

        if (!c.header_path.empty()) {
            std::string prefix;
            for (size_t k = 0; k < c.header_path.size(); ++k) {
                if (k) prefix += "\n";
                prefix += render_header_line(c.header_path[k]);
            }
            bool anchored = c.payload == prefix ||
                            c.payload.rfind(prefix + "\n", 0) == 0;
            CHECK_MESSAGE(anchored, "chunk " << i
                                             << " does not start with its "
                                                "header ancestry");
        }

        if (c.token_estimate > target)
            CHECK_MESSAGE(paragraphs_after_prefix(c) <= 1,
                          "over-budget chunk " << i
                                               << " is splittable further");

        int fence_lines = 0;
        for (const auto& line : lines_of(c.payload))
            fence_lines += is_fence_line(line);
        CHECK_MESSAGE(fence_lines % 2 == 0,
                      "chunk " << i << " splits a code fence");

        concat += c.payload + "\n";
    }

    auto body_lines = line_multiset(body);
    auto payload_lines = line_multiset(concat);
    for (const auto& [line, n] : body_lines)
        CHECK_MESSAGE(payload_lines[line] >= n,
                      "line lost during chunking: " << line);
}

// ---- tiny generator for property tests ----

struct Rng {
    std::mt19937 g;
    explicit Rng(uint32_t seed) : g(seed) {}
    int pick(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(g);
    }
};

std::string gen_word(Rng& r) {
    static const char* words[] = {"scan",  "port",  "shell", "token",
                                  "redis", "admin", "flag",  "probe",
                                  "vault", "pivot", "creds", "nmap"};
    return words[r.pick(0, 11)];
}

std::string gen_sentence(Rng& r) {
    int n = r.pick(6, 14);
    std::string s;
    for (int i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += gen_word(r);
    }
    return s + ".";
}

std::string gen_paragraph(Rng& r) {
    int n = r.pick(2, 5);
    std::string p;
    for (int i = 0; i < n; ++i) {
        if (i) p += ' ';
        p += gen_sentence(r);
    }
    return p;
}

std::string gen_fence(Rng& r) {
    std::string f = "```\n";
    int n = r.pick(1, 4);
    for (int i = 0; i < n; ++i) f += "$ run " + gen_word(r) + "\n";
    return f + "```";
}

std::string gen_doc(Rng& r) {
    std::string doc;
    if (r.pick(0, 3) == 0) doc += gen_paragraph(r) + "\n\n";
    int level = 1;
    int sections = r.pick(3, 8);
    for (int s = 0; s < sections; ++s) {
        level = std::clamp(level + r.pick(-2, 2), 1, 5);
        doc += std::string(level, '#') + " " + gen_word(r) + " " + gen_word(r) +
               "\n\n";
        int blocks = r.pick(0, 3);
        for (int b = 0; b < blocks; ++b)
            doc += (r.pick(0, 4) == 0 ? gen_fence(r) : gen_paragraph(r)) +
                   "\n\n";
    }
    return doc;
}

WriteupDocument make_doc(std::string body) {
    WriteupDocument d;
    d.machine_name = "Test";
    d.body = std::move(body);
    return d;
}

}  // namespace

TEST_CASE("difficulty string round trip") {
    for (Difficulty d : {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard,
                         Difficulty::Insane})
        CHECK(difficulty_from_string(to_string(d)) == d);
    CHECK(difficulty_from_string("easy") == Difficulty::Easy);
    CHECK(difficulty_from_string("INSANE") == Difficulty::Insane);
    CHECK_THROWS_AS(difficulty_from_string("nightmare"), SchemaViolation);
}

TEST_CASE("strip_images keeps alt text") {
    CHECK(strip_images("before ![a scan](img/x.png) after") ==
          "before a scan after");
    CHECK(strip_images("ref style ![diagram][ref1] end") ==
          "ref style diagram end");
    CHECK(strip_images("no images here") == "no images here");
    CHECK(strip_images("broken ![alt](unterminated") ==
          "broken ![alt](unterminated");
    CHECK(strip_images("two ![a](u) and ![b](v)") == "two a and b");
    CHECK(strip_images("empty alt ![](u) kept") == "empty alt  kept");
}

TEST_CASE("is_fence_line") {
    CHECK(is_fence_line("```"));
    CHECK(is_fence_line("```bash"));
    CHECK(is_fence_line("~~~"));
    CHECK(is_fence_line("   ```"));
    CHECK_FALSE(is_fence_line("    ```"));  // 4 spaces = indented code
    CHECK_FALSE(is_fence_line("``"));
    CHECK_FALSE(is_fence_line("text ```"));
}

TEST_CASE("parse_markdown builds the section tree") {
    std::string body =
        "intro line\n\n# A\na-text\n## B\nb-text\n### C\nc-text\n## D\n"
        "d-text\n# E\n";
    auto sections = parse_markdown(body);
    REQUIRE(sections.size() == 6);

    CHECK(sections[0].header_path.empty());
    CHECK(sections[0].text == "intro line");

    REQUIRE(sections[1].header_path.size() == 1);
    CHECK(sections[1].header_path[0] == HeaderRef{1, "A"});
    CHECK(sections[1].text == "a-text");

    REQUIRE(sections[2].header_path.size() == 2);
    CHECK(sections[2].header_path[1] == HeaderRef{2, "B"});
    CHECK(sections[2].text == "b-text");

    REQUIRE(sections[3].header_path.size() == 3);
    CHECK(sections[3].header_path[0] == HeaderRef{1, "A"});
    CHECK(sections[3].header_path[2] == HeaderRef{3, "C"});

    REQUIRE(sections[4].header_path.size() == 2);
    CHECK(sections[4].header_path[0] == HeaderRef{1, "A"});
    CHECK(sections[4].header_path[1] == HeaderRef{2, "D"});

    REQUIRE(sections[5].header_path.size() == 1);
    CHECK(sections[5].header_path[0] == HeaderRef{1, "E"});
    CHECK(sections[5].text.empty());

    for (size_t i = 0; i < sections.size(); ++i)
        CHECK(sections[i].order_index == (int)i);
}

TEST_CASE("parse_markdown ignores headers inside fences") {
    std::string body = "# Real\n```\n# not a header\n## nor this\n```\ntail\n";
    auto sections = parse_markdown(body);
    REQUIRE(sections.size() == 1);
    CHECK(sections[0].header_path[0] == HeaderRef{1, "Real"});
    CHECK(sections[0].text.find("# not a header") != std::string::npos);
}

TEST_CASE("parse_markdown without headers yields one root section") {
    auto sections = parse_markdown("just text\nmore text\n");
    REQUIRE(sections.size() == 1);
    CHECK(sections[0].header_path.empty());
    CHECK(sections[0].text == "just text\nmore text");
}

TEST_CASE("parse_markdown level jumps and pops") {
    auto sections = parse_markdown("# A\n### C\ndeep\n# B\nflat\n");
    REQUIRE(sections.size() == 3);
    REQUIRE(sections[1].header_path.size() == 2);  // A -> C, level jump kept
    CHECK(sections[1].header_path[0] == HeaderRef{1, "A"});
    CHECK(sections[1].header_path[1] == HeaderRef{3, "C"});
    REQUIRE(sections[2].header_path.size() == 1);  // B pops back to the root
    CHECK(sections[2].header_path[0] == HeaderRef{1, "B"});
}

TEST_CASE("header lines reconstruct byte-exactly") {
    for (const std::string line : {"# T", "##", "###   padded title",
                                   "###### six deep", "## trailing##"}) {
        auto sections = parse_markdown(line + "\n");
        REQUIRE(sections.size() == 1);
        REQUIRE(!sections[0].header_path.empty());
        CHECK(render_header_line(sections[0].header_path.back()) == line);
    }
    // not headers at all
    CHECK(parse_markdown("#NoSpace\n")[0].header_path.empty());
    CHECK(parse_markdown("####### seven\n")[0].header_path.empty());
}

TEST_CASE("estimate_tokens ceiling semantics") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("abcd") == 1);
    CHECK(estimate_tokens("abcde") == 2);
    CHECK(estimate_tokens("abcdefgh") == 2);
    CHECK(estimate_tokens("abc", 1) == 3);
    CHECK_THROWS_AS(estimate_tokens("abc", 0), std::invalid_argument);
}

TEST_CASE("chunk_document rejects tiny budgets") {
    auto doc = make_doc("# A\ntext\n");
    CHECK_THROWS_AS(chunk_document(doc, 31), BudgetTooSmall);
    CHECK_NOTHROW(chunk_document(doc, 32));
}

TEST_CASE("small document fits one chunk") {
    auto doc = make_doc("# A\nshort body\n\n## B\nmore text\n");
    auto chunks = chunk_document(doc, 500);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].payload == "# A\nshort body\n## B\nmore text");
    REQUIRE(chunks[0].header_path.size() == 1);
    CHECK(chunks[0].header_path[0] == HeaderRef{1, "A"});
}

TEST_CASE("empty document yields no chunks") {
    CHECK(chunk_document(make_doc(""), 100).empty());
    CHECK(chunk_document(make_doc("\n\n\n"), 100).empty());
}

TEST_CASE("split chunks carry their full header ancestry") {
    std::string filler_a(120, 'a');
    std::string filler_b(120, 'b');
    auto doc = make_doc("# A\n" + filler_a + "\n## B\n" + filler_b + "\n");
    auto chunks = chunk_document(doc, 32);  // 128-byte budget
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[1].payload.rfind("# A\n## B\n", 0) == 0);
    REQUIRE(chunks[1].header_path.size() == 2);
    CHECK(chunks[1].header_path[1] == HeaderRef{2, "B"});
}

TEST_CASE("oversized sections split at paragraphs, fences stay whole") {
    std::string para1(150, 'x');
    std::string fence = "```\ncode line\n\nblank inside fence\n```";
    std::string para2(150, 'y');
    auto doc =
        make_doc("# Big\n" + para1 + "\n\n" + fence + "\n\n" + para2 + "\n");
    auto chunks = chunk_document(doc, 64);  // 256-byte budget
    REQUIRE(chunks.size() >= 2);
    bool fence_whole = false;
    for (const auto& c : chunks) {
        int fences = 0;
        for (const auto& line : lines_of(c.payload))
            fences += is_fence_line(line);
        CHECK(fences % 2 == 0);
        if (c.payload.find(fence) != std::string::npos) fence_whole = true;
    }
    CHECK(fence_whole);
    check_chunk_invariants(doc.body, chunks, 64);
}

TEST_CASE("an indivisible oversized paragraph becomes its own chunk") {
    std::string huge(600, 'z');
    auto doc = make_doc("# Wall\n" + huge + "\n");
    auto chunks = chunk_document(doc, 32);  // 128-byte budget
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].token_estimate > 32);
    CHECK(chunks[0].payload.find(huge) != std::string::npos);
}

TEST_CASE("fixture corpus holds all chunker invariants at 500/1000/2000") {
    const char* files[] = {"corpus/Dunefall.md", "corpus/Brineharbor.md",
                           "corpus/Cindervault.md", "corpus/Mistgrave.md",
                           "corpus/Thornspire.md"};
    for (const char* f : files) {
        CAPTURE(f);
        auto doc = make_doc(strip_images(read_fixture(f)));
        size_t prev = SIZE_MAX;
        for (int target : {500, 1000, 2000}) {
            CAPTURE(target);
            auto chunks = chunk_document(doc, target);
            REQUIRE(!chunks.empty());
            check_chunk_invariants(doc.body, chunks, target);
            CHECK(chunks.size() <= prev);  // monotone in the budget
            prev = chunks.size();
        }
    }
}

TEST_CASE("property: random documents hold chunker invariants") {
    for (uint32_t seed = 1; seed <= 150; ++seed) {
        CAPTURE(seed);
        Rng r(seed);
        auto doc = make_doc(gen_doc(r));
        size_t prev = SIZE_MAX;
        for (int target : {64, 128, 256}) {
            CAPTURE(target);
            auto chunks = chunk_document(doc, target);
            check_chunk_invariants(doc.body, chunks, target);
            CHECK(chunks.size() <= prev);
            prev = chunks.size();
        }
    }
}
