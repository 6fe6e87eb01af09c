#include "pixelarm/glyph.hpp"

#include <fstream>
#include <sstream>

namespace pixelarm {

namespace {

char32_t parse_codepoint(const std::string& token) {
    if (token.size() < 3 || token[0] != 'U' || token[1] != '+')
        throw DataError("expected U+XXXX codepoint, got '" + token + "'");
    char32_t cp = 0;
    for (std::size_t i = 2; i < token.size(); ++i) {
        char c = token[i];
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else throw DataError("bad hex digit in codepoint '" + token + "'");
        cp = cp * 16 + static_cast<char32_t>(d);
    }
    return cp;
}

std::string codepoint_token(char32_t cp) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
    return buf;
}

}  // namespace

const GlyphBitmap& GlyphAtlas::at(char32_t cp) const {
    auto it = glyphs.find(cp);
    if (it == glyphs.end())
        throw DataError("missing glyph for " + codepoint_token(cp) +
                        " in atlas '" + name + "'");
    return it->second;
}

int GlyphAtlas::max_advance() const {
    int m = 0;
    for (const auto& [cp, g] : glyphs) m = std::max(m, g.advance);
    return m;
}

int GlyphAtlas::space_advance() const {
    auto it = glyphs.find(U' ');
    if (it != glyphs.end()) return it->second.advance;
    return std::max(1, (max_advance() + 1) / 2);
}

GlyphAtlas load_atlas(std::istream& in) {
    GlyphAtlas atlas;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty atlas file");
    {
        std::istringstream hs(line);
        std::string magic, version;
        if (!(hs >> magic >> version >> atlas.name >> atlas.line_height) ||
            magic != "ATLAS" || version != "v1" || atlas.line_height < 1) {
            throw DataError("malformed atlas header: '" + line + "'");
        }
    }
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream gs(t);
        std::string kw, cptok;
        GlyphBitmap g;
        if (!(gs >> kw >> cptok >> g.width >> g.height >> g.advance) ||
            kw != "GLYPH") {
            throw DataError("line " + std::to_string(lineno) +
                            ": expected GLYPH record, got '" + t + "'");
        }
        char32_t cp = parse_codepoint(cptok);
        if (g.width < 0 || g.height < 0)
            throw DataError(codepoint_token(cp) + ": negative dimensions");
        if (g.advance < 1)
            throw DataError(codepoint_token(cp) + ": advance must be >= 1");
        if (atlas.glyphs.count(cp))
            throw DataError("duplicate codepoint " + codepoint_token(cp));
        g.cells.reserve(static_cast<std::size_t>(g.width) * g.height);
        for (int r = 0; r < g.height; ++r) {
            if (!std::getline(in, line))
                throw DataError(codepoint_token(cp) + ": truncated bitmap");
            ++lineno;
            if (static_cast<int>(line.size()) != g.width)
                throw DataError(codepoint_token(cp) + " row " +
                                std::to_string(r) + ": width mismatch (got " +
                                std::to_string(line.size()) + ", want " +
                                std::to_string(g.width) + ")");
            for (char c : line) {
                if (c == '.') g.cells.push_back(0);
                else if (c == '#') g.cells.push_back(1);
                else
                    throw DataError(codepoint_token(cp) +
                                    ": non-binary cell '" + std::string(1, c) +
                                    "'");
            }
        }
        atlas.glyphs.emplace(cp, std::move(g));
    }
    return atlas;
}

GlyphAtlas load_atlas_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open atlas: " + path);
    GlyphAtlas atlas = load_atlas(in);
    return atlas;
}

std::string atlas_to_text(const GlyphAtlas& atlas) {
    std::ostringstream out;
    out << "ATLAS v1 " << atlas.name << ' ' << atlas.line_height << '\n';
    for (const auto& [cp, g] : atlas.glyphs) {
        out << "GLYPH " << codepoint_token(cp) << ' ' << g.width << ' '
            << g.height << ' ' << g.advance << '\n';
        for (int r = 0; r < g.height; ++r) {
            for (int c = 0; c < g.width; ++c) out << (g.at(r, c) ? '#' : '.');
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace pixelarm
