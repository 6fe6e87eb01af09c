#include "pixelarm/attack.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace pixelarm {

namespace {

char32_t parse_cp(const std::string& tok) {
    if (tok.size() < 3 || tok[0] != 'U' || tok[1] != '+')
        throw DataError("expected U+XXXX in confusable table, got '" + tok + "'");
    return static_cast<char32_t>(std::stoul(tok.substr(2), nullptr, 16));
}

}  // namespace

ConfusableMap load_confusables(std::istream& in) {
    ConfusableMap map;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t arrow = t.find("->");
        if (arrow == std::string::npos)
            throw DataError("confusable line " + std::to_string(lineno) +
                            ": expected 'U+XXXX -> U+YYYY[,...]'");
        const char32_t base = parse_cp(trim(t.substr(0, arrow)));
        std::vector<char32_t> repls;
        std::string rest = trim(t.substr(arrow + 2));
        std::istringstream rs(rest);
        std::string tok;
        while (std::getline(rs, tok, ',')) {
            const char32_t r = parse_cp(trim(tok));
            if (r == base)
                throw DataError("confusable line " + std::to_string(lineno) +
                                ": base maps to itself");
            repls.push_back(r);
        }
        if (repls.empty())
            throw DataError("confusable line " + std::to_string(lineno) +
                            ": no replacements");
        map.entries[base] = std::move(repls);
    }
    return map;
}

ConfusableMap load_confusables_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open confusable table: " + path);
    return load_confusables(in);
}

bool is_letter(char32_t cp) {
    if ((cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z')) return true;
    if (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) return true;
    if (cp >= 0x0100 && cp <= 0x024F) return true;  // Latin Extended-A/B
    if (cp >= 0x0250 && cp <= 0x02AF) return true;  // IPA extensions
    if (cp >= 0x0386 && cp <= 0x03FF && cp != 0x0387) return true;  // Greek
    if (cp >= 0x0400 && cp <= 0x052F) return true;  // Cyrillic (+supplement)
    if (cp >= 0x0531 && cp <= 0x0586) return true;  // Armenian
    if (cp >= 0x1D00 && cp <= 0x1DBF) return true;  // phonetic extensions
    if (cp >= 0x1E00 && cp <= 0x1EFF) return true;  // Latin Extended Additional
    return false;
}

std::string attack(const std::string& text, const ConfusableMap& map,
                   const AttackConfig& cfg) {
    cfg.validate();
    std::vector<char32_t> cps = utf8_decode(text);
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < cps.size(); ++i)
        if (is_letter(cps[i])) pool.push_back(i);

    const std::size_t k = static_cast<std::size_t>(
        std::floor(cfg.ratio * static_cast<double>(pool.size()) + 0.5));
    if (k == 0) return text;

    bool any_covered = false;
    for (std::size_t i : pool)
        if (map.covers(cps[i])) {
            any_covered = true;
            break;
        }
    if (!any_covered)
        throw DataError("attack: confusable map covers no eligible character");

    std::mt19937_64 rng(cfg.seed);
    std::size_t replaced = 0;
    while (replaced < k && !pool.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const std::size_t slot = pick(rng);
        const std::size_t pos = pool[slot];
        pool[slot] = pool.back();
        pool.pop_back();
        auto it = map.entries.find(cps[pos]);
        if (it == map.entries.end() || it->second.empty()) continue;  // re-draw
        std::uniform_int_distribution<std::size_t> rsel(0, it->second.size() - 1);
        cps[pos] = it->second[rsel(rng)];
        ++replaced;
    }
    return utf8_encode(cps);
}

}  // namespace pixelarm
