#include "pixelarm/shard.hpp"

#include <algorithm>
#include <map>

#include "pixelarm/common.hpp"

namespace pixelarm {

namespace {

constexpr char kMagic[5] = {'P', 'X', 'S', 'H', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
    std::string_view data;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > data.size()) throw DataError("truncated shard");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(
                     static_cast<unsigned char>(data[pos + i]))
                 << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(
                     static_cast<unsigned char>(data[pos + i]))
                 << (8 * i);
        pos += 8;
        return v;
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s(data.substr(pos, n));
        pos += n;
        return s;
    }
};

std::uint64_t span_chars(const PatchSequence& seq) {
    std::uint64_t n = 0;
    for (const SpanEntry& s : seq.spans) n += s.char_end - s.char_begin;
    return n;
}

ShardHeader parse_header(Reader& r, const std::string& path) {
    std::string magic = r.bytes(5);
    if (!std::equal(magic.begin(), magic.end(), kMagic))
        throw DataError("bad shard magic in " + path);
    std::size_t checked_begin = r.pos;
    if (r.u32() != kVersion) throw DataError("unsupported shard version in " + path);
    ShardHeader h;
    h.patch_h = static_cast<int>(r.u32());
    h.patch_w = static_cast<int>(r.u32());
    h.channels = static_cast<int>(r.u32());
    h.language = r.bytes(r.u32());
    h.patch_count = r.u64();
    h.sequence_count = r.u64();
    h.total_chars = r.u64();
    h.offsets.resize(h.sequence_count);
    std::uint64_t prev = 0;
    for (std::size_t i = 0; i < h.offsets.size(); ++i) {
        h.offsets[i] = r.u64();
        if (i == 0 ? h.offsets[i] != 0 : h.offsets[i] <= prev)
            throw DataError("shard index offsets not strictly increasing");
        prev = h.offsets[i];
        if (h.offsets[i] >= h.patch_count && h.patch_count > 0)
            throw DataError("shard index offset out of range");
    }
    (void)checked_begin;
    return h;
}

}  // namespace

void write_shard(const std::string& path,
                 const std::vector<PatchSequence>& sequences) {
    ShardHeader h;
    std::vector<const PatchSequence*> kept;
    for (const PatchSequence& s : sequences) {
        if (s.empty()) continue;
        if (kept.empty()) {
            h.patch_h = static_cast<int>(s.patches.front().rows());
            h.patch_w = static_cast<int>(s.patches.front().cols());
            h.language = s.language;
        } else if (static_cast<int>(s.patches.front().rows()) != h.patch_h ||
                   static_cast<int>(s.patches.front().cols()) != h.patch_w) {
            throw DataError("write_shard: mixed patch geometry");
        } else if (s.language != h.language) {
            throw DataError("write_shard: mixed languages");
        }
        h.offsets.push_back(h.patch_count);
        h.patch_count += s.patches.size();
        h.total_chars += span_chars(s);
        kept.push_back(&s);
    }
    h.sequence_count = kept.size();

    std::string body;
    put_u32(body, kVersion);
    put_u32(body, static_cast<std::uint32_t>(h.patch_h));
    put_u32(body, static_cast<std::uint32_t>(h.patch_w));
    put_u32(body, static_cast<std::uint32_t>(h.channels));
    put_u32(body, static_cast<std::uint32_t>(h.language.size()));
    body += h.language;
    put_u64(body, h.patch_count);
    put_u64(body, h.sequence_count);
    put_u64(body, h.total_chars);
    for (std::uint64_t off : h.offsets) put_u64(body, off);

    const std::uint64_t bits =
        h.patch_count * static_cast<std::uint64_t>(h.patch_h) * h.patch_w *
        h.channels;
    std::string payload((bits + 7) / 8, '\0');
    std::uint64_t k = 0;
    for (const PatchSequence* s : kept) {
        for (const PatchGrid& p : s->patches) {
            for (long r = 0; r < p.rows(); ++r)
                for (long c = 0; c < p.cols(); ++c, ++k)
                    if (p(r, c))
                        payload[k >> 3] |= static_cast<char>(1u << (k & 7));
        }
    }
    body += payload;

    std::string out(kMagic, sizeof kMagic);
    out += body;
    put_u64(out, fnv1a64(body.data(), body.size()));
    atomic_write_file(path, out);
}

Shard read_shard(const std::string& path) {
    std::string data = read_file(path);
    Reader r{data};
    ShardHeader h = parse_header(r, path);

    const std::uint64_t bits =
        h.patch_count * static_cast<std::uint64_t>(h.patch_h) * h.patch_w *
        h.channels;
    const std::size_t payload_len = static_cast<std::size_t>((bits + 7) / 8);
    r.need(payload_len + 8);
    const std::size_t body_len = r.pos + payload_len - sizeof kMagic;
    std::uint64_t want = fnv1a64(data.data() + sizeof kMagic, body_len);
    std::string_view payload = std::string_view(data).substr(r.pos, payload_len);
    r.pos += payload_len;
    std::uint64_t got = r.u64();
    if (want != got) throw DataError("shard checksum mismatch in " + path);
    if (r.pos != data.size()) throw DataError("trailing bytes in shard " + path);

    Shard shard;
    shard.header = h;
    std::uint64_t k = 0;
    for (std::size_t s = 0; s < h.sequence_count; ++s) {
        const std::uint64_t begin = h.offsets[s];
        const std::uint64_t end =
            (s + 1 < h.sequence_count) ? h.offsets[s + 1] : h.patch_count;
        PatchSequence seq;
        seq.language = h.language;
        seq.config.patch_h = h.patch_h;
        seq.config.patch_w = h.patch_w;
        seq.config.channels = h.channels;
        seq.config.max_patches =
            std::max<int>(1, static_cast<int>(end - begin));
        for (std::uint64_t i = begin; i < end; ++i) {
            PatchGrid p(h.patch_h, h.patch_w);
            for (long r2 = 0; r2 < p.rows(); ++r2)
                for (long c = 0; c < p.cols(); ++c, ++k)
                    p(r2, c) = (static_cast<unsigned char>(payload[k >> 3]) >>
                                (k & 7)) &
                               1;
            seq.patches.push_back(std::move(p));
        }
        shard.sequences.push_back(std::move(seq));
    }
    return shard;
}

ShardHeader read_shard_header(const std::string& path) {
    std::string data = read_file(path);
    Reader r{data};
    return parse_header(r, path);
}

std::vector<LanguageStats> compute_stats(
    const std::vector<ShardHeader>& shards) {
    std::map<std::string, LanguageStats> acc;
    for (const ShardHeader& h : shards) {
        LanguageStats& s = acc[h.language];
        s.language = h.language;
        s.patches += h.patch_count;
        s.chars += h.total_chars;
    }
    std::vector<LanguageStats> out;
    for (auto& [lang, s] : acc) {
        if (s.patches == 0) continue;
        s.chars_per_patch =
            static_cast<double>(s.chars) / static_cast<double>(s.patches);
        out.push_back(s);
    }
    return out;
}

}  // namespace pixelarm
