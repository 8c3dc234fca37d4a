#include "flashadc/code_stream.hpp"

#include "flashadc/errors.hpp"

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace flashadc {

namespace {

constexpr std::array<char, 8> kMagic{'F', 'A', 'D', 'C', 'S', 'T', 'R', 'M'};
constexpr std::uint32_t kBinaryVersion = 1;

template <typename T>
void put_le(std::ostream& os, T value) {
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
    os.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!is) throw ConfigError("truncated binary code stream");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return static_cast<T>(v);
}

std::string gray_hex(std::uint8_t gray) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%02x", static_cast<unsigned>(gray));
    return buf;
}

CodeSample from_record(std::uint64_t index, int binary, std::uint8_t gray, int metastable) {
    if (binary < 0 || binary > 64) throw ConfigError("code out of range in stream: " + std::to_string(binary));
    CodeSample s;
    s.sample_index = index;
    s.binary = binary;
    s.gray = gray;
    s.metastable_count = metastable;
    s.thermometer = binary >= 64 ? ~0ULL : ((1ULL << binary) - 1);
    s.one_hot.set(static_cast<std::size_t>(binary));
    return s;
}

void check_meta(const nlohmann::json& meta) {
    if (!meta.is_object() || !meta.contains("schema") || meta["schema"] != kCodeStreamSchema)
        throw ConfigError("code stream: missing or unsupported schema (expected " + std::string(kCodeStreamSchema) +
                          ")");
    if (!meta.contains("fs")) throw ConfigError("code stream: metadata lacks fs");
}

}  // namespace

std::vector<int> CodeStream::codes() const {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.binary);
    return out;
}

CodeStream downsample(const CodeStream& stream, int factor) {
    CodeStream out;
    out.meta = stream.meta;
    out.samples = downsample(std::span<const CodeSample>(stream.samples), factor);
    out.meta["fs"] = stream.meta.at("fs").get<double>() / factor;
    out.meta["decimation"] = stream.meta.value("decimation", 1) * factor;
    return out;
}

StreamFormat stream_format_from_string(const std::string& name) {
    if (name == "csv") return StreamFormat::Csv;
    if (name == "json") return StreamFormat::Json;
    if (name == "bin" || name == "binary") return StreamFormat::Binary;
    throw ConfigError("unknown stream format '" + name + "' (csv, json, bin)");
}

StreamFormat stream_format_from_path(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".json") return StreamFormat::Json;
    if (ext == ".bin" || ext == ".fadc") return StreamFormat::Binary;
    return StreamFormat::Csv;
}

void write_csv(std::ostream& os, const CodeStream& stream) {
    os << "# flashadc " << stream.meta.dump() << '\n';
    os << "sample_index,binary,gray,metastable_count\n";
    for (const auto& s : stream.samples)
        os << s.sample_index << ',' << s.binary << ',' << gray_hex(s.gray) << ',' << s.metastable_count << '\n';
}

void write_json(std::ostream& os, const CodeStream& stream) {
    nlohmann::json doc;
    doc["meta"] = stream.meta;
    auto& rows = doc["samples"] = nlohmann::json::array();
    for (const auto& s : stream.samples)
        rows.push_back({s.sample_index, s.binary, gray_hex(s.gray), s.metastable_count});
    os << doc.dump() << '\n';
}

void write_binary(std::ostream& os, const CodeStream& stream) {
    const std::string meta = stream.meta.dump();
    os.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(os, kBinaryVersion);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(meta.size()));
    os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    put_le<std::uint64_t>(os, stream.samples.size());
    for (const auto& s : stream.samples) {
        put_le<std::uint64_t>(os, s.sample_index);
        put_le<std::uint8_t>(os, static_cast<std::uint8_t>(s.binary));
        put_le<std::uint8_t>(os, s.gray);
        put_le<std::uint16_t>(os, static_cast<std::uint16_t>(std::min(s.metastable_count, 0xFFFF)));
    }
}

void write_stream(const std::filesystem::path& path, const CodeStream& stream, StreamFormat format) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(Error::Category::Runtime, "cannot open " + path.string() + " for writing");
    switch (format) {
        case StreamFormat::Csv: write_csv(os, stream); break;
        case StreamFormat::Json: write_json(os, stream); break;
        case StreamFormat::Binary: write_binary(os, stream); break;
    }
    if (!os) throw Error(Error::Category::Runtime, "write failed: " + path.string());
}

CodeStream read_stream(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open code stream " + path.string());

    CodeStream stream;
    const int first = is.peek();
    if (first == 'F') {
        std::array<char, 8> magic{};
        is.read(magic.data(), magic.size());
        if (magic != kMagic) throw ConfigError("bad binary code stream magic");
        if (get_le<std::uint32_t>(is) != kBinaryVersion) throw ConfigError("unsupported binary stream version");
        std::string meta(get_le<std::uint32_t>(is), '\0');
        is.read(meta.data(), static_cast<std::streamsize>(meta.size()));
        stream.meta = nlohmann::json::parse(meta);
        const auto n = get_le<std::uint64_t>(is);
        stream.samples.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto index = get_le<std::uint64_t>(is);
            const auto binary = get_le<std::uint8_t>(is);
            const auto gray = get_le<std::uint8_t>(is);
            const auto meta_count = get_le<std::uint16_t>(is);
            stream.samples.push_back(from_record(index, binary, gray, meta_count));
        }
    } else if (first == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(is);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("malformed JSON code stream: ") + e.what());
        }
        stream.meta = doc.at("meta");
        for (const auto& row : doc.at("samples"))
            stream.samples.push_back(from_record(row.at(0).get<std::uint64_t>(), row.at(1).get<int>(),
                                                 static_cast<std::uint8_t>(std::stoul(row.at(2).get<std::string>(), nullptr, 16)),
                                                 row.at(3).get<int>()));
    } else {
        std::string line;
        const std::string prefix = "# flashadc ";
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            if (line.rfind(prefix, 0) == 0) {
                stream.meta = nlohmann::json::parse(line.substr(prefix.size()));
                continue;
            }
            if (line[0] == '#' || line.rfind("sample_index", 0) == 0) continue;
            std::istringstream row(line);
            std::uint64_t index = 0;
            int binary = 0, metastable = 0;
            std::string gray;
            char c1 = 0, c2 = 0;
            row >> index >> c1 >> binary >> c2;
            std::getline(row, gray, ',');
            row >> metastable;
            if (!row || c1 != ',' || c2 != ',') throw ConfigError("malformed CSV code stream row: " + line);
            stream.samples.push_back(
                from_record(index, binary, static_cast<std::uint8_t>(std::stoul(gray, nullptr, 16)), metastable));
        }
    }
    check_meta(stream.meta);
    return stream;
}

}  // namespace flashadc
