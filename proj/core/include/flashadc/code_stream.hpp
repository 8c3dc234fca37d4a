#pragma once

#include "flashadc/comparator_backend.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace flashadc {

inline constexpr const char* kCodeStreamSchema = "flashadc.codestream/1";

/// A recorded output stream plus everything needed to interpret or
/// regenerate it. `meta` always carries: schema, tool_version, config_hash,
/// seed, fs (rate of the recorded samples), decimation, resolution_bits and
/// a `stimulus` object; `config` holds the full run config when available.
struct CodeStream {
    nlohmann::json meta = nlohmann::json::object();
    std::vector<CodeSample> samples;

    [[nodiscard]] double sample_rate() const { return meta.at("fs").get<double>(); }
    [[nodiscard]] std::vector<int> codes() const;
};

/// Decimates and records the factor in the metadata (fs divided, decimation multiplied).
CodeStream downsample(const CodeStream& stream, int factor);

enum class StreamFormat { Csv, Json, Binary };

StreamFormat stream_format_from_string(const std::string& name);
StreamFormat stream_format_from_path(const std::filesystem::path& path);

/// CSV: `# flashadc <meta-json>` comment line, then
/// `sample_index,binary,gray,metastable_count` with gray as 0x-prefixed hex.
void write_csv(std::ostream& os, const CodeStream& stream);
/// JSON: {"meta": {...}, "samples": [[index, binary, "0x..", metastable], ...]}
void write_json(std::ostream& os, const CodeStream& stream);
/// Binary, little-endian: "FADCSTRM", u32 version (1), u32 meta length,
/// meta JSON bytes, u64 record count, then 12-byte records
/// {u64 index, u8 binary, u8 gray, u16 metastable_count}.
void write_binary(std::ostream& os, const CodeStream& stream);

void write_stream(const std::filesystem::path& path, const CodeStream& stream, StreamFormat format);
/// Reads any of the three formats, sniffing the content. Throws ConfigError on malformed input.
CodeStream read_stream(const std::filesystem::path& path);

}  // namespace flashadc
