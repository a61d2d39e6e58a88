#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snse/field.hpp"
#include "snse/ledger.hpp"

#include "json.hpp"

namespace snse {

// FNV-1a 64-bit content hash, hex-encoded; used by manifests so identical
// runs are verifiable byte for byte.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string fnv1a64_hex(const std::string& bytes);

// %.17g rendering: shortest text that round-trips a double exactly.
std::string format_double(double x);

// Field files: little-endian binary, header "SNSEFLD1" + u32 dim, n_per_axis,
// ncomp, then per component grid.points() complex<double> in flat row-major
// mode order. A JSON sidecar <path>.json records the same header plus the
// payload hash. Layout documented in docs/field-format.md.
void write_field(const std::string& path, const SpectralField& f);
SpectralField read_field(const std::string& path);
std::string field_to_bytes(const SpectralField& f);
SpectralField field_from_bytes(const std::string& bytes);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

struct FileEntry {
    std::string path;  // relative to the output directory
    std::string hash;  // fnv1a64 hex of the bytes
};

struct RunManifest {
    std::string format = "snse-manifest-v1";
    std::string code_version;
    nlohmann::json config;    // fully resolved
    nlohmann::json realized;  // thresholds, certificates, per-path stopping data
    std::vector<FileEntry> files;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

// Collects output files in memory, then writes them plus the manifest in one
// ordered pass (single writer; deterministic inventory order).
class OutputWriter {
public:
    explicit OutputWriter(std::string dir);
    void add(const std::string& rel_path, std::string bytes);
    bool has(const std::string& rel_path) const;
    // Writes all files plus manifest.json; returns the manifest.
    RunManifest commit(RunManifest manifest);
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string version_string();

}  // namespace snse
