#include "snse/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "snse/errors.hpp"

namespace snse {

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
    return buf;
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

constexpr char kFieldMagic[8] = {'S', 'N', 'S', 'E', 'F', 'L', 'D', '1'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
    return v;
}

}  // namespace

std::string field_to_bytes(const SpectralField& f) {
    std::string out;
    const std::size_t payload = sizeof(cplx) * f.coeffs.size();
    out.reserve(20 + payload);
    out.append(kFieldMagic, sizeof kFieldMagic);
    put_u32(out, static_cast<std::uint32_t>(f.grid.dim));
    put_u32(out, static_cast<std::uint32_t>(f.grid.n));
    put_u32(out, static_cast<std::uint32_t>(f.ncomp));
    // doubles are stored as-is; this code targets little-endian IEEE hosts
    out.append(reinterpret_cast<const char*>(f.coeffs.data()), payload);
    return out;
}

SpectralField field_from_bytes(const std::string& bytes) {
    if (bytes.size() < 20 || std::memcmp(bytes.data(), kFieldMagic, sizeof kFieldMagic) != 0)
        throw ConfigError("not a field file (bad magic)");
    const int dim = static_cast<int>(get_u32(bytes, 8));
    const int n = static_cast<int>(get_u32(bytes, 12));
    const int ncomp = static_cast<int>(get_u32(bytes, 16));
    Grid g = make_grid(dim, n);
    if (ncomp <= 0 || ncomp > 3) throw ConfigError("field file: bad component count");
    SpectralField f(g, ncomp);
    const std::size_t payload = sizeof(cplx) * f.coeffs.size();
    if (bytes.size() != 20 + payload) throw ConfigError("field file: truncated payload");
    std::memcpy(f.coeffs.data(), bytes.data() + 20, payload);
    return f;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("short write: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

void write_field(const std::string& path, const SpectralField& f) {
    const std::string bytes = field_to_bytes(f);
    write_text_file(path, bytes);
    nlohmann::json side;
    side["format"] = "snse-field-v1";
    side["dim"] = f.grid.dim;
    side["n_per_axis"] = f.grid.n;
    side["ncomp"] = f.ncomp;
    side["bytes"] = bytes.size();
    side["fnv1a64"] = fnv1a64_hex(bytes);
    write_text_file(path + ".json", side.dump(2) + "\n");
}

SpectralField read_field(const std::string& path) { return field_from_bytes(read_text_file(path)); }

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["format"] = format;
    j["code_version"] = code_version;
    j["config"] = config;
    j["realized"] = realized;
    nlohmann::json files_j = nlohmann::json::array();
    for (const auto& e : files) files_j.push_back({{"path", e.path}, {"fnv1a64", e.hash}});
    j["files"] = files_j;
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.format = j.at("format").get<std::string>();
    if (m.format != "snse-manifest-v1") throw ConfigError("unknown manifest format " + m.format);
    m.code_version = j.at("code_version").get<std::string>();
    m.config = j.at("config");
    m.realized = j.at("realized");
    for (const auto& e : j.at("files"))
        m.files.push_back({e.at("path").get<std::string>(), e.at("fnv1a64").get<std::string>()});
    return m;
}

OutputWriter::OutputWriter(std::string dir) : dir_(std::move(dir)) {}

void OutputWriter::add(const std::string& rel_path, std::string bytes) {
    if (has(rel_path)) throw ConfigError("duplicate output file: " + rel_path);
    entries_.emplace_back(rel_path, std::move(bytes));
}

bool OutputWriter::has(const std::string& rel_path) const {
    for (const auto& [p, b] : entries_)
        if (p == rel_path) return true;
    return false;
}

RunManifest OutputWriter::commit(RunManifest manifest) {
    namespace fs = std::filesystem;
    fs::create_directories(dir_);
    for (const auto& [rel, bytes] : entries_) {
        const fs::path full = fs::path(dir_) / rel;
        fs::create_directories(full.parent_path());
        write_text_file(full.string(), bytes);
        manifest.files.push_back({rel, fnv1a64_hex(bytes)});
    }
    write_text_file((fs::path(dir_) / "manifest.json").string(), manifest.to_json().dump(2) + "\n");
    return manifest;
}

std::string version_string() { return "snse 0.1.0"; }

}  // namespace snse
