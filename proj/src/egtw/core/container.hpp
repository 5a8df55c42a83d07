#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace egtw {

// Little-endian binary chunk container. Every persisted artifact (skeletons,
// motions, datasets, checkpoints) starts with the magic bytes "EGTW", a u32
// format version and a u32 kind tag, followed by kind-specific content built
// from named typed arrays.
//
// Entry wire format:
//   u32 name_len, name bytes, u32 dtype, u32 rank, u64 dims[rank], payload
// Entry list wire format:
//   u64 entry_count, entries...

enum class FileKind : std::uint32_t {
    Generic = 0,    // one entry list
    Dataset = 1,    // sample count + offset table + header entry list + per-sample entry lists
    Checkpoint = 2, // one entry list
};

enum class DType : std::uint32_t {
    F64 = 0,
    I64 = 1,
    U8 = 2,
};

struct ChunkEntry {
    std::string name;
    DType dtype = DType::F64;
    std::vector<std::int64_t> dims;
    std::vector<double> f64;
    std::vector<std::int64_t> i64;
    std::vector<std::uint8_t> u8;

    std::int64_t numel() const;
};

// Ordered collection of named entries; order is preserved on round-trip so a
// load-and-resave yields a byte-identical payload.
class ChunkMap {
public:
    ChunkEntry& add_f64(const std::string& name, std::vector<std::int64_t> dims, std::vector<double> data);
    ChunkEntry& add_i64(const std::string& name, std::vector<std::int64_t> dims, std::vector<std::int64_t> data);
    ChunkEntry& add_u8(const std::string& name, std::vector<std::int64_t> dims, std::vector<std::uint8_t> data);
    ChunkEntry& add_scalar_f64(const std::string& name, double v);
    ChunkEntry& add_scalar_i64(const std::string& name, std::int64_t v);
    ChunkEntry& add_string(const std::string& name, const std::string& v);

    bool has(const std::string& name) const;
    const ChunkEntry& at(const std::string& name) const;
    double scalar_f64(const std::string& name) const;
    std::int64_t scalar_i64(const std::string& name) const;
    std::string string(const std::string& name) const;

    const std::vector<ChunkEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    void write(std::ostream& os) const;
    static ChunkMap read(std::istream& is);

private:
    std::vector<ChunkEntry> entries_;
    std::map<std::string, std::size_t> index_;
    ChunkEntry& insert(ChunkEntry e);
};

constexpr char kMagic[4] = {'E', 'G', 'T', 'W'};
constexpr std::uint32_t kFormatVersion = 1;

void write_header(std::ostream& os, FileKind kind);
FileKind read_header(std::istream& is);

// Generic single-map files (skeletons, motions, checkpoints).
void write_chunk_file(const std::string& path, FileKind kind, const ChunkMap& map);
ChunkMap read_chunk_file(const std::string& path, FileKind expected_kind);

// Dataset files with a seekable offset table for random access.
class DatasetWriter {
public:
    DatasetWriter(const std::string& path, std::int64_t sample_count, const ChunkMap& header);
    ~DatasetWriter();
    void write_sample(const ChunkMap& sample);
    void finish();

private:
    struct Impl;
    Impl* impl_;
};

class DatasetReader {
public:
    explicit DatasetReader(const std::string& path);
    ~DatasetReader();
    std::int64_t sample_count() const;
    const ChunkMap& header() const;
    ChunkMap read_sample(std::int64_t index) const; // random access via offset table

    DatasetReader(const DatasetReader&) = delete;
    DatasetReader& operator=(const DatasetReader&) = delete;

private:
    struct Impl;
    Impl* impl_;
};

std::uint64_t file_hash(const std::string& path);

} // namespace egtw
