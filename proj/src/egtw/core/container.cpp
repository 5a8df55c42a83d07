#include "egtw/core/container.hpp"

#include <cstring>
#include <fstream>
#include <limits>

#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"

namespace egtw {

namespace {

// Scalars are serialized little-endian. The implementation assumes a
// little-endian host (checked once at startup of any IO).
void check_endianness() {
    const std::uint32_t probe = 1;
    char b;
    std::memcpy(&b, &probe, 1);
    if (b != 1) throw FormatError("big-endian hosts are not supported by the container codec");
}

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw FormatError("unexpected end of file");
    return v;
}

void write_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw FormatError("unexpected end of file");
}

std::int64_t product(const std::vector<std::int64_t>& dims) {
    std::int64_t n = 1;
    for (auto d : dims) {
        if (d < 0) throw FormatError("negative dimension");
        n *= d;
    }
    return n;
}

} // namespace

std::int64_t ChunkEntry::numel() const {
    return product(dims);
}

ChunkEntry& ChunkMap::insert(ChunkEntry e) {
    if (index_.count(e.name)) throw ValidationError("duplicate chunk entry: " + e.name);
    index_[e.name] = entries_.size();
    entries_.push_back(std::move(e));
    return entries_.back();
}

ChunkEntry& ChunkMap::add_f64(const std::string& name, std::vector<std::int64_t> dims, std::vector<double> data) {
    ChunkEntry e;
    e.name = name;
    e.dtype = DType::F64;
    e.dims = std::move(dims);
    e.f64 = std::move(data);
    if (static_cast<std::int64_t>(e.f64.size()) != e.numel())
        throw ValidationError("entry size mismatch for " + name);
    return insert(std::move(e));
}

ChunkEntry& ChunkMap::add_i64(const std::string& name, std::vector<std::int64_t> dims, std::vector<std::int64_t> data) {
    ChunkEntry e;
    e.name = name;
    e.dtype = DType::I64;
    e.dims = std::move(dims);
    e.i64 = std::move(data);
    if (static_cast<std::int64_t>(e.i64.size()) != e.numel())
        throw ValidationError("entry size mismatch for " + name);
    return insert(std::move(e));
}

ChunkEntry& ChunkMap::add_u8(const std::string& name, std::vector<std::int64_t> dims, std::vector<std::uint8_t> data) {
    ChunkEntry e;
    e.name = name;
    e.dtype = DType::U8;
    e.dims = std::move(dims);
    e.u8 = std::move(data);
    if (static_cast<std::int64_t>(e.u8.size()) != e.numel())
        throw ValidationError("entry size mismatch for " + name);
    return insert(std::move(e));
}

ChunkEntry& ChunkMap::add_scalar_f64(const std::string& name, double v) {
    return add_f64(name, {}, {v});
}

ChunkEntry& ChunkMap::add_scalar_i64(const std::string& name, std::int64_t v) {
    return add_i64(name, {}, {v});
}

ChunkEntry& ChunkMap::add_string(const std::string& name, const std::string& v) {
    std::vector<std::uint8_t> bytes(v.begin(), v.end());
    const auto n = static_cast<std::int64_t>(bytes.size());
    return add_u8(name, {n}, std::move(bytes));
}

bool ChunkMap::has(const std::string& name) const {
    return index_.count(name) > 0;
}

const ChunkEntry& ChunkMap::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw FormatError("missing chunk entry: " + name);
    return entries_[it->second];
}

double ChunkMap::scalar_f64(const std::string& name) const {
    const auto& e = at(name);
    if (e.dtype != DType::F64 || e.numel() != 1) throw FormatError("entry is not a f64 scalar: " + name);
    return e.f64[0];
}

std::int64_t ChunkMap::scalar_i64(const std::string& name) const {
    const auto& e = at(name);
    if (e.dtype != DType::I64 || e.numel() != 1) throw FormatError("entry is not a i64 scalar: " + name);
    return e.i64[0];
}

std::string ChunkMap::string(const std::string& name) const {
    const auto& e = at(name);
    if (e.dtype != DType::U8) throw FormatError("entry is not a string: " + name);
    return std::string(e.u8.begin(), e.u8.end());
}

void ChunkMap::write(std::ostream& os) const {
    write_pod<std::uint64_t>(os, entries_.size());
    for (const auto& e : entries_) {
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(e.name.size()));
        write_bytes(os, e.name.data(), e.name.size());
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(e.dtype));
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(e.dims.size()));
        for (auto d : e.dims) write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(d));
        switch (e.dtype) {
            case DType::F64: write_bytes(os, e.f64.data(), e.f64.size() * sizeof(double)); break;
            case DType::I64: write_bytes(os, e.i64.data(), e.i64.size() * sizeof(std::int64_t)); break;
            case DType::U8: write_bytes(os, e.u8.data(), e.u8.size()); break;
        }
    }
}

ChunkMap ChunkMap::read(std::istream& is) {
    ChunkMap map;
    const auto count = read_pod<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto name_len = read_pod<std::uint32_t>(is);
        if (name_len > 4096) throw FormatError("implausible entry name length");
        std::string name(name_len, '\0');
        read_bytes(is, name.data(), name_len);
        const auto dtype = static_cast<DType>(read_pod<std::uint32_t>(is));
        const auto rank = read_pod<std::uint32_t>(is);
        if (rank > 16) throw FormatError("implausible entry rank");
        std::vector<std::int64_t> dims(rank);
        for (auto& d : dims) d = static_cast<std::int64_t>(read_pod<std::uint64_t>(is));
        const std::int64_t n = product(dims);
        switch (dtype) {
            case DType::F64: {
                std::vector<double> data(static_cast<std::size_t>(n));
                read_bytes(is, data.data(), data.size() * sizeof(double));
                map.add_f64(name, std::move(dims), std::move(data));
                break;
            }
            case DType::I64: {
                std::vector<std::int64_t> data(static_cast<std::size_t>(n));
                read_bytes(is, data.data(), data.size() * sizeof(std::int64_t));
                map.add_i64(name, std::move(dims), std::move(data));
                break;
            }
            case DType::U8: {
                std::vector<std::uint8_t> data(static_cast<std::size_t>(n));
                read_bytes(is, data.data(), data.size());
                map.add_u8(name, std::move(dims), std::move(data));
                break;
            }
            default:
                throw FormatError("unknown entry dtype");
        }
    }
    return map;
}

void write_header(std::ostream& os, FileKind kind) {
    check_endianness();
    write_bytes(os, kMagic, 4);
    write_pod<std::uint32_t>(os, kFormatVersion);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(kind));
}

FileKind read_header(std::istream& is) {
    check_endianness();
    char magic[4];
    read_bytes(is, magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic bytes");
    const auto version = read_pod<std::uint32_t>(is);
    if (version != kFormatVersion) throw FormatError("unsupported format version");
    return static_cast<FileKind>(read_pod<std::uint32_t>(is));
}

void write_chunk_file(const std::string& path, FileKind kind, const ChunkMap& map) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path);
    write_header(os, kind);
    map.write(os);
    if (!os) throw FormatError("write failed: " + path);
}

ChunkMap read_chunk_file(const std::string& path, FileKind expected_kind) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path);
    const FileKind kind = read_header(is);
    if (kind != expected_kind) throw FormatError("unexpected file kind in " + path);
    return ChunkMap::read(is);
}

// ---------------- dataset files ----------------

struct DatasetWriter::Impl {
    std::ofstream os;
    std::int64_t expected = 0;
    std::int64_t written = 0;
    std::streampos table_pos;
    std::vector<std::uint64_t> offsets;
    bool finished = false;
};

DatasetWriter::DatasetWriter(const std::string& path, std::int64_t sample_count, const ChunkMap& header)
    : impl_(new Impl) {
    impl_->os.open(path, std::ios::binary);
    if (!impl_->os) throw FormatError("cannot open for writing: " + path);
    impl_->expected = sample_count;
    write_header(impl_->os, FileKind::Dataset);
    write_pod<std::uint64_t>(impl_->os, static_cast<std::uint64_t>(sample_count));
    impl_->table_pos = impl_->os.tellp();
    // placeholder offset table, patched in finish()
    for (std::int64_t i = 0; i < sample_count; ++i) write_pod<std::uint64_t>(impl_->os, 0);
    header.write(impl_->os);
}

DatasetWriter::~DatasetWriter() {
    delete impl_;
}

void DatasetWriter::write_sample(const ChunkMap& sample) {
    if (impl_->written >= impl_->expected) throw ValidationError("more samples than declared");
    impl_->offsets.push_back(static_cast<std::uint64_t>(impl_->os.tellp()));
    sample.write(impl_->os);
    ++impl_->written;
}

void DatasetWriter::finish() {
    if (impl_->finished) return;
    if (impl_->written != impl_->expected) throw ValidationError("fewer samples written than declared");
    impl_->os.seekp(impl_->table_pos);
    for (auto off : impl_->offsets) write_pod<std::uint64_t>(impl_->os, off);
    impl_->os.flush();
    if (!impl_->os) throw FormatError("dataset write failed");
    impl_->finished = true;
}

struct DatasetReader::Impl {
    mutable std::ifstream is;
    std::int64_t count = 0;
    std::vector<std::uint64_t> offsets;
    ChunkMap header;
};

DatasetReader::DatasetReader(const std::string& path) : impl_(new Impl) {
    impl_->is.open(path, std::ios::binary);
    if (!impl_->is) throw FormatError("cannot open: " + path);
    const FileKind kind = read_header(impl_->is);
    if (kind != FileKind::Dataset) throw FormatError("not a dataset file: " + path);
    impl_->count = static_cast<std::int64_t>(read_pod<std::uint64_t>(impl_->is));
    impl_->offsets.resize(static_cast<std::size_t>(impl_->count));
    for (auto& off : impl_->offsets) {
        off = read_pod<std::uint64_t>(impl_->is);
        if (off == 0) throw FormatError("dataset offset table incomplete (truncated write?)");
    }
    impl_->header = ChunkMap::read(impl_->is);
}

DatasetReader::~DatasetReader() {
    delete impl_;
}

std::int64_t DatasetReader::sample_count() const {
    return impl_->count;
}

const ChunkMap& DatasetReader::header() const {
    return impl_->header;
}

ChunkMap DatasetReader::read_sample(std::int64_t index) const {
    if (index < 0 || index >= impl_->count) throw ValidationError("sample index out of range");
    impl_->is.clear();
    impl_->is.seekg(static_cast<std::streamoff>(impl_->offsets[static_cast<std::size_t>(index)]));
    if (!impl_->is) throw FormatError("seek failed");
    return ChunkMap::read(impl_->is);
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path);
    std::uint64_t h = 14695981039346656037ull;
    char buf[65536];
    while (is) {
        is.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(is.gcount()), h);
    }
    return h;
}

} // namespace egtw
