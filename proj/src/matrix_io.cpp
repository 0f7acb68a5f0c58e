#include "claimrank/matrix_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace claimrank {

static_assert(std::endian::native == std::endian::little,
              "the embedding store writes little-endian scalars via memcpy");

namespace {

constexpr char kMagic[4] = {'C', 'R', 'E', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFlagNormalized = 1u << 0;
constexpr std::uint32_t kMaxStringLength = 1u << 20;

template <typename T>
void write_scalar(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_scalar(std::istream& in, const char* what) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw FormatError(std::string("truncated file while reading ") + what);
    return value;
}

void write_string(std::ostream& out, const std::string& s) {
    write_scalar<std::uint32_t>(out, std::uint32_t(s.size()));
    out.write(s.data(), std::streamsize(s.size()));
}

std::string read_string(std::istream& in, const char* what) {
    auto len = read_scalar<std::uint32_t>(in, what);
    if (len > kMaxStringLength)
        throw FormatError(std::string("implausible string length while reading ") + what);
    std::string s(len, '\0');
    in.read(s.data(), std::streamsize(len));
    if (!in) throw FormatError(std::string("truncated file while reading ") + what);
    return s;
}

}  // namespace

void save_matrix(const EmbeddingMatrix& m, const std::string& path) {
    m.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out.write(kMagic, sizeof(kMagic));
    write_scalar<std::uint32_t>(out, kVersion);
    write_scalar<std::uint32_t>(out, m.normalized ? kFlagNormalized : 0);
    write_string(out, m.model_id);
    write_scalar<std::uint64_t>(out, std::uint64_t(m.ids.size()));
    write_scalar<std::uint32_t>(out, m.dim);
    for (const auto& id : m.ids) write_string(out, id);
    out.write(reinterpret_cast<const char*>(m.rows.data()),
              std::streamsize(m.rows.size() * sizeof(float)));
    if (!out) throw FormatError("write to '" + path + "' failed");
}

EmbeddingMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    in.seekg(0, std::ios::end);
    const std::uint64_t file_size = std::uint64_t(in.tellg());
    in.seekg(0, std::ios::beg);

    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("'" + path + "' is not an embedding matrix file (bad magic)");
    auto version = read_scalar<std::uint32_t>(in, "version");
    if (version != kVersion)
        throw FormatError("unsupported version " + std::to_string(version) + " in '" + path + "'");
    auto flags = read_scalar<std::uint32_t>(in, "flags");

    EmbeddingMatrix m;
    m.normalized = (flags & kFlagNormalized) != 0;
    m.model_id = read_string(in, "model id");
    auto n = read_scalar<std::uint64_t>(in, "row count");
    m.dim = read_scalar<std::uint32_t>(in, "dimension");
    if (n > file_size / 4)
        throw FormatError("implausible row count in '" + path + "'");
    if (m.dim > 0 && n > file_size / (4ull * m.dim))
        throw FormatError("truncated payload in '" + path + "'");

    for (std::uint64_t i = 0; i < n; ++i) m.ids.push_back(read_string(in, "id record"));

    m.rows.resize(std::size_t(n) * m.dim);
    in.read(reinterpret_cast<char*>(m.rows.data()),
            std::streamsize(m.rows.size() * sizeof(float)));
    if (!in || std::size_t(in.gcount()) != m.rows.size() * sizeof(float))
        throw FormatError("truncated payload in '" + path + "'");
    if (in.peek() != std::char_traits<char>::eof())
        throw FormatError("trailing bytes after payload in '" + path + "'");

    m.validate();
    return m;
}

}  // namespace claimrank
