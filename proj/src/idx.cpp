#include "tame/idx.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tame::idx {

namespace {

constexpr uint32_t kImagesMagic = 0x00000803;
constexpr uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw std::runtime_error("cannot open: " + path);
    const std::streamsize size = f.tellg();
    f.seekg(0);
    std::vector<unsigned char> data(static_cast<size_t>(size));
    f.read(reinterpret_cast<char*>(data.data()), size);
    if (!f) throw std::runtime_error("read failed: " + path);
    return data;
}

std::vector<unsigned char> gunzip(const std::vector<unsigned char>& in, const std::string& path) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) throw std::runtime_error("zlib init failed");
    std::vector<unsigned char> out;
    out.resize(in.size() * 4 + 1024);
    zs.next_in = const_cast<unsigned char*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    size_t written = 0;
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        if (written == out.size()) out.resize(out.size() * 2);
        zs.next_out = out.data() + written;
        zs.avail_out = static_cast<uInt>(out.size() - written);
        rc = inflate(&zs, Z_NO_FLUSH);
        written = out.size() - zs.avail_out;
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw std::runtime_error("gzip decode failed: " + path);
        }
    }
    inflateEnd(&zs);
    out.resize(written);
    return out;
}

std::vector<unsigned char> read_maybe_gz(const std::string& path) {
    std::vector<unsigned char> raw = read_file(path);
    if (raw.size() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b) return gunzip(raw, path);
    return raw;
}

uint32_t be32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) << 24 | static_cast<uint32_t>(p[1]) << 16 |
           static_cast<uint32_t>(p[2]) << 8 | static_cast<uint32_t>(p[3]);
}

}  // namespace

Tensor load_images(const std::string& path, float mean, float stddev) {
    const auto data = read_maybe_gz(path);
    if (data.size() < 16) throw std::runtime_error("idx file too short: " + path);
    if (be32(data.data()) != kImagesMagic)
        throw std::runtime_error("bad idx image magic in " + path);
    const uint32_t n = be32(data.data() + 4);
    const uint32_t h = be32(data.data() + 8);
    const uint32_t w = be32(data.data() + 12);
    const size_t expect = 16 + static_cast<size_t>(n) * h * w;
    if (data.size() < expect) throw std::runtime_error("idx image file truncated: " + path);

    Tensor out({static_cast<int>(n), 1, static_cast<int>(h), static_cast<int>(w)});
    const float inv_std = 1.0f / stddev;
    const unsigned char* px = data.data() + 16;
    for (int64_t i = 0; i < out.numel(); ++i)
        out.values[static_cast<size_t>(i)] = (static_cast<float>(px[i]) / 255.0f - mean) * inv_std;
    return out;
}

std::vector<int> load_labels(const std::string& path) {
    const auto data = read_maybe_gz(path);
    if (data.size() < 8) throw std::runtime_error("idx file too short: " + path);
    if (be32(data.data()) != kLabelsMagic)
        throw std::runtime_error("bad idx label magic in " + path);
    const uint32_t n = be32(data.data() + 4);
    if (data.size() < 8 + static_cast<size_t>(n))
        throw std::runtime_error("idx label file truncated: " + path);
    std::vector<int> labels(n);
    for (uint32_t i = 0; i < n; ++i) labels[i] = static_cast<int>(data[8 + i]);
    return labels;
}

IdxData load_pair(const std::string& images_path, const std::string& labels_path) {
    IdxData d{load_images(images_path), load_labels(labels_path)};
    if (d.images.dim(0) != static_cast<int>(d.labels.size()))
        throw std::runtime_error("image/label count mismatch: " + images_path);
    return d;
}

}  // namespace tame::idx
