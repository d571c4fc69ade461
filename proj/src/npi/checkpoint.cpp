#include "npi/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace npi {

namespace {

constexpr uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <class T>
T get(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw std::runtime_error("checkpoint truncated");
    return v;
}

std::string hex64(uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

}  // namespace

uint64_t fnv1a64(const void* data, size_t len) {
    const auto* p = static_cast<const uint8_t*>(data);
    uint64_t h = 0xcbf29ce484222325ull;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string file_checksum_hex(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return hex64(fnv1a64(bytes.data(), bytes.size()));
}

void save_checkpoint(const Params<float>& params, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write("NPIR", 4);
    put<uint32_t>(os, kVersion);
    put<uint8_t>(os, static_cast<uint8_t>(params.cfg.task));
    put<uint8_t>(os, static_cast<uint8_t>(params.cfg.encoder));
    put<uint16_t>(os, 0);
    put<uint64_t>(os, params.cfg.seed);
    for (int d : {params.cfg.s_dim, params.cfg.emb_dim, params.cfg.key_dim, params.cfg.hidden}) {
        put<int32_t>(os, d);
    }

    nlohmann::json manifest;
    manifest["magic"] = "NPIR";
    manifest["version"] = kVersion;
    manifest["task"] = task_name(params.cfg.task);
    manifest["encoder"] = encoder_name(params.cfg.encoder);
    manifest["seed"] = params.cfg.seed;
    manifest["dims"] = {{"s_dim", params.cfg.s_dim},
                        {"emb_dim", params.cfg.emb_dim},
                        {"key_dim", params.cfg.key_dim},
                        {"hidden", params.cfg.hidden}};
    auto tensors = nlohmann::json::array();

    uint32_t count = 0;
    params.for_each([&](const char*, const Mat<float>&) { count++; });
    put<uint32_t>(os, count);
    params.for_each([&](const char* name, const Mat<float>& m) {
        uint32_t nlen = static_cast<uint32_t>(std::strlen(name));
        put<uint32_t>(os, nlen);
        os.write(name, nlen);
        put<uint32_t>(os, static_cast<uint32_t>(m.rows()));
        put<uint32_t>(os, static_cast<uint32_t>(m.cols()));
        size_t bytes = sizeof(float) * static_cast<size_t>(m.size());
        os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(bytes));
        tensors.push_back({{"name", name},
                           {"rows", m.rows()},
                           {"cols", m.cols()},
                           {"fnv64", hex64(fnv1a64(m.data(), bytes))}});
    });
    manifest["tensors"] = tensors;
    os.close();
    if (!os) throw std::runtime_error("write failed: " + path);

    manifest["file_fnv64"] = file_checksum_hex(path);
    std::ofstream ms(path + ".json");
    if (!ms) throw std::runtime_error("cannot open " + path + ".json for writing");
    ms << manifest.dump(2) << '\n';
}

Params<float> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "NPIR", 4) != 0) {
        throw std::runtime_error(path + ": not a NPIR checkpoint");
    }
    uint32_t version = get<uint32_t>(is);
    if (version != kVersion) throw std::runtime_error("unsupported checkpoint version");
    ModelConfig cfg;
    cfg.task = static_cast<Task>(get<uint8_t>(is));
    cfg.encoder = static_cast<Encoder>(get<uint8_t>(is));
    get<uint16_t>(is);
    cfg.seed = get<uint64_t>(is);
    cfg.s_dim = get<int32_t>(is);
    cfg.emb_dim = get<int32_t>(is);
    cfg.key_dim = get<int32_t>(is);
    cfg.hidden = get<int32_t>(is);

    Params<float> P;
    P.cfg = cfg;
    P.allocate();
    uint32_t count = get<uint32_t>(is);
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t nlen = get<uint32_t>(is);
        std::string name(nlen, '\0');
        is.read(name.data(), nlen);
        uint32_t rows = get<uint32_t>(is);
        uint32_t cols = get<uint32_t>(is);
        Mat<float>* dst = nullptr;
        P.for_each([&](const char* n, Mat<float>& m) {
            if (name == n) dst = &m;
        });
        if (!dst) throw std::runtime_error("unknown tensor in checkpoint: " + name);
        if (dst->rows() != static_cast<Eigen::Index>(rows) ||
            dst->cols() != static_cast<Eigen::Index>(cols)) {
            throw std::runtime_error("shape mismatch for tensor " + name);
        }
        is.read(reinterpret_cast<char*>(dst->data()),
                static_cast<std::streamsize>(sizeof(float) * rows * cols));
        if (!is) throw std::runtime_error("checkpoint truncated in " + name);
    }
    return P;
}

}  // namespace npi
