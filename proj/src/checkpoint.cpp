#include "ner/checkpoint.h"

#include <cstring>
#include <fstream>
#include <ostream>

#include "ner/error.h"

namespace ner {

namespace {

constexpr char kMagic[8] = {'N', 'E', 'R', 'C', 'K', 'P', 'T', '\n'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_string(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t read_u32(std::istream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw LoadError("checkpoint truncated");
    return v;
}

uint64_t read_u64(std::istream& in) {
    uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw LoadError("checkpoint truncated");
    return v;
}

std::string read_string(std::istream& in) {
    uint64_t n = read_u64(in);
    if (n > (1ull << 32)) throw LoadError("checkpoint corrupt: unreasonable string length");
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw LoadError("checkpoint truncated");
    return s;
}

}  // namespace

TensorPtr ParamStore::add(const std::string& name, Tensor init) {
    if (has(name)) throw ContractError("ParamStore: duplicate parameter " + name);
    init.requires_grad = true;
    TensorPtr p = std::make_shared<Tensor>(std::move(init));
    items_.emplace_back(name, p);
    return p;
}

TensorPtr ParamStore::get(const std::string& name) const {
    for (const auto& [n, p] : items_)
        if (n == name) return p;
    throw ContractError("ParamStore: unknown parameter " + name);
}

bool ParamStore::has(const std::string& name) const {
    for (const auto& [n, p] : items_)
        if (n == name) return true;
    return false;
}

std::vector<TensorPtr> ParamStore::tensors() const {
    std::vector<TensorPtr> out;
    out.reserve(items_.size());
    for (const auto& [n, p] : items_) out.push_back(p);
    return out;
}

void save_checkpoint(std::ostream& out, const ParamStore& params,
                     const std::map<std::string, std::string>& meta) {
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);

    write_u64(out, meta.size());
    for (const auto& [k, v] : meta) {
        write_string(out, k);
        write_string(out, v);
    }

    write_u64(out, params.size());
    for (const auto& [name, p] : params.items()) {
        write_string(out, name);
        write_u32(out, static_cast<uint32_t>(p->shape.size()));
        for (int d : p->shape) write_u64(out, static_cast<uint64_t>(d));
        out.write(reinterpret_cast<const char*>(p->values.data()),
                  static_cast<std::streamsize>(p->values.size() * sizeof(double)));
    }
    if (!out) throw Error("checkpoint write failed");
}

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const std::map<std::string, std::string>& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open checkpoint for writing: " + path);
    save_checkpoint(out, params, meta);
}

CheckpointData load_checkpoint(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw LoadError("not a checkpoint file (bad magic)");
    uint32_t version = read_u32(in);
    if (version != kVersion)
        throw LoadError("checkpoint version " + std::to_string(version) + " unsupported, expected " +
                        std::to_string(kVersion));

    CheckpointData data;
    uint64_t nmeta = read_u64(in);
    for (uint64_t i = 0; i < nmeta; ++i) {
        std::string k = read_string(in);
        data.meta[k] = read_string(in);
    }

    uint64_t nparams = read_u64(in);
    for (uint64_t i = 0; i < nparams; ++i) {
        std::string name = read_string(in);
        uint32_t ndim = read_u32(in);
        if (ndim > 8) throw LoadError("checkpoint corrupt: rank " + std::to_string(ndim));
        std::vector<int> shape;
        int64_t count = 1;
        for (uint32_t d = 0; d < ndim; ++d) {
            uint64_t e = read_u64(in);
            if (e == 0 || e > (1ull << 31)) throw LoadError("checkpoint corrupt: extent " + std::to_string(e));
            shape.push_back(static_cast<int>(e));
            count *= static_cast<int64_t>(e);
        }
        Tensor t = Tensor::zeros(shape);
        in.read(reinterpret_cast<char*>(t.values.data()),
                static_cast<std::streamsize>(static_cast<size_t>(count) * sizeof(double)));
        if (!in) throw LoadError("checkpoint truncated inside parameter " + name);
        data.params.emplace_back(std::move(name), std::move(t));
    }
    return data;
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open checkpoint: " + path);
    return load_checkpoint(in);
}

}  // namespace ner
