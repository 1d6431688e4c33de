#include "spclosure/container.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spclosure {

namespace {

void put_u32(std::string& out, uint32_t x) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t x) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
    uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size()) throw std::runtime_error("container: truncated file");
    }
    uint32_t u32() {
        need(4);
        uint32_t x = 0;
        for (int i = 0; i < 4; ++i)
            x |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        return x;
    }
    uint64_t u64() {
        need(8);
        uint64_t x = 0;
        for (int i = 0; i < 8; ++i)
            x |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return x;
    }
    double f64() {
        uint64_t bits = u64();
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    }
    std::string str(size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

void ArrayContainer::set_meta(const std::string& key, double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    meta_[key] = os.str();
}

void ArrayContainer::set_meta(const std::string& key, int64_t value) {
    meta_[key] = std::to_string(value);
}

const std::string& ArrayContainer::meta(const std::string& key) const {
    auto it = meta_.find(key);
    if (it == meta_.end()) throw std::runtime_error("container: missing metadata key '" + key + "'");
    return it->second;
}

double ArrayContainer::meta_double(const std::string& key) const { return std::stod(meta(key)); }

int64_t ArrayContainer::meta_int(const std::string& key) const { return std::stoll(meta(key)); }

void ArrayContainer::add(const std::string& name, std::vector<uint64_t> shape,
                         std::vector<double> data) {
    if (has(name)) throw std::runtime_error("container: duplicate entry name '" + name + "'");
    uint64_t count = 1;
    for (uint64_t d : shape) count *= d;
    if (count != data.size())
        throw std::runtime_error("container: shape/payload mismatch for '" + name + "'");
    entries_.push_back({name, std::move(shape), std::move(data)});
}

void ArrayContainer::add_vector(const std::string& name, std::vector<double> data) {
    uint64_t n = data.size();
    add(name, {n}, std::move(data));
}

bool ArrayContainer::has(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return true;
    return false;
}

const ArrayContainer::Entry& ArrayContainer::get(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return e;
    throw std::runtime_error("container: missing entry '" + name + "'");
}

void ArrayContainer::save(const std::string& path) const {
    std::string out;
    out += "SPNC1";
    put_u32(out, kVersion);
    put_u32(out, static_cast<uint32_t>(meta_.size()));
    for (const auto& [k, v] : meta_) {
        put_u32(out, static_cast<uint32_t>(k.size()));
        out += k;
        put_u32(out, static_cast<uint32_t>(v.size()));
        out += v;
    }
    put_u32(out, static_cast<uint32_t>(entries_.size()));
    for (const auto& e : entries_) {
        put_u32(out, static_cast<uint32_t>(e.name.size()));
        out += e.name;
        put_u32(out, static_cast<uint32_t>(e.shape.size()));
        for (uint64_t d : e.shape) put_u64(out, d);
        out.reserve(out.size() + 8 * e.data.size());
        for (double d : e.data) put_f64(out, d);
    }

    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("container: cannot open '" + tmp + "' for writing");
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
        if (!f) throw std::runtime_error("container: write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("container: rename to '" + path + "' failed");
}

ArrayContainer ArrayContainer::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("container: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    std::string buf = ss.str();

    Reader r{buf};
    if (r.str(5) != "SPNC1") throw std::runtime_error("container: bad magic in '" + path + "'");
    uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("container: unsupported version " + std::to_string(version));

    ArrayContainer c;
    uint32_t n_meta = r.u32();
    for (uint32_t i = 0; i < n_meta; ++i) {
        std::string k = r.str(r.u32());
        std::string v = r.str(r.u32());
        c.meta_[k] = v;
    }
    uint32_t n_entries = r.u32();
    for (uint32_t i = 0; i < n_entries; ++i) {
        Entry e;
        e.name = r.str(r.u32());
        uint32_t ndim = r.u32();
        uint64_t count = 1;
        for (uint32_t d = 0; d < ndim; ++d) {
            e.shape.push_back(r.u64());
            count *= e.shape.back();
        }
        e.data.resize(count);
        for (uint64_t j = 0; j < count; ++j) e.data[j] = r.f64();
        c.entries_.push_back(std::move(e));
    }
    return c;
}

}  // namespace spclosure
