#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace spclosure {

/// Self-describing binary container for arrays plus key-value metadata.
///
/// Layout (all integers little-endian):
///   magic "SPNC1" | u32 version | u32 n_meta | n_meta * (u32 klen, key,
///   u32 vlen, value) | u32 n_entries | n_entries * (u32 nlen, name,
///   u32 ndim, u64 dims[ndim], f64 payload[prod(dims)])
///
/// Doubles are stored as raw IEEE-754 bits, so write -> read round-trips are
/// bit-exact. Entry names are unique.
class ArrayContainer {
public:
    struct Entry {
        std::string name;
        std::vector<uint64_t> shape;
        std::vector<double> data;
    };

    static constexpr uint32_t kVersion = 1;

    void set_meta(const std::string& key, const std::string& value) { meta_[key] = value; }
    void set_meta(const std::string& key, double value);
    void set_meta(const std::string& key, int64_t value);
    bool has_meta(const std::string& key) const { return meta_.count(key) > 0; }
    const std::string& meta(const std::string& key) const;
    double meta_double(const std::string& key) const;
    int64_t meta_int(const std::string& key) const;
    const std::map<std::string, std::string>& all_meta() const { return meta_; }

    void add(const std::string& name, std::vector<uint64_t> shape, std::vector<double> data);
    void add_vector(const std::string& name, std::vector<double> data);
    bool has(const std::string& name) const;
    const Entry& get(const std::string& name) const;
    const std::vector<Entry>& entries() const { return entries_; }

    /// Atomic write: temp file in the same directory, then rename.
    void save(const std::string& path) const;
    static ArrayContainer load(const std::string& path);

private:
    std::map<std::string, std::string> meta_;
    std::vector<Entry> entries_;
};

}  // namespace spclosure
