#include "igkit/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "igkit/error.hpp"

namespace igkit::io {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

void Container::add(const std::string& name, Tensor t, DType dtype) {
  if (has(name)) throw ContractError("duplicate tensor name in container: " + name);
  tensors.push_back({name, std::move(t), dtype});
}

bool Container::has(const std::string& name) const {
  for (const auto& r : tensors)
    if (r.name == name) return true;
  return false;
}

const Tensor& Container::get(const std::string& name) const {
  for (const auto& r : tensors)
    if (r.name == name) return r.tensor;
  throw DataError("container has no tensor named " + name);
}

const std::string& Container::meta_value(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw DataError("container has no metadata key " + key);
  return it->second;
}

std::int64_t Container::count(const std::string& prefix) const {
  std::int64_t n = 0;
  for (const auto& r : tensors)
    if (r.name.rfind(prefix, 0) == 0) n += static_cast<std::int64_t>(r.tensor.numel());
  return n;
}

namespace {

class Writer {
 public:
  std::vector<std::uint8_t> bytes;
  template <class T>
  void pod(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}
  template <class T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw DataError("container is truncated");
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const Container& c) {
  Writer w;
  w.bytes = {'I', 'G', 'K', 'T'};
  w.pod(kContainerVersion);
  w.pod(static_cast<std::uint32_t>(c.meta.size()));
  for (const auto& [k, v] : c.meta) {
    w.str(k);
    w.str(v);
  }
  w.pod(static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& r : c.tensors) {
    w.str(r.name);
    w.pod(static_cast<std::uint8_t>(r.dtype));
    w.pod(static_cast<std::uint32_t>(r.tensor.rank()));
    for (auto d : r.tensor.shape()) w.pod(static_cast<std::uint64_t>(d));
    if (r.dtype == DType::F64)
      for (double v : r.tensor.data()) w.pod(v);
    else
      for (double v : r.tensor.data()) w.pod(static_cast<float>(v));
  }
  return std::move(w.bytes);
}

Container deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "IGKT", 4) != 0) throw DataError("not an igkit container");
  Reader rd(bytes);
  rd.pod<std::uint32_t>();  // magic
  const auto version = rd.pod<std::uint32_t>();
  if (version != kContainerVersion) throw DataError("unsupported container version " + std::to_string(version));
  Container c;
  const auto n_meta = rd.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = rd.str();
    c.meta[k] = rd.str();
  }
  const auto n_tensors = rd.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = rd.str();
    const auto dtype = rd.pod<std::uint8_t>();
    if (dtype > 1) throw DataError("unknown dtype for tensor " + name);
    const auto rank = rd.pod<std::uint32_t>();
    if (rank == 0 || rank > 16) throw DataError("bad rank for tensor " + name);
    Shape shape;
    std::uint64_t numel = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const auto e = rd.pod<std::uint64_t>();
      if (e == 0 || e > (std::uint64_t{1} << 40)) throw DataError("bad extent for tensor " + name);
      shape.push_back(static_cast<std::int64_t>(e));
      numel *= e;
    }
    rd.need(numel * (dtype == 0 ? 8 : 4));
    std::vector<double> data(numel);
    for (auto& v : data) v = dtype == 0 ? rd.pod<double>() : static_cast<double>(rd.pod<float>());
    c.add(name, Tensor(shape, std::move(data)), static_cast<DType>(dtype));
  }
  if (!rd.done()) throw DataError("trailing bytes after container payload");
  return c;
}

void save(const std::filesystem::path& path, const Container& c) {
  const auto bytes = serialize(c);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write " + path.string());
}

namespace {
std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}
}  // namespace

Container load(const std::filesystem::path& path) { return deserialize(read_all(path)); }

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string file_hash(const std::filesystem::path& path) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(read_all(path))));
  return buf;
}

}  // namespace igkit::io
