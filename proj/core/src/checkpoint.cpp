#include "sfd/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <map>

#include "sfd/error.hpp"

namespace sfd::checkpoint {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'F', 'D', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& file) : path_(file.string()), out_(file, std::ios::binary) {
    if (!out_) throw IoError(path_, "cannot open for writing");
  }
  template <typename T>
  void put(T v) { bytes(&v, sizeof v); }
  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw IoError(path_, "write failed");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& file) : path_(file.string()), in_(file, std::ios::binary) {
    if (!in_) throw IoError(path_, "cannot open");
  }
  template <typename T>
  T get() {
    T v{};
    bytes(&v, sizeof v);
    return v;
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) throw IoError(path_, "truncated checkpoint");
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
};

}  // namespace

void save(const std::filesystem::path& file, const NamedTensors& tensors, const translation::PrototypeMemory& memory) {
  Writer w(file);
  w.bytes(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) w.put<std::uint64_t>(d);
    w.bytes(t.data().data(), t.numel() * sizeof(double));
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(memory.size()));
  for (const auto& [c, entry] : memory.entries()) {
    w.put<std::int32_t>(c);
    w.put<std::int32_t>(entry.task);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(entry.prototype.size()));
    w.bytes(entry.prototype.data(), static_cast<std::size_t>(entry.prototype.size()) * sizeof(double));
  }
}

Checkpoint load(const std::filesystem::path& file) {
  Reader r(file);
  char magic[sizeof kMagic];
  r.bytes(magic, sizeof magic);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) throw IoError(r.path(), "not a checkpoint");
  if (const auto version = r.get<std::uint32_t>(); version != kVersion) {
    throw IoError(r.path(), "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(r.get<std::uint32_t>(), '\0');
    r.bytes(name.data(), name.size());
    Shape shape(r.get<std::uint32_t>());
    std::uint64_t numel = 1;
    for (auto& d : shape) {
      d = r.get<std::uint64_t>();
      numel *= d;
      if (numel > kMaxElements) throw IoError(r.path(), "tensor " + name + " is implausibly large");
    }
    std::vector<double> values(numel);
    r.bytes(values.data(), values.size() * sizeof(double));
    ck.tensors.emplace_back(std::move(name), Tensor::from(std::move(shape), std::move(values)));
  }
  const auto prototypes = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < prototypes; ++i) {
    const auto c = r.get<std::int32_t>();
    const auto task = r.get<std::int32_t>();
    const auto dim = r.get<std::uint64_t>();
    if (dim > kMaxElements) throw IoError(r.path(), "prototype is implausibly large");
    Eigen::VectorXd p(static_cast<Eigen::Index>(dim));
    r.bytes(p.data(), dim * sizeof(double));
    ck.memory.set(c, std::move(p), task);
  }
  return ck;
}

void restore(const Checkpoint& source, const NamedTensors& target) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : source.tensors) by_name[name] = &t;
  for (const auto& [name, dst] : target) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw InvalidInput("checkpoint has no tensor named " + name);
    if (it->second->shape() != dst.shape()) {
      throw InvalidInput("checkpoint tensor " + name + " has shape " + shape_string(it->second->shape()) +
                         ", expected " + shape_string(dst.shape()));
    }
    auto out = Tensor(dst).mutable_data();
    auto in = it->second->data();
    std::copy(in.begin(), in.end(), out.begin());
  }
}

}  // namespace sfd::checkpoint
