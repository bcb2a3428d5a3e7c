#include "rdl/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "rdl/errors.hpp"
#include "rdl/file_util.hpp"

namespace rdl {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::uint8_t kF32 = 1;
constexpr std::uint8_t kF64 = 2;
constexpr std::uint8_t kNativeDtype = sizeof(Real) == 4 ? kF32 : kF64;

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  void put_string(std::string_view s) {
    put(std::uint32_t(s.size()));
    put_bytes(s);
  }
  void put_payload(const Tensor& t) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(t.data());
    bytes_.insert(bytes_.end(), p, p + t.size() * sizeof(Real));
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  std::string get_bytes(std::size_t n) {
    const auto* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  std::string get_string() { return get_bytes(get<std::uint32_t>()); }

  // Reads `count` values stored as `dtype` into `out`, converting if needed.
  void get_payload(std::uint8_t dtype, Tensor& out) {
    const std::size_t n = out.size();
    if (dtype == kF32) {
      const auto* p = take(n * 4);
      for (std::size_t i = 0; i < n; ++i) {
        float f;
        std::memcpy(&f, p + 4 * i, 4);
        out[i] = Real(f);
      }
    } else if (dtype == kF64) {
      const auto* p = take(n * 8);
      for (std::size_t i = 0; i < n; ++i) {
        double d;
        std::memcpy(&d, p + 8 * i, 8);
        out[i] = Real(d);
      }
    } else {
      throw DataError("checkpoint: unknown dtype tag " + std::to_string(dtype));
    }
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::uint8_t* take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw DataError("checkpoint: truncated file");
    const auto* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const NetworkModel& model, const AdamOptimizer* optimizer,
                                               const std::string& train_state) {
  Writer w;
  w.put_bytes("RDLN");
  w.put(kCheckpointVersion);
  w.put_string(model.config().to_text());
  const auto& params = model.parameters();
  w.put(std::uint32_t(params.count()));
  for (const auto& p : params) {
    w.put_string(p->name);
    w.put(kNativeDtype);
    w.put(std::uint8_t(p->value.rank()));
    for (auto d : p->value.shape()) w.put(std::uint64_t(d));
    w.put_payload(p->value);
  }
  if (optimizer != nullptr) {
    Writer section;
    section.put(std::uint64_t(optimizer->step_count()));
    const auto& cfg = optimizer->config();
    for (Real v : {cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon}) section.put(double(v));
    for (std::size_t i = 0; i < params.count(); ++i) {
      section.put(kNativeDtype);
      section.put_payload(optimizer->first_moments().at(i));
      section.put(kNativeDtype);
      section.put_payload(optimizer->second_moments().at(i));
    }
    w.put_bytes("ADAM");
    w.put(std::uint64_t(section.bytes().size()));
    w.bytes().insert(w.bytes().end(), section.bytes().begin(), section.bytes().end());
  }
  if (!train_state.empty()) {
    w.put_bytes("STAT");
    w.put(std::uint64_t(train_state.size()));
    w.put_bytes(train_state);
  }
  return std::move(w.bytes());
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.get_bytes(4) != "RDLN") throw DataError("checkpoint: bad magic (not an RDLN file)");
  const auto version = r.get<std::uint16_t>();
  if (version != kCheckpointVersion) throw DataError("checkpoint: unsupported version " + std::to_string(version));
  NetworkConfig config;
  try {
    config = NetworkConfig::from_text(r.get_string());
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint: bad config block: ") + e.what());
  }
  Checkpoint ck{NetworkModel(config), std::nullopt, {}};
  auto& params = ck.model.parameters();
  const auto count = r.get<std::uint32_t>();
  if (count != params.count()) {
    throw DataError("checkpoint: holds " + std::to_string(count) + " parameters, config builds " +
                    std::to_string(params.count()));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.get_string();
    Parameter& p = params[i];
    if (p.name != name) throw DataError("checkpoint: parameter " + name + " found where " + p.name + " expected");
    const auto dtype = r.get<std::uint8_t>();
    const auto rank = r.get<std::uint8_t>();
    Shape shape(rank);
    for (auto& d : shape) d = std::size_t(r.get<std::uint64_t>());
    if (shape != p.value.shape()) {
      throw DataError("checkpoint: " + name + " has shape " + shape_string(shape) + ", expected " +
                      shape_string(p.value.shape()));
    }
    r.get_payload(dtype, p.value);
  }
  while (!r.done()) {
    const std::string tag = r.get_bytes(4);
    const auto len = r.get<std::uint64_t>();
    if (tag == "ADAM") {
      AdamConfig cfg;
      const auto step = r.get<std::uint64_t>();
      cfg.learning_rate = Real(r.get<double>());
      cfg.beta1 = Real(r.get<double>());
      cfg.beta2 = Real(r.get<double>());
      cfg.epsilon = Real(r.get<double>());
      AdamOptimizer opt(params, cfg);
      opt.set_step_count(step);
      for (std::size_t i = 0; i < params.count(); ++i) {
        r.get_payload(r.get<std::uint8_t>(), opt.first_moments()[i]);
        r.get_payload(r.get<std::uint8_t>(), opt.second_moments()[i]);
      }
      ck.optimizer = std::move(opt);
    } else if (tag == "STAT") {
      ck.train_state = r.get_bytes(std::size_t(len));
    } else {
      r.get_bytes(std::size_t(len));  // unknown section
    }
  }
  return ck;
}

void save_checkpoint(const std::string& path, const NetworkModel& model, const AdamOptimizer* optimizer,
                     const std::string& train_state) {
  write_file_atomic(path, serialize_checkpoint(model, optimizer, train_state));
}

Checkpoint load_checkpoint(const std::string& path) { return deserialize_checkpoint(read_file_bytes(path)); }

}  // namespace rdl
